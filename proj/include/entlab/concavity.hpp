#pragma once

namespace entlab {

/// Concavity parameter of the convolution of a k1-concave and a k2-concave
/// measure: 1/k = 1/k1 + 1/k2, valid for k1, k2 in [-1, 1] with k1 + k2 > 0.
/// A zero argument is the log-concave limit and yields 0. The result may
/// be negative. Throws InvalidParameter outside the valid range.
double kappa_convolution(double k1, double k2);

}  // namespace entlab
