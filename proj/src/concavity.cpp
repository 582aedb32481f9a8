#include "entlab/concavity.hpp"

#include <cmath>

#include "entlab/error.hpp"

namespace entlab {

double kappa_convolution(double k1, double k2) {
  if (!std::isfinite(k1) || !std::isfinite(k2) || k1 < -1.0 || k1 > 1.0 || k2 < -1.0 || k2 > 1.0)
    throw InvalidParameter("kappa_convolution: parameters must lie in [-1, 1]");
  if (!(k1 + k2 > 0.0)) throw InvalidParameter("kappa_convolution: requires k1 + k2 > 0");
  if (k1 == 0.0 || k2 == 0.0) return 0.0;
  return 1.0 / (1.0 / k1 + 1.0 / k2);
}

}  // namespace entlab
