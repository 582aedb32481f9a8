#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace entlab {

/// Number of samples per RNG chunk. Fixed so that results depend only on
/// the seed, never on the worker count.
inline constexpr std::size_t kChunkSize = 4096;

void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs `body(chunk, begin, end)` for every chunk of [0, count). Chunks are
/// distributed over the configured workers; `body` must only write to
/// per-index output slots.
void for_each_chunk(std::size_t count, const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                    std::size_t chunk_size = kChunkSize);

/// Pairwise summation in a fixed tree order.
double pairwise_sum(std::span<const double> values);

struct MeanAndError {
  double mean = 0.0;
  double std_error = 0.0;
  double std_dev = 0.0;
};

/// Sample mean and standard error (sample std / sqrt(m)) with pairwise sums.
MeanAndError mean_and_error(std::span<const double> values);

}  // namespace entlab
