#include "entlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace entlab {
namespace {

std::atomic<unsigned> g_workers{0};

double pairwise_sum_impl(const double* v, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}

}  // namespace

void set_worker_count(unsigned workers) { g_workers.store(workers); }

unsigned worker_count() {
  const unsigned w = g_workers.load();
  if (w != 0) return w;
  return std::max(1u, std::thread::hardware_concurrency());
}

void for_each_chunk(std::size_t count, const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                    std::size_t chunk_size) {
  if (count == 0) return;
  const std::size_t chunks = (count + chunk_size - 1) / chunk_size;
  const std::size_t workers = std::min<std::size_t>(worker_count(), chunks);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    body(c, begin, std::min(count, begin + chunk_size));
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(chunks);
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

double pairwise_sum(std::span<const double> values) { return pairwise_sum_impl(values.data(), values.size()); }

MeanAndError mean_and_error(std::span<const double> values) {
  MeanAndError out;
  const std::size_t m = values.size();
  if (m == 0) return out;
  out.mean = pairwise_sum(values) / static_cast<double>(m);
  if (m < 2) return out;
  std::vector<double> sq(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = values[i] - out.mean;
    sq[i] = d * d;
  }
  out.std_dev = std::sqrt(pairwise_sum(sq) / static_cast<double>(m - 1));
  out.std_error = out.std_dev / std::sqrt(static_cast<double>(m));
  return out;
}

}  // namespace entlab
