#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace swahr::kernels {

// Backend selection for the hot loops. `serial` runs plain reference loops
// with left-to-right accumulation; `parallel` runs OpenMP loops whose
// reductions sum fixed-size blocks and combine the partials in block order,
// so the result is independent of the thread count. The setting is
// thread-local; sweeps that parallelize across fits force `serial` inside
// each worker.
enum class Backend { serial, parallel };

Backend backend();
void set_backend(Backend b);
bool parallel_enabled();

struct BackendGuard {
  explicit BackendGuard(Backend b) : saved(backend()) { set_backend(b); }
  ~BackendGuard() { set_backend(saved); }
  Backend saved;
};

// Block width for deterministic parallel reductions. All loss sums use it.
inline constexpr size_t kReduceBlock = 4096;

namespace detail {
template <class Term>
double blocked(size_t n, Term term) {
  if (n == 0) return 0.0;
  const size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < (long long)nblocks; ++b) {
    const size_t lo = size_t(b) * kReduceBlock;
    const size_t hi = lo + kReduceBlock < n ? lo + kReduceBlock : n;
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) acc += term(i);
    partial[size_t(b)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

template <class Term>
double straight(size_t n, Term term) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += term(i);
  return acc;
}
}  // namespace detail

// Deterministic sum of term(i) for i in [0, n); term returns double.
template <class Term>
double reduce(size_t n, Term term) {
  return parallel_enabled() ? detail::blocked(n, term)
                            : detail::straight(n, term);
}

// sum over i of (a[i] - b[i])^2, accumulated in double
double sum_sq_diff(const float* a, const float* b, size_t n);
// sum over i of w[i] * (a[i] - b[i])^2
double weighted_sum_sq_diff(const float* a, const float* b, const float* w,
                            size_t n);
// sum over masked i of a[i]^2
double masked_sum_sq(const float* a, const uint8_t* mask, size_t n);

// Reference implementations: one thread, straight left-to-right sums.
// Kept callable so tests and the benchmark can compare backends.
namespace serial {
double sum_sq_diff(const float* a, const float* b, size_t n);
double weighted_sum_sq_diff(const float* a, const float* b, const float* w,
                            size_t n);
double masked_sum_sq(const float* a, const uint8_t* mask, size_t n);
}  // namespace serial

}  // namespace swahr::kernels
