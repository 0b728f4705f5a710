#include "swahr/kernels.hpp"

namespace swahr::kernels {

namespace {
thread_local Backend g_backend = Backend::parallel;
}

Backend backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }
bool parallel_enabled() { return g_backend == Backend::parallel; }

double sum_sq_diff(const float* a, const float* b, size_t n) {
  return reduce(n, [a, b](size_t i) {
    const double d = double(a[i]) - double(b[i]);
    return d * d;
  });
}

double weighted_sum_sq_diff(const float* a, const float* b, const float* w,
                            size_t n) {
  return reduce(n, [a, b, w](size_t i) {
    const double d = double(a[i]) - double(b[i]);
    return double(w[i]) * d * d;
  });
}

double masked_sum_sq(const float* a, const uint8_t* mask, size_t n) {
  return reduce(n, [a, mask](size_t i) {
    return mask[i] ? double(a[i]) * double(a[i]) : 0.0;
  });
}

namespace serial {
double sum_sq_diff(const float* a, const float* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = double(a[i]) - double(b[i]);
    acc += d * d;
  }
  return acc;
}

double weighted_sum_sq_diff(const float* a, const float* b, const float* w,
                            size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = double(a[i]) - double(b[i]);
    acc += double(w[i]) * d * d;
  }
  return acc;
}

double masked_sum_sq(const float* a, const uint8_t* mask, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (mask[i]) acc += double(a[i]) * double(a[i]);
  }
  return acc;
}
}  // namespace serial

}  // namespace swahr::kernels
