#include <immintrin.h>

#include "armid/simd/kernels.hpp"

namespace armid::simd {

namespace {

template <typename T>
struct Ops;

template <>
struct Ops<float> {
  static float dot(int n, const float* x, const float* y) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    int i = 0;
    for (; i + 16 <= n; i += 16) {
      acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
      acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    acc0 = _mm256_add_ps(acc0, acc1);
    __m128 lo = _mm_add_ps(_mm256_castps256_ps128(acc0), _mm256_extractf128_ps(acc0, 1));
    lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
    float s = _mm_cvtss_f32(lo);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
  }
  static void axpy(int n, float alpha, const float* x, float* y) {
    const __m256 a = _mm256_set1_ps(alpha);
    int i = 0;
    for (; i + 8 <= n; i += 8)
      _mm256_storeu_ps(y + i, _mm256_fmadd_ps(a, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
  }
};

template <>
struct Ops<double> {
  static double dot(int n, const double* x, const double* y) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    int i = 0;
    for (; i + 8 <= n; i += 8) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc0 = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm_add_pd(_mm256_castpd256_pd128(acc0), _mm256_extractf128_pd(acc0, 1));
    lo = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
    double s = _mm_cvtsd_f64(lo);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
  }
  static void axpy(int n, double alpha, const double* x, double* y) {
    const __m256d a = _mm256_set1_pd(alpha);
    int i = 0;
    for (; i + 4 <= n; i += 4)
      _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
  }
};

#include "gemm_impl.hpp"

template <typename T>
const KernelTable<T> kTable{"avx2", gemm_nn_impl<T>, gemm_nt_impl<T>, gemm_tn_impl<T>, dot_entry<T>, axpy_entry<T>};

bool avx2_supported_by_cpu() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}

}  // namespace

template <>
const KernelTable<float>* avx2_kernels<float>() {
  return avx2_supported_by_cpu() ? &kTable<float> : nullptr;
}
template <>
const KernelTable<double>* avx2_kernels<double>() {
  return avx2_supported_by_cpu() ? &kTable<double> : nullptr;
}

}  // namespace armid::simd
