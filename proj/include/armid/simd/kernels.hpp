#pragma once

namespace armid::simd {

/// Dense row-major kernels. Every gemm accumulates into C:
///   gemm_nn: C[m x n] += A[m x k] * B[k x n]
///   gemm_nt: C[m x n] += A[m x k] * B[n x k]^T
///   gemm_tn: C[m x n] += A[k x m]^T * B[k x n]
/// lda/ldb/ldc are row strides in elements.
template <typename T>
struct KernelTable {
  const char* name;
  void (*gemm_nn)(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc);
  void (*gemm_nt)(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc);
  void (*gemm_tn)(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc);
  T (*dot)(int n, const T* x, const T* y);
  void (*axpy)(int n, T alpha, const T* x, T* y);  // y += alpha * x
};

template <typename T>
const KernelTable<T>& scalar_kernels();

/// AVX2/FMA table, or nullptr when not compiled in or the CPU lacks support.
template <typename T>
const KernelTable<T>* avx2_kernels();

/// Chosen once per process: AVX2 when available unless ARMID_SIMD=scalar.
template <typename T>
const KernelTable<T>& active_kernels();

}  // namespace armid::simd
