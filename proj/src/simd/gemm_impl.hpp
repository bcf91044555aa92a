#pragma once

// Shared loop nests. Included by each kernel translation unit inside an
// anonymous namespace after `Ops` (dot / axpy) is defined there, so every
// instruction set gets its own internal-linkage copy.

template <typename T>
void gemm_nn_impl(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    T* ci = c + static_cast<long>(i) * ldc;
    const T* ai = a + static_cast<long>(i) * lda;
    for (int p = 0; p < k; ++p) {
      const T alpha = ai[p];
      if (alpha != T(0)) Ops<T>::axpy(n, alpha, b + static_cast<long>(p) * ldb, ci);
    }
  }
}

template <typename T>
void gemm_nt_impl(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<long>(i) * lda;
    T* ci = c + static_cast<long>(i) * ldc;
    for (int j = 0; j < n; ++j) ci[j] += Ops<T>::dot(k, ai, b + static_cast<long>(j) * ldb);
  }
}

template <typename T>
void gemm_tn_impl(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  for (int p = 0; p < k; ++p) {
    const T* ap = a + static_cast<long>(p) * lda;
    const T* bp = b + static_cast<long>(p) * ldb;
    for (int i = 0; i < m; ++i) {
      const T alpha = ap[i];
      if (alpha != T(0)) Ops<T>::axpy(n, alpha, bp, c + static_cast<long>(i) * ldc);
    }
  }
}

template <typename T>
T dot_entry(int n, const T* x, const T* y) {
  return Ops<T>::dot(n, x, y);
}

template <typename T>
void axpy_entry(int n, T alpha, const T* x, T* y) {
  Ops<T>::axpy(n, alpha, x, y);
}
