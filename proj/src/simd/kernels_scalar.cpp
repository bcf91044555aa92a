#include "armid/simd/kernels.hpp"

namespace armid::simd {

namespace {

template <typename T>
struct Ops {
  static T dot(int n, const T* x, const T* y) {
    T s = 0;
    for (int i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
  }
  static void axpy(int n, T alpha, const T* x, T* y) {
    for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
  }
};

#include "gemm_impl.hpp"

template <typename T>
const KernelTable<T> kTable{"scalar", gemm_nn_impl<T>, gemm_nt_impl<T>, gemm_tn_impl<T>, dot_entry<T>, axpy_entry<T>};

}  // namespace

template <>
const KernelTable<float>& scalar_kernels<float>() {
  return kTable<float>;
}
template <>
const KernelTable<double>& scalar_kernels<double>() {
  return kTable<double>;
}

}  // namespace armid::simd
