#include <cstdlib>
#include <string_view>

#include "armid/simd/kernels.hpp"

namespace armid::simd {

#ifndef ARMID_HAVE_AVX2
template <>
const KernelTable<float>* avx2_kernels<float>() {
  return nullptr;
}
template <>
const KernelTable<double>* avx2_kernels<double>() {
  return nullptr;
}
#endif

namespace {

bool scalar_forced() {
  const char* env = std::getenv("ARMID_SIMD");
  return env != nullptr && std::string_view(env) == "scalar";
}

template <typename T>
const KernelTable<T>& choose() {
  if (!scalar_forced())
    if (const auto* t = avx2_kernels<T>()) return *t;
  return scalar_kernels<T>();
}

}  // namespace

template <>
const KernelTable<float>& active_kernels<float>() {
  static const KernelTable<float>& t = choose<float>();
  return t;
}
template <>
const KernelTable<double>& active_kernels<double>() {
  static const KernelTable<double>& t = choose<double>();
  return t;
}

}  // namespace armid::simd
