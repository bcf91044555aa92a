#include "armid/core/hash.hpp"

#include <bit>
#include <cstdio>

namespace armid {

namespace {
constexpr std::uint64_t kPrime = 0x100000001b3ULL;
}

ContentHash& ContentHash::add(std::string_view bytes) noexcept {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= kPrime;
  }
  // terminator so ("ab","c") != ("a","bc")
  state_ ^= 0xff;
  state_ *= kPrime;
  return *this;
}

ContentHash& ContentHash::add(std::span<const std::byte> bytes) noexcept {
  for (std::byte b : bytes) {
    state_ ^= static_cast<std::uint64_t>(b);
    state_ *= kPrime;
  }
  state_ ^= 0xff;
  state_ *= kPrime;
  return *this;
}

ContentHash& ContentHash::add(std::uint64_t v) noexcept {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (v >> (8 * i)) & 0xffu;
    state_ *= kPrime;
  }
  return *this;
}

ContentHash& ContentHash::add(double v) noexcept { return add(std::bit_cast<std::uint64_t>(v)); }

std::string ContentHash::hex() const { return to_hex(state_); }

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace armid
