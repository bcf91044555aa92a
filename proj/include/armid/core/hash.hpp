#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace armid {

/// Incremental 64-bit FNV-1a. Used for cache keys, not security.
class ContentHash {
 public:
  ContentHash& add(std::string_view bytes) noexcept;
  ContentHash& add(std::span<const std::byte> bytes) noexcept;
  ContentHash& add(std::uint64_t v) noexcept;
  ContentHash& add(std::int64_t v) noexcept { return add(static_cast<std::uint64_t>(v)); }
  ContentHash& add(int v) noexcept { return add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
  ContentHash& add(double v) noexcept;
  ContentHash& add(bool v) noexcept { return add(static_cast<std::uint64_t>(v)); }

  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t v);

}  // namespace armid
