#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace flashtb {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::span<std::uint8_t const> data,
                           std::uint64_t h = kFnvOffset) {
  for (auto const b : data) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
  return fnv1a({reinterpret_cast<std::uint8_t const*>(s.data()), s.size()}, h);
}

std::string to_hex(std::uint64_t);
std::uint64_t from_hex(std::string_view);

}  // namespace flashtb
