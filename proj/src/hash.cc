#include "flashtb/hash.h"

#include <charconv>
#include <cstdio>

#include "flashtb/types.h"

namespace flashtb {

std::string to_hex(std::uint64_t const h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t from_hex(std::string_view const s) {
  std::uint64_t h = 0U;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), h, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw format_error{"bad hash: " + std::string{s}};
  }
  return h;
}

}  // namespace flashtb
