#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace flashtb {

// Seconds since midnight of the first service day.
using stime = std::int32_t;

constexpr stime kInfinity = std::numeric_limits<stime>::max() / 4;
constexpr stime kDay = 86400;
// Two service days plus an overnight margin of six hours.
constexpr stime kHorizon = 2 * kDay + 6 * 3600;

template <typename T, typename Tag>
struct strong {
  using value_type = T;

  constexpr strong() = default;
  constexpr explicit strong(T v) : v_{v} {}

  static constexpr strong invalid() {
    return strong{std::numeric_limits<T>::max()};
  }
  constexpr bool valid() const { return v_ != std::numeric_limits<T>::max(); }

  constexpr auto operator<=>(strong const&) const = default;

  constexpr strong& operator++() {
    ++v_;
    return *this;
  }
  constexpr strong operator+(T d) const { return strong{v_ + d}; }
  constexpr strong operator-(T d) const { return strong{v_ - d}; }

  T v_{std::numeric_limits<T>::max()};
};

template <typename T, typename Tag>
constexpr T to_idx(strong<T, Tag> s) {
  return s.v_;
}

using stop_idx = strong<std::uint32_t, struct stop_idx_tag>;
using event_idx = strong<std::uint32_t, struct event_idx_tag>;
using trip_idx = strong<std::uint32_t, struct trip_idx_tag>;
using line_idx = strong<std::uint32_t, struct line_idx_tag>;
using transfer_idx = strong<std::uint32_t, struct transfer_idx_tag>;
using cell_idx = strong<std::uint32_t, struct cell_idx_tag>;

// std::vector indexed by a strong index type.
template <typename K, typename V>
struct vector_map : public std::vector<V> {
  using base = std::vector<V>;
  using base::base;

  V& operator[](K k) { return base::operator[](to_idx(k)); }
  V const& operator[](K k) const { return base::operator[](to_idx(k)); }
  V& at(K k) { return base::at(to_idx(k)); }
  V const& at(K k) const { return base::at(to_idx(k)); }

  K size_key() const {
    return K{static_cast<typename K::value_type>(base::size())};
  }
};

struct parse_error : public std::runtime_error {
  parse_error(std::string const& file, std::size_t row, std::string const& msg)
      : std::runtime_error{file + ":" + std::to_string(row) + ": " + msg},
        file_{file},
        row_{row} {}
  std::string file_;
  std::size_t row_;
};

struct validation_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct format_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace flashtb

template <typename T, typename Tag>
struct std::hash<flashtb::strong<T, Tag>> {
  std::size_t operator()(flashtb::strong<T, Tag> const& s) const noexcept {
    return std::hash<T>{}(s.v_);
  }
};
