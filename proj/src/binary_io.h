#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "flashtb/types.h"

namespace flashtb::detail {

struct writer {
  template <typename T>
  void put(T const v) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto const u = static_cast<U>(v);
    for (auto i = 0U; i != sizeof(T); ++i) {
      buf_.push_back(static_cast<std::uint8_t>(u >> (8U * i)));
    }
  }
  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    buf_.insert(end(buf_), begin(s), end(s));
  }
  void put_magic(char const (&m)[5]) { buf_.insert(end(buf_), m, m + 4); }

  std::vector<std::uint8_t> buf_;
};

struct reader {
  explicit reader(std::span<std::uint8_t const> data, std::string what)
      : data_{data}, what_{std::move(what)} {}

  template <typename T>
  T get() {
    static_assert(std::is_integral_v<T>);
    need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (auto i = 0U; i != sizeof(T); ++i) {
      u = static_cast<U>(u | (static_cast<U>(data_[pos_ + i]) << (8U * i)));
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  std::string get_string() {
    auto const n = get<std::uint32_t>();
    need(n);
    std::string s{reinterpret_cast<char const*>(data_.data() + pos_), n};
    pos_ += n;
    return s;
  }
  void expect_magic(char const (&m)[5]) {
    need(4U);
    if (std::memcmp(data_.data() + pos_, m, 4U) != 0) {
      throw format_error{what_ + ": bad magic"};
    }
    pos_ += 4U;
  }
  // Guards element counts read from the file against the remaining bytes.
  std::size_t get_count(std::size_t const min_elem_size) {
    auto const n = get<std::uint32_t>();
    if (min_elem_size != 0U && n > remaining() / min_elem_size) {
      throw format_error{what_ + ": truncated"};
    }
    return n;
  }
  void need(std::size_t const n) const {
    if (remaining() < n) {
      throw format_error{what_ + ": truncated"};
    }
  }
  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0U) {
      throw format_error{what_ + ": trailing bytes"};
    }
  }

  std::span<std::uint8_t const> data_;
  std::size_t pos_{0U};
  std::string what_;
};

inline std::vector<std::uint8_t> read_file(std::filesystem::path const& p) {
  std::ifstream in{p, std::ios::binary};
  if (!in) {
    throw format_error{"cannot open " + p.string()};
  }
  return {std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

inline void write_file(std::filesystem::path const& p,
                       std::span<std::uint8_t const> data) {
  std::ofstream out{p, std::ios::binary | std::ios::trunc};
  if (!out) {
    throw format_error{"cannot write " + p.string()};
  }
  out.write(reinterpret_cast<char const*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw format_error{"cannot write " + p.string()};
  }
}

}  // namespace flashtb::detail
