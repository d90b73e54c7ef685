// Copyright 2026 The Presque Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "presque/error.hpp"

namespace presque {

// Exact fraction with a positive denominator, always stored in lowest terms.
// Magnitudes stay small here (percentages over decimal denominators), so
// int64 never comes close to overflowing.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator");
    normalize();
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  bool is_integer() const { return den_ == 1; }

  friend Rational operator+(Rational a, Rational b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator-(Rational a, Rational b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator*(Rational a, Rational b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
  }
  friend Rational operator/(Rational a, Rational b) {
    if (b.num_ == 0) throw Error(ErrorCode::kInvalidArgument, "division by zero");
    return {a.num_ * b.den_, a.den_ * b.num_};
  }
  friend bool operator==(Rational a, Rational b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(Rational a, Rational b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

  // Largest integer <= this.
  std::int64_t floor() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }
  // Smallest integer >= this.
  std::int64_t ceil() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
  }

  // Parses a plain decimal literal such as "0.05", "1", ".5" or "-0.25".
  // Exponents are not accepted.
  static Rational parse_decimal(std::string_view text) {
    auto fail = [&] {
      return Error(ErrorCode::kParseError,
                   "not a decimal number: '" + std::string(text) + "'");
    };
    if (text.empty()) throw fail();
    bool negative = false;
    std::size_t i = 0;
    if (text[0] == '-' || text[0] == '+') {
      negative = text[0] == '-';
      ++i;
    }
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool seen_digit = false;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
      char c = text[i];
      if (c == '.') {
        if (seen_point) throw fail();
        seen_point = true;
        continue;
      }
      if (c < '0' || c > '9') throw fail();
      seen_digit = true;
      if (num > 100000000000000LL || den > 100000000000000LL) throw fail();
      num = num * 10 + (c - '0');
      if (seen_point) den *= 10;
    }
    if (!seen_digit) throw fail();
    return {negative ? -num : num, den};
  }

  // Exact decimal rendering when the denominator has only factors 2 and 5,
  // otherwise "num/den".
  std::string to_string() const {
    std::int64_t d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
    int digits = std::max(twos, fives);
    std::int64_t scale = 1;
    for (int k = 0; k < digits; ++k) scale *= 10;
    std::int64_t scaled = num_ * (scale / den_);
    std::string sign = scaled < 0 ? "-" : "";
    std::int64_t mag = scaled < 0 ? -scaled : scaled;
    std::string whole = std::to_string(mag / scale);
    if (digits == 0) return sign + whole;
    std::string frac = std::to_string(mag % scale);
    frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    return sign + whole + (frac.empty() ? "" : "." + frac);
  }

  friend std::ostream& operator<<(std::ostream& os, Rational r) {
    return os << r.to_string();
  }

 private:
  void normalize() {
    if (den_ < 0) {
      den_ = -den_;
      num_ = -num_;
    }
    std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace presque
