// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mensa {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

inline constexpr u64 KiB = 1024;
inline constexpr u64 MiB = 1024 * KiB;

// Input files / configs that cannot be understood.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid input that violates a documented precondition
// (bad graph, incompatible dataflow pairing, missing table row, ...).
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal contract breaks; reaching one is a bug.
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

// Exact ratio of two non-negative integer counters. Intensities are
// rationals so identities like intensity * param_bytes == macs hold with
// no rounding.
struct Rational {
  i64 num = 0;
  i64 den = 1;

  Rational() = default;
  Rational(i64 n, i64 d) : num(n), den(d) {
    if (den == 0) throw InvariantError("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const i64 g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  static Rational of(u64 n, u64 d) {
    return Rational(static_cast<i64>(n), static_cast<i64>(d));
  }

  double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }

  Rational operator*(i64 k) const { return Rational(num * k, den); }
  Rational operator+(const Rational& o) const {
    return Rational(num * o.den + o.num * den, den * o.den);
  }
};

}  // namespace mensa
