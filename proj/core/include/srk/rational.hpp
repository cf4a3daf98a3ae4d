#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace srk {

/// Thrown when a rational result does not fit 64-bit normalized form.
/// Callers that can live with approximate values catch this and redo the
/// computation in floating point.
struct RationalOverflow : std::runtime_error {
  RationalOverflow() : std::runtime_error("rational arithmetic overflow") {}
};

/// Exact fraction num/den with den > 0 and gcd(|num|, den) == 1.
/// Intermediates use 128-bit integers; anything that cannot be normalized
/// back into int64 throws RationalOverflow.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t numerator, std::int64_t denominator = 1) {
    assign(numerator, denominator);
  }

  [[nodiscard]] std::int64_t num() const { return num_; }
  [[nodiscard]] std::int64_t den() const { return den_; }
  [[nodiscard]] double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  [[nodiscard]] bool is_zero() const { return num_ == 0; }
  [[nodiscard]] bool is_integer() const { return den_ == 1; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_i128(w(a.num_) * b.den_ + w(b.num_) * a.den_,
                     w(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_i128(w(a.num_) * b.den_ - w(b.num_) * a.den_,
                     w(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128(w(a.num_) * b.num_, w(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return from_i128(w(a.num_) * b.den_, w(a.den_) * b.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;  // num_ > INT64_MIN by construction, negation is safe
    r.den_ = den_;
    return r;
  }
  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return w(a.num_) * b.den_ < w(b.num_) * a.den_;
  }

  /// "p", "-p", "p/q", or a plain decimal like "0.25" (exact, scale 10^k,
  /// at most 18 fractional digits).
  static Rational parse(const std::string& text);

  /// "p" when integral, otherwise "p/q".
  [[nodiscard]] std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  using i128 = __int128;
  static i128 w(std::int64_t v) { return static_cast<i128>(v); }

  void assign(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    *this = from_i128(w(n), w(d));
  }

  static Rational from_i128(i128 n, i128 d);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational Rational::from_i128(i128 n, i128 d) {
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 a = n < 0 ? -n : n;
  i128 b = d;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a != 0) {
    n /= a;
    d /= a;
  }
  constexpr i128 lo = INT64_MIN + 1;  // keep -num_ representable
  constexpr i128 hi = INT64_MAX;
  if (n < lo || n > hi || d > hi) throw RationalOverflow();
  Rational r;
  r.num_ = static_cast<std::int64_t>(n);
  r.den_ = static_cast<std::int64_t>(d);
  return r;
}

inline Rational Rational::parse(const std::string& text) {
  std::size_t pos = 0;
  bool neg = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    neg = text[pos] == '-';
    ++pos;
  }
  auto digits = [&](i128& out, int max_digits) {
    int n = 0;
    out = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (++n > max_digits) throw std::invalid_argument("number too long: " + text);
      out = out * 10 + (text[pos] - '0');
      ++pos;
    }
    return n;
  };
  i128 ip = 0;
  int ni = digits(ip, 18);
  if (pos < text.size() && text[pos] == '/') {
    ++pos;
    i128 q = 0;
    if (ni == 0 || digits(q, 18) == 0 || pos != text.size() || q == 0)
      throw std::invalid_argument("malformed rational literal: " + text);
    return from_i128(neg ? -ip : ip, q);
  }
  i128 scale = 1;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    i128 fp = 0;
    int nf = digits(fp, 18);
    if (ni == 0 && nf == 0)
      throw std::invalid_argument("malformed decimal literal: " + text);
    for (int i = 0; i < nf; ++i) scale *= 10;
    ip = ip * scale + fp;
  } else if (ni == 0) {
    throw std::invalid_argument("malformed number: " + text);
  }
  if (pos != text.size())
    throw std::invalid_argument("trailing characters in number: " + text);
  return from_i128(neg ? -ip : ip, scale);
}

}  // namespace srk
