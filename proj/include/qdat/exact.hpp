#pragma once

#include <boost/rational.hpp>

#include <complex>
#include <cstdint>
#include <string>

namespace qdat {

using Rational = boost::rational<std::int64_t>;

/// Complex number with exact rational real and imaginary parts. All kernel
/// coefficients arising here are small rationals, so no overflow handling is
/// needed beyond what boost::rational provides.
struct ExactComplex {
  Rational re{0};
  Rational im{0};

  // Comparisons stay rational-vs-rational throughout: mixed rational-vs-int
  // comparisons recurse forever under C++20 with this boost.operators.
  bool is_zero() const { return re == Rational(0) && im == Rational(0); }

  friend bool operator==(const ExactComplex&, const ExactComplex&) = default;

  ExactComplex operator-() const { return {-re, -im}; }

  ExactComplex& operator+=(const ExactComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }

  ExactComplex& operator-=(const ExactComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }

  friend ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
  friend ExactComplex operator-(ExactComplex a, const ExactComplex& b) { return a -= b; }

  friend ExactComplex operator*(const ExactComplex& a, const ExactComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
};

inline ExactComplex conj(const ExactComplex& z) { return {z.re, -z.im}; }

inline ExactComplex exact(std::int64_t num, std::int64_t den = 1) {
  return {Rational(num, den), Rational(0)};
}

inline ExactComplex exact_i(std::int64_t num = 1, std::int64_t den = 1) {
  return {Rational(0), Rational(num, den)};
}

inline std::complex<double> to_complex(const ExactComplex& z) {
  return {boost::rational_cast<double>(z.re), boost::rational_cast<double>(z.im)};
}

inline std::string to_string(const Rational& r) {
  std::string s = std::to_string(r.numerator());
  if (r.denominator() != 1) s += "/" + std::to_string(r.denominator());
  return s;
}

/// Render as "a+bi" with exact rational parts, e.g. "1/2-1/2i".
inline std::string to_string(const ExactComplex& z) {
  if (z.is_zero()) return "0";
  std::string s;
  if (z.re != Rational(0)) s += to_string(z.re);
  if (z.im != Rational(0)) {
    if (z.im > Rational(0) && !s.empty()) s += "+";
    if (z.im == Rational(-1)) {
      s += "-";
    } else if (z.im != Rational(1)) {
      s += to_string(z.im);
    }
    s += "i";
  }
  return s;
}

}  // namespace qdat
