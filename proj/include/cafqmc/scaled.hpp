#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace cafqmc {

/// Complex number stored as mantissa * 2^exponent so that partition functions
/// of large systems at low temperature neither overflow nor underflow.
class ScaledComplex {
 public:
  ScaledComplex() = default;
  ScaledComplex(std::complex<double> value) : mantissa_(value) { normalize(); }  // NOLINT
  ScaledComplex(std::complex<double> mantissa, long exponent) : mantissa_(mantissa), exponent_(exponent) {
    normalize();
  }

  std::complex<double> mantissa() const { return mantissa_; }
  long exponent() const { return exponent_; }
  bool is_zero() const { return mantissa_ == std::complex<double>(0.0); }

  /// May overflow to inf or underflow to 0.
  std::complex<double> value() const {
    return {std::ldexp(mantissa_.real(), static_cast<int>(exponent_)),
            std::ldexp(mantissa_.imag(), static_cast<int>(exponent_))};
  }
  double log_abs() const {
    return std::log(std::abs(mantissa_)) + static_cast<double>(exponent_) * std::numbers::ln2;
  }
  std::complex<double> phase() const { return is_zero() ? 0.0 : mantissa_ / std::abs(mantissa_); }

  friend ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b) {
    return {a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_};
  }
  friend ScaledComplex operator/(const ScaledComplex& a, double k) { return {a.mantissa_ / k, a.exponent_}; }
  friend ScaledComplex operator+(const ScaledComplex& a, const ScaledComplex& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const long e = std::max(a.exponent_, b.exponent_);
    return {a.shifted(e - a.exponent_) + b.shifted(e - b.exponent_), e};
  }
  friend ScaledComplex operator-(const ScaledComplex& a) { return {-a.mantissa_, a.exponent_}; }
  friend ScaledComplex operator-(const ScaledComplex& a, const ScaledComplex& b) { return a + (-b); }
  ScaledComplex& operator+=(const ScaledComplex& b) { return *this = *this + b; }

 private:
  std::complex<double> shifted(long down) const {
    if (down > 2000) return 0.0;
    return {std::ldexp(mantissa_.real(), static_cast<int>(-down)),
            std::ldexp(mantissa_.imag(), static_cast<int>(-down))};
  }
  void normalize() {
    const double m = std::max(std::abs(mantissa_.real()), std::abs(mantissa_.imag()));
    if (m == 0.0 || !std::isfinite(m)) {
      if (m == 0.0) exponent_ = 0;
      return;
    }
    int e = 0;
    std::frexp(m, &e);
    mantissa_ = {std::ldexp(mantissa_.real(), -e), std::ldexp(mantissa_.imag(), -e)};
    exponent_ += e;
  }

  std::complex<double> mantissa_ = 0.0;
  long exponent_ = 0;
};

}  // namespace cafqmc
