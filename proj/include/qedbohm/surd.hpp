#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <ostream>
#include <stdexcept>

namespace qedbohm {

/// Exact number of the form c * sqrt(r) with integers c, r (r square-free).
///
/// Closed under multiplication. Addition is exact when the radicands agree or
/// one operand is zero, which covers products of ladder matrices; anything
/// else throws.
class Surd {
 public:
  Surd() = default;
  Surd(int value) : coef_(value), radicand_(1) {}  // NOLINT(google-explicit-constructor)

  static Surd sqrt_of(std::int64_t r) {
    if (r < 0) throw std::domain_error("Surd: negative radicand");
    Surd s;
    s.coef_ = r == 0 ? 0 : 1;
    s.radicand_ = r == 0 ? 1 : r;
    s.normalize();
    return s;
  }

  std::int64_t coefficient() const { return coef_; }
  std::int64_t radicand() const { return radicand_; }
  bool is_integer() const { return radicand_ == 1 || coef_ == 0; }
  double to_double() const;

  friend Surd operator*(const Surd& a, const Surd& b) {
    Surd s;
    s.coef_ = a.coef_ * b.coef_;
    s.radicand_ = a.radicand_ * b.radicand_;
    s.normalize();
    return s;
  }
  friend Surd operator+(const Surd& a, const Surd& b) {
    if (a.coef_ == 0) return b;
    if (b.coef_ == 0) return a;
    if (a.radicand_ != b.radicand_) throw std::domain_error("Surd: sum of unlike radicals");
    Surd s;
    s.coef_ = a.coef_ + b.coef_;
    s.radicand_ = s.coef_ == 0 ? 1 : a.radicand_;
    return s;
  }
  friend Surd operator-(const Surd& a) {
    Surd s = a;
    s.coef_ = -s.coef_;
    return s;
  }
  friend Surd operator-(const Surd& a, const Surd& b) { return a + (-b); }
  Surd& operator+=(const Surd& b) { return *this = *this + b; }
  Surd& operator-=(const Surd& b) { return *this = *this - b; }
  Surd& operator*=(const Surd& b) { return *this = *this * b; }
  friend bool operator==(const Surd& a, const Surd& b) {
    return a.coef_ == b.coef_ && (a.coef_ == 0 || a.radicand_ == b.radicand_);
  }
  friend bool operator!=(const Surd& a, const Surd& b) { return !(a == b); }
  friend std::ostream& operator<<(std::ostream& os, const Surd& s);

 private:
  void normalize();

  std::int64_t coef_ = 0;
  std::int64_t radicand_ = 1;
};

}  // namespace qedbohm

namespace Eigen {
template <>
struct NumTraits<qedbohm::Surd> : GenericNumTraits<qedbohm::Surd> {
  using Real = qedbohm::Surd;
  using NonInteger = qedbohm::Surd;
  using Nested = qedbohm::Surd;
  using Literal = qedbohm::Surd;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 3
  };
};
}  // namespace Eigen
