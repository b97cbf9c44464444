#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hermhecke/field.hpp"

namespace hermhecke {

/// Exact element Σ c_j ζ_L^j of the cyclotomic field Q(ζ_L), ζ_L = e^{2πi/L}.
///
/// Terms are collected raw over residues mod L; comparisons and the
/// rationality test go through the reduction modulo the L-th cyclotomic
/// polynomial, which is canonical for a fixed L.
class CycSum {
 public:
  CycSum() : L_(1), c_(1) {}
  explicit CycSum(const Rational& r) : L_(1), c_{r} {}

  std::int64_t modulus() const { return L_; }

  /// Adds coeff · e^{2πi·phase}.
  void add_term(const Rational& coeff, const Rational& phase);
  CycSum& operator+=(const CycSum& o);
  CycSum operator+(const CycSum& o) const {
    CycSum r = *this;
    return r += o;
  }
  CycSum scaled(const Rational& s) const;

  /// Coefficients of the reduced polynomial, degree < φ(L).
  std::vector<Rational> reduced() const;
  bool is_rational() const;
  bool is_zero() const;
  /// Throws std::domain_error unless is_rational().
  Rational to_rational() const;
  bool operator==(const CycSum& o) const;

  std::string str() const;

 private:
  void lift(std::int64_t L);
  std::int64_t L_;
  std::vector<Rational> c_;  // raw coefficient of ζ_L^j, j = 0..L-1
};

/// Integer coefficients of the L-th cyclotomic polynomial, constant term first.
std::vector<Integer> cyclotomic_polynomial(std::int64_t L);

}  // namespace hermhecke
