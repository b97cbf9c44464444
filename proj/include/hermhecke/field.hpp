#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace hermhecke {

using Integer = mpz_class;
using Rational = mpq_class;

class KElem;

/// Which generator of O_K = Z + Z·ω is used.
enum class OmegaKind {
  sqrt_minus_m,  ///< ω = √−m, for m ≡ 1, 2 (mod 4)
  half_integral  ///< ω = (1 + √−m)/2, for m ≡ 3 (mod 4)
};

enum class PrimeType { split, inert, ramified };

std::string to_string(PrimeType t);

/// The imaginary-quadratic field K = Q(√−m).
///
/// Elements are stored over the basis {1, ω}, so the minimal polynomial
/// ω² − t·ω + n = 0 (t = omega_trace, n = omega_norm) is all that
/// multiplication needs.
class QuadField {
 public:
  /// Throws std::invalid_argument unless m ≥ 1 is squarefree.
  static QuadField make(std::int64_t m);

  std::int64_t m() const { return m_; }
  std::int64_t disc() const { return disc_; }
  OmegaKind omega_kind() const { return kind_; }
  std::int64_t omega_trace() const { return kind_ == OmegaKind::half_integral ? 1 : 0; }
  std::int64_t omega_norm() const {
    return kind_ == OmegaKind::half_integral ? (1 + m_) / 4 : m_;
  }

  /// Class number, once attached by the ideal-class module.
  std::optional<int> class_number() const { return h_; }
  QuadField with_class_number(int h) const;

  KElem zero() const;
  KElem one() const;
  KElem omega() const;
  KElem from_int(const Integer& a) const;
  KElem from_rational(const Rational& r) const;
  KElem make(const Integer& a, const Integer& b) const;
  /// √d_K as an element of O_K.
  KElem sqrt_disc() const;

  /// Units of O_K (±1, plus ±i or the sixth roots of unity where present).
  std::vector<KElem> units() const;

  bool operator==(const QuadField& o) const { return m_ == o.m_; }
  bool operator!=(const QuadField& o) const { return m_ != o.m_; }

 private:
  QuadField(std::int64_t m, std::int64_t d, OmegaKind k) : m_(m), disc_(d), kind_(k) {}
  std::int64_t m_;
  std::int64_t disc_;
  OmegaKind kind_;
  std::optional<int> h_;
};

/// An element (a + b·ω)/den of K, kept reduced with den > 0.
///
/// The element remembers the field through m; arithmetic between elements of
/// different fields throws std::invalid_argument.
class KElem {
 public:
  KElem() = default;
  KElem(std::int64_t m, Integer a, Integer b, Integer den = 1);

  std::int64_t field_m() const { return m_; }
  const Integer& a() const { return a_; }
  const Integer& b() const { return b_; }
  const Integer& den() const { return den_; }
  Rational coord_a() const;
  Rational coord_b() const;

  bool is_zero() const { return sgn(a_) == 0 && sgn(b_) == 0; }
  bool is_one() const { return a_ == 1 && sgn(b_) == 0 && den_ == 1; }
  bool is_integral() const { return den_ == 1; }
  bool is_rational() const { return sgn(b_) == 0; }
  /// Requires is_rational().
  Rational to_rational() const;

  KElem conj() const;
  Rational norm() const;
  Rational trace() const;
  KElem inverse() const;

  KElem& operator+=(const KElem& o);
  KElem& operator-=(const KElem& o);
  KElem& operator*=(const KElem& o);
  KElem& operator/=(const KElem& o);
  KElem operator-() const;

  friend KElem operator+(KElem x, const KElem& y) { return x += y; }
  friend KElem operator-(KElem x, const KElem& y) { return x -= y; }
  friend KElem operator*(KElem x, const KElem& y) { return x *= y; }
  friend KElem operator/(KElem x, const KElem& y) { return x /= y; }
  KElem scaled(const Rational& r) const;

  bool operator==(const KElem& o) const {
    return m_ == o.m_ && a_ == o.a_ && b_ == o.b_ && den_ == o.den_;
  }
  bool operator!=(const KElem& o) const { return !(*this == o); }
  /// Arbitrary total order (for use as a map key).
  bool operator<(const KElem& o) const;

  std::string str() const;

 private:
  void reduce();
  void check_same(const KElem& o) const;

  std::int64_t m_ = 1;
  Integer a_ = 0;
  Integer b_ = 0;
  Integer den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const KElem& x);

/// Kronecker symbol (a/n) for arbitrary integers.
int kronecker(const Integer& a, const Integer& n);

/// χ_K(n) = (d_K / n).
int chi(const QuadField& field, const Integer& n);

bool is_prime(std::int64_t n);
bool is_squarefree(std::int64_t n);
/// Prime factorisation by trial division, as (prime, exponent) pairs.
std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t n);

/// Throws std::invalid_argument if p is not prime.
PrimeType classify_prime(const QuadField& field, std::int64_t p);

/// Rational upper bound for |z| (no square roots leave this function).
Rational abs_upper_bound(const KElem& z);

std::string rational_to_string(const Rational& r);
/// Parses "p/q" or "p"; throws std::invalid_argument on malformed input.
Rational rational_from_string(const std::string& s);

}  // namespace hermhecke
