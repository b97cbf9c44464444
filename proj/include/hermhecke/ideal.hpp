#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hermhecke/field.hpp"

namespace hermhecke {

/// A nonzero ideal of O_K in Hermite normal form: the Z-module
/// Z·a + Z·(b + c·ω) with c | a, c | b and 0 ≤ b < a.
class IdealHNF {
 public:
  IdealHNF(const QuadField& field, Integer a, Integer b, Integer c);

  std::int64_t field_m() const { return m_; }
  const Integer& a() const { return a_; }
  const Integer& b() const { return b_; }
  const Integer& c() const { return c_; }

  Integer norm() const { return a_ * c_; }
  /// The two Z-basis elements a and b + c·ω.
  std::vector<KElem> z_basis() const;
  bool contains(const KElem& x) const;
  /// True iff the ideal equals r·O_K for a positive integer r.
  bool is_rational_principal() const;
  /// Largest positive integer r with this ideal ⊆ r·O_K.
  Integer content() const;

  bool operator==(const IdealHNF& o) const {
    return m_ == o.m_ && a_ == o.a_ && b_ == o.b_ && c_ == o.c_;
  }
  bool operator!=(const IdealHNF& o) const { return !(*this == o); }

  std::string str() const;

 private:
  std::int64_t m_;
  Integer a_, b_, c_;
};

/// Normal form of the ideal generated by gens (all in O_K, not all zero).
IdealHNF ideal_from_generators(const QuadField& field, const std::vector<KElem>& gens);
IdealHNF unit_ideal(const QuadField& field);
IdealHNF principal_ideal(const QuadField& field, const KElem& g);

IdealHNF ideal_product(const QuadField& field, const IdealHNF& x, const IdealHNF& y);
/// x + y, i.e. the gcd of x and y.
IdealHNF ideal_sum(const QuadField& field, const IdealHNF& x, const IdealHNF& y);
/// x | y, i.e. y ⊆ x.
bool ideal_divides(const IdealHNF& x, const IdealHNF& y);
IdealHNF ideal_conjugate(const QuadField& field, const IdealHNF& x);
/// x / r for a positive integer r with x ⊆ r·O_K.
IdealHNF ideal_divide_integer(const QuadField& field, const IdealHNF& x, const Integer& r);
bool ideals_coprime(const QuadField& field, const IdealHNF& x, const IdealHNF& y);

/// Binary quadratic form αx² + βxy + γy² with β² − 4αγ = d_K.
struct QuadForm {
  Integer alpha, beta, gamma;

  Integer disc() const { return beta * beta - 4 * alpha * gamma; }
  bool is_reduced() const;
  bool operator==(const QuadForm& o) const {
    return alpha == o.alpha && beta == o.beta && gamma == o.gamma;
  }
  bool operator<(const QuadForm& o) const;
};

/// Reduction of a positive definite form to the unique reduced form of its
/// proper equivalence class.
QuadForm reduce_form(QuadForm f);

/// All primitive reduced forms of discriminant d_K, principal form first.
std::vector<QuadForm> reduced_forms(const QuadField& field);
int class_number(const QuadField& field);

/// Form attached to an ideal through its positively oriented HNF basis.
QuadForm ideal_to_form(const QuadField& field, const IdealHNF& ideal);

struct ClassRep {
  KElem u;          ///< the representative u_j; the class is that of ⟨u_j, 1⟩
  QuadForm form;    ///< reduced form the representative was built from
  bool inverted;    ///< u_j was replaced by 2α_j/(β_j + √d_K)
  Integer n_j;      ///< N_j with N_j·u_j ∈ O_K
};

struct ClassRepSet {
  std::vector<ClassRep> reps;
  Integer N;  ///< N_1 ··· N_h
  std::optional<std::int64_t> avoided_prime;
};

/// Class representatives u_j = (β_j + √d_K)/(2α_j), one per reduced form,
/// with N = ∏ N_j. With avoid_p set, representatives whose α_j is divisible
/// by avoid_p are inverted so that avoid_p ∤ N. Hypothesis violations throw
/// std::invalid_argument naming the violated condition.
ClassRepSet class_representatives(const QuadField& field,
                                   std::optional<std::int64_t> avoid_p = std::nullopt);

/// The integral ideal ⟨N_j·u_j, N_j⟩, in the class of ⟨u_j, 1⟩.
IdealHNF rep_ideal(const QuadField& field, const ClassRep& rep);

/// 1-based index j of the class containing the ideal.
int ideal_class_index(const QuadField& field, const IdealHNF& ideal, const ClassRepSet& reps);

/// Smallest prime p in [min_p, search_bound] with p ≡ 1 (mod modulus) and
/// χ_K(p) = −1. Throws SearchExhausted if there is none.
std::int64_t find_inert_prime(const QuadField& field, std::int64_t modulus,
                              std::int64_t search_bound, std::int64_t min_p = 2);

/// Whether the existence guarantee for inert primes p ≡ 1 (mod modulus)
/// applies: d_K ∉ {−4, −8} and some odd prime divisor of d_K does not
/// divide the modulus.
struct InertPrimeHypotheses {
  bool holds;
  std::string detail;
};
InertPrimeHypotheses inert_prime_hypotheses(const QuadField& field, std::int64_t modulus);

}  // namespace hermhecke
