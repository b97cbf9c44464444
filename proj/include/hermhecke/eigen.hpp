#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hermhecke/field.hpp"
#include "hermhecke/fourier.hpp"
#include "hermhecke/hecke.hpp"
#include "hermhecke/ideal.hpp"

namespace hermhecke {

/// λ = ∏_{j=1}^n (p^{2j−1−k} + 1), the T_n(p)-eigenvalue of E_k^{(n)}.
/// ScopeError unless p is inert.
Rational eigenvalue_formula(const QuadField& field, int n, int k, std::int64_t p);

/// The cusp-form bound |λ| ≤ p^{−kn/2} ∏ (p^{2j−1}+1), kept square-root free:
/// decay_sq = p^{−kn} and count = ∏ (p^{2j−1}+1).
struct CuspBound {
  Rational decay_sq;
  Integer count;
  /// The bound itself when kn is even.
  std::optional<Rational> value;
  /// |λ| ≤ bound, compared through squares.
  bool admits(const Rational& lambda) const;
  /// bound < 1, compared through squares.
  bool below_one() const;
};
CuspBound cusp_bound(const QuadField& field, int n, int k, std::int64_t p);

struct EigenReport {
  std::optional<Rational> lambda;  ///< empty when inconsistent
  bool consistent = false;
  std::size_t checked_indices = 0;
  Rational certified_bound = 0;
  std::string detail;
};

/// g = f|_k e; λ from the first certified index where f is nonzero, then
/// g = λ f checked on every certified index.
EigenReport eigen_check(const FourierExpansion& f, const HeckeElement& e, int k, HeckeEngine& engine);

enum class CheckStatus { pass, fail, skipped };
std::string to_string(CheckStatus s);

struct HypothesisCheck {
  std::string name;
  CheckStatus status;
  std::string witness;
};

struct EisensteinCertificate {
  std::vector<HypothesisCheck> hypotheses;
  std::optional<Rational> lambda;
  Rational certified_bound = 0;
  bool conclusion = false;

  /// First failing hypothesis, if any.
  std::optional<std::string> first_failure() const;
};

namespace hypothesis {
inline constexpr const char* weight = "k > 2n";
inline constexpr const char* discriminant = "d_K not in {-3,-4}";
inline constexpr const char* inert = "p inert";
inline constexpr const char* congruence = "p = 1 mod N^(2n-2)";
inline constexpr const char* constant_term = "alpha_f(0) = 1";
inline constexpr const char* eigen = "f|T_n(p) = lambda f";
inline constexpr const char* q_expansion = "matches E_k q-expansion";
}  // namespace hypothesis

/// Checks every hypothesis of the Eisenstein characterisation that can be
/// verified on the truncation of f. Never throws for failed hypotheses.
EisensteinCertificate certify_eisenstein(const FourierExpansion& f, const QuadField& field, int k, std::int64_t p,
                                         const ClassRepSet& reps, const EnumerationOptions& opts = {});

}  // namespace hermhecke
