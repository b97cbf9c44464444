#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hermhecke/cycsum.hpp"
#include "hermhecke/field.hpp"
#include "hermhecke/hecke.hpp"
#include "hermhecke/ideal.hpp"
#include "hermhecke/matrix.hpp"

namespace hermhecke {

/// Hermitian index matrix T, stored once per pair: the diagonal and the
/// entries t_ij (i < j, row-major). t_ji = conj(t_ij) is implied.
struct HermIndex {
  std::vector<Rational> diag;
  std::vector<KElem> upper;

  int n() const { return static_cast<int>(diag.size()); }
  const KElem& at(int i, int j) const;

  /// Throws std::invalid_argument unless M is square and Hermitian.
  static HermIndex from_matrix(const MatK& M);
  static HermIndex zero(const QuadField& field, int n);
  MatK to_matrix(const QuadField& field) const;
  Rational trace() const;

  /// t_ij·√d_K, the O_K-numerator of an off-diagonal entry of Λ_n.
  KElem mu(const QuadField& field, int i, int j) const;
  /// s·T ∈ Λ_n.
  bool in_lambda(const QuadField& field, std::int64_t scale = 1) const;
  /// Smallest s ≥ 1 with s·T ∈ Λ_n.
  std::int64_t lambda_denominator(const QuadField& field) const;

  bool operator==(const HermIndex& o) const { return diag == o.diag && upper == o.upper; }
  bool operator<(const HermIndex& o) const;
  std::string str() const;
};

/// Lower-right block removed: the index of the leading (n−1)×(n−1) part.
HermIndex leading_block(const HermIndex& T);
bool last_row_vanishes(const HermIndex& T);

struct PsdInfo {
  bool psd;
  bool pd;
  int rank;
};
PsdInfo psd_rank(const QuadField& field, const HermIndex& T);

/// All T ∈ Λ_n with T ≥ 0 and trace(T) ≤ max_trace, sorted.
std::vector<HermIndex> lambda_indices(const QuadField& field, int n, std::int64_t max_trace);

/// Formal Fourier expansion Σ α(T) e^{2πi trace(TZ)} of degree n and weight
/// k with support in (1/scale)·Λ_n. Every index with trace ≤ trunc is
/// certified: absent means zero.
struct FourierExpansion {
  QuadField field;
  int n = 1;
  int k = 0;
  std::int64_t scale = 1;
  Rational trunc = 0;
  std::map<HermIndex, Rational> coeffs;

  Rational coeff(const HermIndex& T) const;
  void prune();
  bool operator==(const FourierExpansion& o) const;
};

/// Intermediate image of a single coset: phases are cyclotomic and the
/// support may leave Λ_n.
struct CycExpansion {
  QuadField field;
  int n = 1;
  int k = 0;
  Rational trunc = 0;
  std::map<HermIndex, CycSum> coeffs;
};

/// f|_k L for L = (A B; 0 D) ∈ Δ_n(q): T ↦ conj(A)^tr T A / q, coefficient
/// times det(D)^{-k} e^{2πi trace(T B D^{-1})}.
CycExpansion slash_coset(const FourierExpansion& f, const MatK& L, int k);

/// Sum over the right cosets; the result must be rational and supported in
/// (1/scale)·Λ_n, otherwise ConsistencyError.
FourierExpansion hecke_act(const FourierExpansion& f, const RightCosetSet& cosets, int k);

struct CosetGroup;

/// A right coset set prepared once for repeated Hecke actions; apply(f, k)
/// equals hecke_act(f, cosets, k).
class CosetAction {
 public:
  explicit CosetAction(const RightCosetSet& cosets);
  ~CosetAction();
  CosetAction(CosetAction&&) noexcept;
  CosetAction(const CosetAction&) = delete;
  CosetAction& operator=(const CosetAction&) = delete;

  const DoubleCosetKey& key() const { return key_; }
  FourierExpansion apply(const FourierExpansion& f, int k) const;

 private:
  DoubleCosetKey key_;
  std::vector<CosetGroup> groups_;
};
FourierExpansion hecke_act(const FourierExpansion& f, const HeckeElement& e, int k, HeckeEngine& engine);

/// Restriction to indices with vanishing last row and column; degree n−1.
FourierExpansion siegel_phi(const FourierExpansion& f);

/// f|_k R_U with R_U = (conj(U)^tr 0; 0 U^{-1}): T ↦ U T conj(U)^tr,
/// coefficient times det(U)^k. Throws std::domain_error when det(U)^k is not
/// rational.
FourierExpansion slash_RU(const FourierExpansion& f, const MatK& U, int k);

/// Identity matrix with conj(u) in position (n, n−1).
MatK class_twist_matrix(const QuadField& field, int n, const KElem& u);

struct CuspReport {
  bool direct;     ///< every supported index is positive definite
  bool twisted;    ///< f|R_{U_j}|Φ vanishes for every class j
  bool agree;
  std::vector<bool> per_class;
};
CuspReport cusp_tests(const FourierExpansion& f, const ClassRepSet& reps);

struct RankProfile {
  int min_rank = -1;  ///< −1 for the zero expansion
  std::map<int, std::size_t> histogram;
};
RankProfile rank_profile(const FourierExpansion& f);

/// B_k with B_1 = −1/2.
Rational bernoulli(int k);
Integer divisor_sigma(int r, std::int64_t t);

/// E_k^{(1)} = 1 − (2k/B_k) Σ σ_{k−1}(t) q^t, t < terms.
FourierExpansion eisenstein_q_expansion(const QuadField& field, int k, int terms);

}  // namespace hermhecke
