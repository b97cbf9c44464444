#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hermhecke/field.hpp"
#include "hermhecke/ideal.hpp"
#include "hermhecke/matrix.hpp"

namespace hermhecke {

/// Invariant of a double coset Γ_n·M·Γ_n in the inert part: the unique
/// diagonal representative diag(a_1, …, a_n, d_1, …, d_n) with
/// a_1 | … | a_n | d_n | … | d_1 and a_j·d_j = q.
class DoubleCosetKey {
 public:
  /// Validates the divisor chain; throws ScopeError when q has a prime
  /// divisor that is not inert in the field.
  static DoubleCosetKey make(const QuadField& field, std::vector<std::int64_t> divisors);
  static DoubleCosetKey identity(int n);

  int n() const { return static_cast<int>(div_.size() / 2); }
  std::int64_t q() const { return q_; }
  const std::vector<std::int64_t>& divisors() const { return div_; }
  std::int64_t a(int j) const { return div_[static_cast<std::size_t>(j)]; }
  std::int64_t d(int j) const { return div_[static_cast<std::size_t>(n() + j)]; }
  /// e_1 | e_2 | … | e_2n, i.e. a_1, …, a_n, d_n, …, d_1.
  std::vector<std::int64_t> elementary_divisors() const;
  bool is_prime_power() const;
  /// Decomposition into keys supported on a single prime each, by prime.
  std::vector<std::pair<std::int64_t, DoubleCosetKey>> prime_parts() const;
  MatK diagonal_rep(const QuadField& field) const;

  bool operator==(const DoubleCosetKey& o) const { return div_ == o.div_; }
  bool operator!=(const DoubleCosetKey& o) const { return div_ != o.div_; }
  bool operator<(const DoubleCosetKey& o) const;
  std::string str() const;

 private:
  DoubleCosetKey(std::vector<std::int64_t> d, std::int64_t q) : div_(std::move(d)), q_(q) {}
  std::vector<std::int64_t> div_;
  std::int64_t q_;
};

/// Element of the inert Hecke algebra: a finite rational combination of
/// double cosets.
struct HeckeElement {
  QuadField field;
  int n;
  std::map<DoubleCosetKey, Rational> terms;

  static HeckeElement identity(const QuadField& field, int n);
  static HeckeElement single(const QuadField& field, const DoubleCosetKey& key, const Rational& c = 1);

  HeckeElement operator+(const HeckeElement& o) const;
  HeckeElement scaled(const Rational& s) const;
  void prune();
  bool operator==(const HeckeElement& o) const;
  std::string str() const;
};

/// Right-coset representatives (A B; 0 D) of one double coset.
struct RightCosetSet {
  DoubleCosetKey key;
  std::vector<MatK> reps;
};

/// Elementary-divisor key of M ∈ Δ_n(q) from its determinantal divisors.
/// ScopeError if q has a non-inert prime divisor; ConsistencyError if a
/// determinantal divisor is not generated by a rational integer.
DoubleCosetKey canonical_form(const MatK& M);

/// Same invariant computed from the Smith form of the Z-row lattice modulo
/// each prime power of q. The matrix must be reduced modulo (a multiple of) q.
DoubleCosetKey inert_key_mod(const QuadField& field, const OkMatMod& M, std::int64_t q);

/// T_n(p) followed by T_{n,j}(p²) for j = 0, …, n−1.
std::vector<HeckeElement> generators(const QuadField& field, int n, std::int64_t p);
DoubleCosetKey t_key(const QuadField& field, int n, std::int64_t p);
DoubleCosetKey t_square_key(const QuadField& field, int n, std::int64_t p, int j);

struct EnumerationOptions {
  /// Cap on complete candidate matrices examined per level.
  std::uint64_t cap = 1'000'000;
  bool verify_closure = true;
  /// Workers for candidate generation; the merge is deterministic.
  unsigned threads = 1;
};

/// Image of a double coset under φ_k: a degree n−1 element and, when that
/// element is a single double coset, its coefficient.
struct PhiResult {
  HeckeElement image;
  std::optional<Rational> scalar;
  /// Σ over right cosets of δ^{-k}.
  Rational total_weight;
};

/// Enumeration state for one field and degree. Levels Δ_n(p^ℓ) are
/// enumerated once and reused by every query at that level.
class HeckeEngine {
 public:
  HeckeEngine(const QuadField& field, int n, EnumerationOptions opts = {});
  ~HeckeEngine();
  HeckeEngine(const HeckeEngine&) = delete;
  HeckeEngine& operator=(const HeckeEngine&) = delete;

  const QuadField& field() const { return field_; }
  int n() const { return n_; }

  /// Right cosets of a prime-power key by enumeration, of a mixed key as
  /// products of the cosets of its prime parts.
  const RightCosetSet& right_cosets(const DoubleCosetKey& key);
  std::size_t coset_count(const DoubleCosetKey& key);
  /// Every key occurring at level q = p^ℓ with its coset count.
  std::map<DoubleCosetKey, std::size_t> level_keys(std::int64_t q);

  HeckeElement product(const HeckeElement& x, const HeckeElement& y);
  PhiResult phi(const DoubleCosetKey& key, int k);

  std::uint64_t candidates_examined() const { return candidates_; }

 private:
  struct Level;
  Level& level(std::int64_t q);
  RightCosetSet materialize(const Level& lv, const DoubleCosetKey& key);
  void verify_closure(const RightCosetSet& set);

  QuadField field_;
  int n_;
  EnumerationOptions opts_;
  std::map<std::int64_t, std::unique_ptr<Level>> levels_;
  std::map<DoubleCosetKey, RightCosetSet> sets_;
  std::unique_ptr<HeckeEngine> lower_;
  std::uint64_t candidates_ = 0;
};

/// Enumerates Γ_n\Γ_n M Γ_n for a key with q a prime power.
RightCosetSet enumerate_right_cosets(const QuadField& field, const DoubleCosetKey& key,
                                     const EnumerationOptions& opts = {});

HeckeElement hecke_product(const HeckeElement& x, const HeckeElement& y, const EnumerationOptions& opts = {});

PhiResult phi_map(const QuadField& field, const DoubleCosetKey& key, int k, const EnumerationOptions& opts = {});

/// ∂_k = I_k · a_k·O_K with a_k the largest positive integer supported on
/// inert primes.
struct InertSplit {
  std::vector<Integer> inert;
  std::vector<IdealHNF> complement;
};
InertSplit split_inert_rational(const QuadField& field, const DetDivChain& chain);

/// ∂_k(x)·∂_k(y) = ∂_k(xy) for every k.
bool chain_multiplicative(const QuadField& field, const DetDivChain& x, const DetDivChain& y,
                          const DetDivChain& xy);

/// Crude bound q^{8n²} on the number of right cosets.
bool within_coset_bound(std::size_t count, std::int64_t q, int n);

}  // namespace hermhecke
