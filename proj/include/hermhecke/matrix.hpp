#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hermhecke/field.hpp"
#include "hermhecke/ideal.hpp"
#include "hermhecke/lattice.hpp"

namespace hermhecke {

/// Dense matrix over K with exact entries.
class MatK {
 public:
  MatK(const QuadField& field, int rows, int cols);

  static MatK identity(const QuadField& field, int n);
  /// J = (0 −I; I 0) of size 2n.
  static MatK J(const QuadField& field, int n);
  static MatK diag(const QuadField& field, const std::vector<KElem>& d);
  static MatK diag_int(const QuadField& field, const std::vector<Integer>& d);
  static MatK from_blocks(const MatK& A, const MatK& B, const MatK& C, const MatK& D);

  const QuadField& field() const { return field_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  KElem& operator()(int i, int j) { return e_[static_cast<std::size_t>(i * cols_ + j)]; }
  const KElem& operator()(int i, int j) const { return e_[static_cast<std::size_t>(i * cols_ + j)]; }

  MatK operator+(const MatK& o) const;
  MatK operator-(const MatK& o) const;
  MatK operator*(const MatK& o) const;
  MatK scaled(const KElem& s) const;
  MatK scaled(const Rational& s) const;

  MatK transpose() const;
  MatK conj() const;
  /// conj(M)^tr
  MatK adjoint() const;
  KElem det() const;
  /// Throws std::domain_error when singular.
  MatK inverse() const;
  MatK block(int r0, int c0, int nr, int nc) const;
  int rank() const;

  bool is_integral() const;
  bool is_zero() const;
  bool is_square() const { return rows_ == cols_; }
  bool operator==(const MatK& o) const;
  bool operator!=(const MatK& o) const { return !(*this == o); }

  std::string str() const;

 private:
  void check_compatible(const MatK& o) const;
  QuadField field_;
  int rows_, cols_;
  std::vector<KElem> e_;
};

/// J[M] = conj(M)^tr · J · M.
MatK j_form(const MatK& M);

/// q with J[M] = q·J, if M is integral of even size and such a positive
/// integer q exists. Throws std::invalid_argument for non-integral M.
std::optional<Integer> similitude_factor(const MatK& M);

/// M ∈ Γ_n, or M ∈ Γ_n[level] when level > 1.
bool in_gamma(const MatK& M, const Integer& level = 1);

/// Integral with a unit determinant.
bool is_unimodular(const MatK& M);

struct DetDivChain {
  std::vector<IdealHNF> chain;  ///< ∂_1, …, ∂_r
};

/// Determinantal divisors ∂_1 … ∂_min(up_to, rank) of an integral matrix.
/// up_to defaults to min(rows, cols).
DetDivChain detdiv_chain(const MatK& M, std::optional<int> up_to = std::nullopt);

/// Canonical key of the right coset Γ_n·M for M ∈ Δ_n(q): the HNF (mod q)
/// of the Z-lattice of the O_K-row module of M.
using LatticeKey = std::vector<std::int64_t>;
LatticeKey row_lattice_key(const MatK& M, const Integer& q);
/// Same, without checking J[M] = qJ.
LatticeKey row_lattice_key_unchecked(const MatK& M, std::int64_t q);

/// Γ_n·M1 = Γ_n·M2, decided by M1·M2^{-1} ∈ Γ_n.
bool right_coset_equal(const MatK& M1, const MatK& M2);

/// Reduction of an integral matrix modulo q.
OkMatMod to_mod(const MatK& M, std::int64_t q);

/// Generators of Γ_n: translations (I H; 0 I) for a Z-basis of integral
/// Hermitian H, the inversion J, and rotations diag(conj(U)^tr, U^{-1}) for
/// elementary and unit-diagonal U.
std::vector<MatK> gamma_generators(const QuadField& field, int n);

}  // namespace hermhecke
