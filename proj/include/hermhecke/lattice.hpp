#pragma once

// Integer lattices that contain q·Z^N, handled entirely modulo q in 64-bit
// arithmetic. These back the right-coset key and the fast elementary-divisor
// route used in bulk enumeration.

#include <cstdint>
#include <functional>
#include <vector>

namespace hermhecke {

using IntRows = std::vector<std::vector<std::int64_t>>;

/// Canonical Hermite normal form (upper triangular, positive pivots, entries
/// above a pivot reduced into [0, pivot)) of the lattice spanned by rows and
/// q·Z^ncols, flattened row-major over the upper triangle.
std::vector<std::int64_t> hnf_mod(const IntRows& rows, int ncols, std::int64_t q);

/// p-adic valuations (each capped at ell) of the ncols elementary divisors of
/// the lattice spanned by rows and p^ell·Z^ncols, ascending.
std::vector<int> smith_valuations(const IntRows& rows, int ncols, std::int64_t p, int ell);

std::int64_t mod_floor(std::int64_t x, std::int64_t q);

/// A square matrix over O_K with coordinates (a + b·ω) reduced modulo q.
class OkMatMod {
 public:
  OkMatMod() = default;
  OkMatMod(int dim, std::int64_t modulus, std::int64_t omega_trace, std::int64_t omega_norm);

  int dim() const { return dim_; }
  std::int64_t modulus() const { return q_; }
  std::int64_t& a(int i, int j) { return a_[static_cast<std::size_t>(i * dim_ + j)]; }
  std::int64_t& b(int i, int j) { return b_[static_cast<std::size_t>(i * dim_ + j)]; }
  std::int64_t a(int i, int j) const { return a_[static_cast<std::size_t>(i * dim_ + j)]; }
  std::int64_t b(int i, int j) const { return b_[static_cast<std::size_t>(i * dim_ + j)]; }

  /// Product modulo the given modulus, which must divide both operands'
  /// moduli.
  OkMatMod mul(const OkMatMod& o, std::int64_t modulus) const;
  OkMatMod reduced(std::int64_t modulus) const;

  /// Integer coordinates of the O_K-row module: for each row r, the vectors
  /// r and ω·r in Z^{2·dim}, reduced modulo the given modulus.
  IntRows z_row_module(std::int64_t modulus) const;

 private:
  int dim_ = 0;
  std::int64_t q_ = 0;
  std::int64_t t_ = 0, n_ = 0;
  std::vector<std::int64_t> a_, b_;
};

struct LatticeKeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (std::int64_t x : v) {
      h ^= std::hash<std::int64_t>{}(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

}  // namespace hermhecke
