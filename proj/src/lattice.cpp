#include "hermhecke/lattice.hpp"

#include <algorithm>
#include <stdexcept>

#include "hermhecke/errors.hpp"

namespace hermhecke {

namespace {

using i128 = __int128;

std::int64_t mulmod(std::int64_t x, std::int64_t y, std::int64_t q) {
  return mod_floor(static_cast<std::int64_t>((static_cast<i128>(x) * y) % q), q);
}

// g = s·a + t·b with g = gcd(a, b) ≥ 0
void ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& g, std::int64_t& s, std::int64_t& t) {
  std::int64_t old_r = a, r = b, old_s = 1, s1 = 0, old_t = 0, t1 = 1;
  while (r != 0) {
    std::int64_t qt = old_r / r;
    std::int64_t tmp = old_r - qt * r;
    old_r = r;
    r = tmp;
    tmp = old_s - qt * s1;
    old_s = s1;
    s1 = tmp;
    tmp = old_t - qt * t1;
    old_t = t1;
    t1 = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  g = old_r;
  s = old_s;
  t = old_t;
}

int valuation(std::int64_t x, std::int64_t p, int cap) {
  if (x == 0) return cap;
  int v = 0;
  while (v < cap && x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

std::int64_t inverse_mod(std::int64_t u, std::int64_t q) {
  std::int64_t g, s, t;
  ext_gcd(mod_floor(u, q), q, g, s, t);
  HERMHECKE_CHECK(g == 1, "element is not a unit");
  return mod_floor(s, q);
}

}  // namespace

std::int64_t mod_floor(std::int64_t x, std::int64_t q) {
  std::int64_t r = x % q;
  return r < 0 ? r + q : r;
}

std::vector<std::int64_t> hnf_mod(const IntRows& rows, int ncols, std::int64_t q) {
  if (q < 1) throw std::invalid_argument("hnf_mod needs q >= 1");
  const std::size_t N = static_cast<std::size_t>(ncols);
  IntRows R;
  R.reserve(rows.size() + N);
  for (const auto& r : rows) {
    if (r.size() != N) throw std::invalid_argument("hnf_mod: row length mismatch");
    std::vector<std::int64_t> v(N);
    for (std::size_t c = 0; c < N; ++c) v[c] = mod_floor(r[c], q);
    R.push_back(std::move(v));
  }
  // q·e_j rows keep the lattice full rank and license reduction mod q in
  // columns that have not been processed yet.
  for (std::size_t j = 0; j < N; ++j) {
    std::vector<std::int64_t> v(N, 0);
    v[j] = q;
    R.push_back(std::move(v));
  }
  std::vector<char> active(R.size(), 1);
  IntRows H(N);
  for (std::size_t j = 0; j < N; ++j) {
    std::size_t piv = R.size();
    for (std::size_t r = 0; r < R.size(); ++r) {
      if (!active[r] || R[r][j] == 0) continue;
      if (piv == R.size()) {
        piv = r;
        continue;
      }
      std::int64_t a = R[piv][j], b = R[r][j], g, s, t;
      ext_gcd(a, b, g, s, t);
      const std::int64_t ag = a / g, bg = b / g;
      auto& P = R[piv];
      auto& Q = R[r];
      for (std::size_t c = j; c < N; ++c) {
        i128 np = static_cast<i128>(s) * P[c] + static_cast<i128>(t) * Q[c];
        i128 nq = -static_cast<i128>(bg) * P[c] + static_cast<i128>(ag) * Q[c];
        if (c == j) {
          P[c] = static_cast<std::int64_t>(np);
          Q[c] = static_cast<std::int64_t>(nq);
        } else {
          P[c] = mod_floor(static_cast<std::int64_t>(np % q), q);
          Q[c] = mod_floor(static_cast<std::int64_t>(nq % q), q);
        }
      }
      HERMHECKE_CHECK(Q[j] == 0, "hnf_mod elimination failed");
    }
    HERMHECKE_CHECK(piv != R.size(), "hnf_mod: lattice not of full rank");
    if (R[piv][j] < 0)
      for (std::size_t c = j; c < N; ++c) R[piv][c] = mod_floor(-R[piv][c], q);
    if (R[piv][j] < 0) R[piv][j] = -R[piv][j];
    H[j] = R[piv];
    active[piv] = 0;
  }
  for (std::size_t j = 0; j < N; ++j) {
    const std::int64_t d = H[j][j];
    HERMHECKE_CHECK(d > 0 && q % d == 0, "hnf_mod pivot does not divide q");
    for (std::size_t i = 0; i < j; ++i) {
      std::int64_t x = H[i][j];
      std::int64_t f = x >= 0 ? x / d : -((-x + d - 1) / d);
      if (f == 0) continue;
      for (std::size_t c = j; c < N; ++c) H[i][c] -= f * H[j][c];
    }
  }
  std::vector<std::int64_t> out;
  out.reserve(N * (N + 1) / 2);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t c = i; c < N; ++c) out.push_back(H[i][c]);
  return out;
}

std::vector<int> smith_valuations(const IntRows& rows, int ncols, std::int64_t p, int ell) {
  std::int64_t P = 1;
  for (int i = 0; i < ell; ++i) P *= p;
  const std::size_t N = static_cast<std::size_t>(ncols);
  IntRows R;
  for (const auto& r : rows) {
    std::vector<std::int64_t> v(N);
    for (std::size_t c = 0; c < N; ++c) v[c] = mod_floor(r[c], P);
    R.push_back(std::move(v));
  }
  std::vector<int> vals;
  const std::size_t nr = R.size();
  for (std::size_t t = 0; t < N; ++t) {
    int best = ell;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = t; i < nr && best > 0; ++i)
      for (std::size_t j = t; j < N; ++j) {
        int v = valuation(R[i][j], p, ell);
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
          if (v == 0) break;
        }
      }
    if (best == ell) {
      for (std::size_t k = t; k < N; ++k) vals.push_back(ell);
      break;
    }
    std::swap(R[t], R[bi]);
    for (auto& row : R) std::swap(row[t], row[bj]);
    std::int64_t pv = 1;
    for (int i = 0; i < best; ++i) pv *= p;
    // pivot = p^best · unit
    const std::int64_t unit = R[t][t] / pv;
    const std::int64_t uinv = inverse_mod(unit, P);
    for (std::size_t c = t; c < N; ++c) R[t][c] = mulmod(R[t][c], uinv, P);
    for (std::size_t i = 0; i < nr; ++i) {
      if (i == t || R[i][t] == 0) continue;
      const std::int64_t f = R[i][t] / pv;
      for (std::size_t c = t; c < N; ++c) R[i][c] = mod_floor(R[i][c] - mulmod(f, R[t][c], P), P);
    }
    for (std::size_t c = t + 1; c < N; ++c) R[t][c] = 0;
    vals.push_back(best);
  }
  std::sort(vals.begin(), vals.end());
  return vals;
}

// ---------------------------------------------------------------------------

OkMatMod::OkMatMod(int dim, std::int64_t modulus, std::int64_t omega_trace, std::int64_t omega_norm)
    : dim_(dim),
      q_(modulus),
      t_(omega_trace),
      n_(omega_norm),
      a_(static_cast<std::size_t>(dim * dim), 0),
      b_(static_cast<std::size_t>(dim * dim), 0) {}

OkMatMod OkMatMod::mul(const OkMatMod& o, std::int64_t modulus) const {
  if (dim_ != o.dim_) throw std::invalid_argument("OkMatMod dimension mismatch");
  if (modulus < 1 || q_ % modulus != 0 || o.q_ % modulus != 0)
    throw std::invalid_argument("OkMatMod modulus must divide both operand moduli");
  OkMatMod r(dim_, modulus, t_, n_);
  const std::int64_t q = modulus;
  const std::int64_t nn = mod_floor(n_, q);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      i128 sa = 0, sb = 0;
      for (int k = 0; k < dim_; ++k) {
        const std::int64_t xa = a(i, k), xb = b(i, k), ya = o.a(k, j), yb = o.b(k, j);
        if ((xa | xb) == 0 || (ya | yb) == 0) continue;
        const i128 bb = static_cast<i128>(xb) * yb;
        sa += static_cast<i128>(xa) * ya - (bb % q) * nn;
        sb += static_cast<i128>(xa) * yb + static_cast<i128>(ya) * xb + (t_ ? bb : 0);
      }
      r.a(i, j) = mod_floor(static_cast<std::int64_t>(sa % q), q);
      r.b(i, j) = mod_floor(static_cast<std::int64_t>(sb % q), q);
    }
  return r;
}

OkMatMod OkMatMod::reduced(std::int64_t modulus) const {
  if (modulus < 1 || q_ % modulus != 0) throw std::invalid_argument("OkMatMod: modulus must divide");
  OkMatMod r = *this;
  r.q_ = modulus;
  for (auto& x : r.a_) x = mod_floor(x, modulus);
  for (auto& x : r.b_) x = mod_floor(x, modulus);
  return r;
}

IntRows OkMatMod::z_row_module(std::int64_t modulus) const {
  IntRows out;
  out.reserve(static_cast<std::size_t>(2 * dim_));
  const std::int64_t q = modulus;
  for (int i = 0; i < dim_; ++i) {
    std::vector<std::int64_t> r(static_cast<std::size_t>(2 * dim_)), w(static_cast<std::size_t>(2 * dim_));
    for (int j = 0; j < dim_; ++j) {
      const std::int64_t xa = mod_floor(a(i, j), q), xb = mod_floor(b(i, j), q);
      r[static_cast<std::size_t>(2 * j)] = xa;
      r[static_cast<std::size_t>(2 * j + 1)] = xb;
      // ω(a + bω) = −n·b + (a + t·b)ω
      w[static_cast<std::size_t>(2 * j)] = mulmod(-n_, xb, q);
      w[static_cast<std::size_t>(2 * j + 1)] = mod_floor(xa + t_ * xb, q);
    }
    out.push_back(std::move(r));
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace hermhecke
