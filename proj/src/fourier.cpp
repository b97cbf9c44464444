#include "hermhecke/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hermhecke/errors.hpp"

namespace hermhecke {

namespace {

std::size_t upper_pos(int n, int i, int j) {
  // row-major position of (i, j), i < j, among the strict upper triangle
  return static_cast<std::size_t>(i * n - i * (i + 1) / 2 + (j - i - 1));
}

Integer lcm_int(const Integer& a, const Integer& b) {
  Integer r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

Rational floor_rational(const Rational& x) {
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return Rational(f);
}

bool hermitian_psd(const MatK& V) {
  const int n = V.rows();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    MatK S(V.field(), static_cast<int>(idx.size()), static_cast<int>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) S(static_cast<int>(a), static_cast<int>(b)) = V(idx[a], idx[b]);
    if (S.det().to_rational() < 0) return false;
  }
  return true;
}

/// Smallest k/2^32 ≥ √r, exact when r is a rational square.
Rational sqrt_upper(const Rational& r) {
  Integer nd = r.get_num() * r.get_den(), root;
  if (mpz_perfect_square_p(nd.get_mpz_t())) {
    mpz_sqrt(root.get_mpz_t(), nd.get_mpz_t());
    return Rational(root) / Rational(r.get_den());
  }
  Integer scaled = nd << 64;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  root += 1;
  return Rational(root) / Rational(Integer(r.get_den()) << 32);
}

/// Rational upper bound for the largest eigenvalue of a Hermitian psd
/// matrix. Closed form up to 2×2; otherwise Gershgorin, then bisection on
/// "xI − V is psd".
Rational lambda_upper(const MatK& V) {
  if (V.rows() == 1) return V(0, 0).to_rational();
  if (V.rows() == 2) {
    const Rational tr = V(0, 0).to_rational() + V(1, 1).to_rational();
    const Rational det = V(0, 0).to_rational() * V(1, 1).to_rational() - V(0, 1).norm();
    Rational disc = tr * tr - 4 * det;
    if (disc < 0) disc = 0;
    return (tr + sqrt_upper(disc)) / 2;
  }
  Rational hi = 0;
  for (int i = 0; i < V.rows(); ++i) {
    Rational s = 0;
    for (int j = 0; j < V.cols(); ++j) s += abs_upper_bound(V(i, j));
    hi = std::max(hi, s);
  }
  Rational lo = 0;
  const MatK I = MatK::identity(V.field(), V.rows());
  for (int it = 0; it < 24; ++it) {
    Rational mid = (lo + hi) / 2;
    if (hermitian_psd(I.scaled(mid) - V))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

KElem kpow(const KElem& x, int e, const QuadField& field) {
  KElem r = field.one();
  const KElem b = e < 0 ? x.inverse() : x;
  for (int i = 0; i < std::abs(e); ++i) r *= b;
  return r;
}

Rational rpow(const Rational& x, int e) {
  Rational r = 1;
  for (int i = 0; i < std::abs(e); ++i) r *= x;
  return e < 0 ? Rational(1 / r) : r;
}

Rational real_trace(const MatK& M) {
  KElem t = M.field().zero();
  for (int i = 0; i < M.rows(); ++i) t += M(i, i);
  if (!t.is_rational()) throw std::invalid_argument("phase trace(T B D^-1) is not real; the matrix is not in Delta_n(q)");
  return t.to_rational();
}

}  // namespace

// ---------------------------------------------------------------------------
// HermIndex

const KElem& HermIndex::at(int i, int j) const { return upper[upper_pos(n(), i, j)]; }

HermIndex HermIndex::from_matrix(const MatK& M) {
  if (!M.is_square()) throw std::invalid_argument("index matrix must be square");
  const int n = M.rows();
  HermIndex T;
  for (int i = 0; i < n; ++i) {
    if (!M(i, i).is_rational()) throw std::invalid_argument("index matrix is not Hermitian");
    T.diag.push_back(M(i, i).to_rational());
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (M(j, i) != M(i, j).conj()) throw std::invalid_argument("index matrix is not Hermitian");
      T.upper.push_back(M(i, j));
    }
  return T;
}

HermIndex HermIndex::zero(const QuadField& field, int n) {
  HermIndex T;
  T.diag.assign(static_cast<std::size_t>(n), Rational(0));
  T.upper.assign(static_cast<std::size_t>(n * (n - 1) / 2), field.zero());
  return T;
}

MatK HermIndex::to_matrix(const QuadField& field) const {
  const int m = n();
  MatK M(field, m, m);
  for (int i = 0; i < m; ++i) M(i, i) = field.from_rational(diag[static_cast<std::size_t>(i)]);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      M(i, j) = at(i, j);
      M(j, i) = at(i, j).conj();
    }
  return M;
}

Rational HermIndex::trace() const {
  Rational t = 0;
  for (const auto& d : diag) t += d;
  return t;
}

KElem HermIndex::mu(const QuadField& field, int i, int j) const { return at(i, j) * field.sqrt_disc(); }

bool HermIndex::in_lambda(const QuadField& field, std::int64_t scale) const {
  const Rational s(Integer(static_cast<long>(scale)));
  for (const auto& d : diag)
    if (Rational(d * s).get_den() != 1) return false;
  for (int i = 0; i < n(); ++i)
    for (int j = i + 1; j < n(); ++j)
      if (!mu(field, i, j).scaled(s).is_integral()) return false;
  return true;
}

std::int64_t HermIndex::lambda_denominator(const QuadField& field) const {
  Integer l = 1;
  for (const auto& d : diag) l = lcm_int(l, d.get_den());
  for (int i = 0; i < n(); ++i)
    for (int j = i + 1; j < n(); ++j) l = lcm_int(l, mu(field, i, j).den());
  if (!l.fits_slong_p()) throw std::invalid_argument("index denominator too large");
  return l.get_si();
}

bool HermIndex::operator<(const HermIndex& o) const {
  if (diag.size() != o.diag.size()) return diag.size() < o.diag.size();
  for (std::size_t i = 0; i < diag.size(); ++i)
    if (diag[i] != o.diag[i]) return diag[i] < o.diag[i];
  for (std::size_t i = 0; i < upper.size(); ++i)
    if (upper[i] != o.upper[i]) return upper[i] < o.upper[i];
  return false;
}

std::string HermIndex::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < diag.size(); ++i) os << (i ? "," : "") << rational_to_string(diag[i]);
  if (!upper.empty()) {
    os << ';';
    for (std::size_t i = 0; i < upper.size(); ++i) os << (i ? "," : "") << upper[i].str();
  }
  os << ']';
  return os.str();
}

HermIndex leading_block(const HermIndex& T) {
  const int n = T.n();
  if (n < 1) throw std::invalid_argument("leading_block of an empty index");
  HermIndex r;
  r.diag.assign(T.diag.begin(), T.diag.end() - 1);
  for (int i = 0; i < n - 1; ++i)
    for (int j = i + 1; j < n - 1; ++j) r.upper.push_back(T.at(i, j));
  return r;
}

bool last_row_vanishes(const HermIndex& T) {
  const int n = T.n();
  if (n < 1) return true;
  if (T.diag.back() != 0) return false;
  for (int i = 0; i < n - 1; ++i)
    if (!T.at(i, n - 1).is_zero()) return false;
  return true;
}

PsdInfo psd_rank(const QuadField& field, const HermIndex& T) {
  const int n = T.n();
  const MatK M = T.to_matrix(field);
  PsdInfo info{true, true, M.rank()};
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    MatK S(field, static_cast<int>(idx.size()), static_cast<int>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) S(static_cast<int>(a), static_cast<int>(b)) = M(idx[a], idx[b]);
    const Rational d = S.det().to_rational();
    if (d < 0) info.psd = false;
  }
  for (int k = 1; k <= n; ++k)
    if (M.block(0, 0, k, k).det().to_rational() <= 0) info.pd = false;
  if (!info.psd) info.pd = false;
  return info;
}

std::vector<HermIndex> lambda_indices(const QuadField& field, int n, std::int64_t max_trace) {
  if (n < 0 || max_trace < 0) throw std::invalid_argument("lambda_indices needs n >= 0 and max_trace >= 0");
  std::vector<HermIndex> out;
  const std::int64_t absd = -field.disc();
  const std::int64_t t = field.omega_trace(), nrm = field.omega_norm();
  std::vector<std::int64_t> dg(static_cast<std::size_t>(n), 0);
  const KElem sd_inv = field.sqrt_disc().inverse();
  // O_K elements of norm ≤ bound
  auto small_elements = [&](std::int64_t bound) {
    std::vector<KElem> r;
    const auto bb = static_cast<std::int64_t>(std::sqrt(4.0 * static_cast<double>(bound) / static_cast<double>(4 * nrm - t * t))) + 1;
    const auto ab = static_cast<std::int64_t>(std::sqrt(static_cast<double>(bound))) + bb + 1;
    for (std::int64_t b = -bb; b <= bb; ++b)
      for (std::int64_t a = -ab; a <= ab; ++a)
        if (a * a + t * a * b + nrm * b * b <= bound) r.push_back(field.make(Integer(static_cast<long>(a)), Integer(static_cast<long>(b))));
    return r;
  };
  std::function<void(int, std::int64_t)> diag_rec = [&](int i, std::int64_t left) {
    if (i == n) {
      HermIndex T = HermIndex::zero(field, n);
      for (int j = 0; j < n; ++j) T.diag[static_cast<std::size_t>(j)] = Rational(Integer(static_cast<long>(dg[static_cast<std::size_t>(j)])));
      std::vector<std::pair<int, int>> pos;
      std::vector<std::vector<KElem>> choices;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          pos.emplace_back(a, b);
          std::vector<KElem> c;
          for (const KElem& m : small_elements(absd * dg[static_cast<std::size_t>(a)] * dg[static_cast<std::size_t>(b)]))
            c.push_back(m * sd_inv);
          choices.push_back(std::move(c));
        }
      std::function<void(std::size_t)> off_rec = [&](std::size_t s) {
        if (s == pos.size()) {
          if (psd_rank(field, T).psd) out.push_back(T);
          return;
        }
        for (const KElem& x : choices[s]) {
          T.upper[s] = x;
          off_rec(s + 1);
        }
      };
      off_rec(0);
      return;
    }
    for (std::int64_t v = 0; v <= left; ++v) {
      dg[static_cast<std::size_t>(i)] = v;
      diag_rec(i + 1, left - v);
    }
  };
  diag_rec(0, max_trace);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Expansions

Rational FourierExpansion::coeff(const HermIndex& T) const {
  auto it = coeffs.find(T);
  return it == coeffs.end() ? Rational(0) : it->second;
}

void FourierExpansion::prune() {
  for (auto it = coeffs.begin(); it != coeffs.end();) {
    if (it->second == 0)
      it = coeffs.erase(it);
    else
      ++it;
  }
}

bool FourierExpansion::operator==(const FourierExpansion& o) const {
  return field == o.field && n == o.n && k == o.k && scale == o.scale && trunc == o.trunc && coeffs == o.coeffs;
}

namespace {

}  // namespace

// Per-coset data reused across all indices and weights.
struct CosetSlash {
  MatK A, Aadj, BDinv;
  Rational det_d;   // det(D), a positive integer
  Rational q, inv_q;
  Rational lambda;  // upper bound for λ_max(conj(D)^tr D)
  // A·conj(A)^tr/q in floating point: trace S = trace(T·G), used as a prefilter only
  std::vector<std::complex<double>> G;
};

// Cosets sharing A and D. They map T to the same S with the same factor and
// differ only in the phase trace(T·B·D⁻¹). That phase is linear in the
// integer coordinates of T (t_ii, then a, b of each μ_ij = a + bω), so
// each B is stored as integer weights modulo a common denominator.
struct CosetGroup {
  CosetSlash base;
  std::vector<MatK> BDinv;
  std::int64_t L = 1;
  std::vector<std::vector<std::int64_t>> weights;
};

namespace {

std::complex<double> to_complex(const KElem& x, const QuadField& field) {
  const double m = static_cast<double>(field.m());
  const double den = x.den().get_d();
  const double wr = field.omega_kind() == OmegaKind::half_integral ? 0.5 : 0.0;
  const double wi = field.omega_kind() == OmegaKind::half_integral ? std::sqrt(m) / 2 : std::sqrt(m);
  return {(x.a().get_d() + x.b().get_d() * wr) / den, x.b().get_d() * wi / den};
}

// Input coefficients sorted by trace, with a floating-point copy of T.
struct IndexedCoeff {
  const HermIndex* T;
  const Rational* a;
  Rational trace;
  std::vector<double> diag;
  std::vector<std::complex<double>> upper;
  // integer coordinates for the phase weights; empty unless T ∈ Λ_n
  std::vector<std::int64_t> coords;
};

std::vector<IndexedCoeff> index_coeffs(const FourierExpansion& f) {
  std::vector<IndexedCoeff> out;
  out.reserve(f.coeffs.size());
  for (const auto& [T, a] : f.coeffs) {
    IndexedCoeff c{&T, &a, T.trace(), {}, {}};
    for (const auto& d : T.diag) c.diag.push_back(d.get_d());
    for (const auto& u : T.upper) c.upper.push_back(to_complex(u, f.field));
    bool integral = true;
    for (const auto& d : T.diag) {
      integral = integral && d.get_den() == 1 && d.get_num().fits_slong_p();
      if (integral) c.coords.push_back(d.get_num().get_si());
    }
    for (int i = 0; i < f.n && integral; ++i)
      for (int j = i + 1; j < f.n && integral; ++j) {
        const KElem mu = T.mu(f.field, i, j);
        integral = mu.is_integral() && mu.a().fits_slong_p() && mu.b().fits_slong_p();
        if (integral) {
          c.coords.push_back(mu.a().get_si());
          c.coords.push_back(mu.b().get_si());
        }
      }
    if (!integral) c.coords.clear();
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const IndexedCoeff& x, const IndexedCoeff& y) { return x.trace < y.trace; });
  return out;
}

double approx_image_trace(const IndexedCoeff& c, const std::vector<std::complex<double>>& G, int n) {
  double t = 0;
  for (int i = 0; i < n; ++i) t += c.diag[static_cast<std::size_t>(i)] * G[static_cast<std::size_t>(i * n + i)].real();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      t += 2 * (c.upper[upper_pos(n, i, j)] * G[static_cast<std::size_t>(j * n + i)]).real();
  return t;
}

CosetSlash prepare(const MatK& L) {
  if (!L.is_square() || L.rows() % 2 != 0) throw std::invalid_argument("slash: matrix must be 2n x 2n");
  const int n = L.rows() / 2;
  if (!L.block(n, 0, n, n).is_zero()) throw std::invalid_argument("slash: matrix is not upper block triangular");
  auto q = similitude_factor(L);
  if (!q) throw std::invalid_argument("slash: matrix is not in Delta_n(q)");
  const MatK A = L.block(0, 0, n, n), B = L.block(0, n, n, n), D = L.block(n, n, n, n);
  const KElem det = D.det();
  if (!det.is_rational() || det.to_rational() <= 0) throw std::invalid_argument("slash: det D is not a positive integer");
  CosetSlash c{A, A.adjoint(), B * D.inverse(), det.to_rational(), Rational(*q), Rational(1) / Rational(*q),
               lambda_upper(D.adjoint() * D), {}};
  const MatK G = (A * c.Aadj).scaled(c.inv_q);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c.G.push_back(to_complex(G(i, j), L.field()));
  return c;
}

// T = D S conj(D)^tr / q, so trace T ≤ λ_max(conj(D)^tr D) trace S / q and
// every image with trace ≤ q·trunc/λ is complete.
Rational certified(const CosetSlash& c, const Rational& trunc_in) { return trunc_in * c.q / c.lambda; }

// Only images with trace ≤ keep are wanted; their preimages have trace at
// most keep·λ/q.
void slash_into(const FourierExpansion& f, const std::vector<IndexedCoeff>& coeffs, const CosetSlash& c,
                const Rational& keep, int k, std::map<HermIndex, CycSum>& acc) {
  const Rational factor = rpow(c.det_d, -k);
  const Rational reach = keep * c.lambda * c.inv_q;
  // the estimate is only used to skip indices far outside the range
  const double cutoff = keep.get_d() + 1e-6 * (1 + std::abs(keep.get_d()));
  for (const IndexedCoeff& e : coeffs) {
    if (e.trace > reach) break;
    if (approx_image_trace(e, c.G, f.n) > cutoff) continue;
    const MatK Tm = e.T->to_matrix(f.field);
    HermIndex S = HermIndex::from_matrix((c.Aadj * Tm * c.A).scaled(c.inv_q));
    if (S.trace() > keep) continue;
    acc[S].add_term(*e.a * factor, real_trace(Tm * c.BDinv));
  }
}

// Phase coefficients W_k with trace(T·X) = Σ coords_k · W_k.
std::vector<Rational> phase_functional(const MatK& X) {
  const QuadField& K = X.field();
  const int n = X.rows();
  const KElem rd = K.sqrt_disc(), w = K.omega(), wc = K.omega().conj();
  std::vector<KElem> W;
  for (int i = 0; i < n; ++i) W.push_back(X(i, i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      // t_ij = μ/√d and conj(√d) = −√d
      W.push_back((X(j, i) - X(i, j)) / rd);
      W.push_back((w * X(j, i) - wc * X(i, j)) / rd);
    }
  std::vector<Rational> out;
  for (const KElem& x : W) {
    if (!x.is_rational()) throw std::invalid_argument("phase trace(T B D^-1) is not real; the matrix is not in Delta_n(q)");
    out.push_back(x.to_rational());
  }
  return out;
}

std::vector<CosetGroup> group_cosets(const std::vector<MatK>& reps) {
  std::vector<CosetGroup> groups;
  std::map<std::string, std::size_t> where;
  std::vector<std::vector<Rational>> functionals;
  std::vector<std::size_t> owner;
  for (const MatK& L : reps) {
    CosetSlash c = prepare(L);
    const int n = L.rows() / 2;
    const std::string tag = c.A.str() + "|" + L.block(n, n, n, n).str();
    auto [it, fresh] = where.emplace(tag, groups.size());
    if (fresh) groups.push_back(CosetGroup{c, {}, 1, {}});
    CosetGroup& g = groups[it->second];
    functionals.push_back(phase_functional(c.BDinv));
    owner.push_back(it->second);
    for (const Rational& r : functionals.back()) {
      const Integer d = r.get_den();
      if (!d.fits_slong_p() || d > Integer(1L << 20)) throw std::invalid_argument("phase denominator too large");
      g.L = std::lcm(g.L, d.get_si());
    }
    g.BDinv.push_back(std::move(c.BDinv));
  }
  for (std::size_t i = 0; i < functionals.size(); ++i) {
    CosetGroup& g = groups[owner[i]];
    const Rational Lr(Integer(static_cast<long>(g.L)));
    std::vector<std::int64_t> w;
    for (const Rational& r : functionals[i]) {
      Integer v = Rational(r * Lr).get_num();
      mpz_fdiv_r_ui(v.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(g.L));
      w.push_back(v.get_si());
    }
    g.weights.push_back(std::move(w));
  }
  return groups;
}

void slash_group(const FourierExpansion& f, const std::vector<IndexedCoeff>& coeffs, const CosetGroup& g,
                 const Rational& keep, int k, std::map<HermIndex, CycSum>& acc) {
  const CosetSlash& c = g.base;
  const Rational factor = rpow(c.det_d, -k);
  const Rational reach = keep * c.lambda * c.inv_q;
  const double cutoff = keep.get_d() + 1e-6 * (1 + std::abs(keep.get_d()));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(g.L), 0);
  std::vector<std::int64_t> touched;
  for (const IndexedCoeff& e : coeffs) {
    if (e.trace > reach) break;
    if (approx_image_trace(e, c.G, f.n) > cutoff) continue;
    const MatK Tm = e.T->to_matrix(f.field);
    HermIndex S = HermIndex::from_matrix((c.Aadj * Tm * c.A).scaled(c.inv_q));
    if (S.trace() > keep) continue;
    const Rational coeff = *e.a * factor;
    CycSum& out = acc[S];
    if (e.coords.empty()) {
      for (const MatK& X : g.BDinv) out.add_term(coeff, real_trace(Tm * X));
      continue;
    }
    for (const auto& w : g.weights) {
      std::int64_t j = 0;
      for (std::size_t t = 0; t < w.size(); ++t) {
        std::int64_t x = e.coords[t] % g.L;
        if (x < 0) x += g.L;
        j = (j + static_cast<std::int64_t>((static_cast<__int128>(x) * w[t]) % g.L)) % g.L;
      }
      if (counts[static_cast<std::size_t>(j)]++ == 0) touched.push_back(j);
    }
    for (std::int64_t j : touched) {
      Rational ph(Integer(static_cast<long>(j)), Integer(static_cast<long>(g.L)));
      ph.canonicalize();
      out.add_term(coeff * Rational(Integer(static_cast<long>(counts[static_cast<std::size_t>(j)]))), ph);
      counts[static_cast<std::size_t>(j)] = 0;
    }
    touched.clear();
  }
}

FourierExpansion finalize(const FourierExpansion& f, std::map<HermIndex, CycSum>& acc, const Rational& bound, int k) {
  FourierExpansion g{f.field, f.n, k, f.scale, 0, {}};
  const Rational s(Integer(static_cast<long>(f.scale)));
  g.trunc = floor_rational(bound * s) / s;
  for (auto& [S, c] : acc) {
    if (S.trace() > g.trunc) continue;
    HERMHECKE_CHECK(c.is_rational(), "Hecke image coefficient at " + S.str() + " is not rational: " + c.str());
    Rational v = c.to_rational();
    if (v == 0) continue;
    HERMHECKE_CHECK(S.in_lambda(f.field, f.scale), "Hecke image has support " + S.str() + " outside the index lattice");
    g.coeffs.emplace(S, v);
  }
  return g;
}

}  // namespace

CycExpansion slash_coset(const FourierExpansion& f, const MatK& L, int k) {
  const CosetSlash c = prepare(L);
  const Rational bound = certified(c, f.trunc);
  CycExpansion out{f.field, f.n, k, bound, {}};
  slash_into(f, index_coeffs(f), c, bound, k, out.coeffs);
  for (auto it = out.coeffs.begin(); it != out.coeffs.end();) {
    if (it->second.is_zero())
      it = out.coeffs.erase(it);
    else
      ++it;
  }
  return out;
}

CosetAction::CosetAction(const RightCosetSet& cosets) : key_(cosets.key), groups_(group_cosets(cosets.reps)) {}

CosetAction::~CosetAction() = default;
CosetAction::CosetAction(CosetAction&&) noexcept = default;

FourierExpansion CosetAction::apply(const FourierExpansion& f, int k) const {
  if (key_.n() != f.n) throw std::invalid_argument("hecke_act: degree mismatch");
  std::optional<Rational> bound;
  for (const CosetGroup& g : groups_) {
    const Rational b = certified(g.base, f.trunc);
    bound = bound ? std::min(*bound, b) : b;
  }
  const Rational s(Integer(static_cast<long>(f.scale)));
  const Rational keep = bound ? floor_rational(*bound * s) / s : f.trunc;
  const auto indexed = index_coeffs(f);
  std::map<HermIndex, CycSum> acc;
  for (const CosetGroup& g : groups_) slash_group(f, indexed, g, keep, k, acc);
  return finalize(f, acc, keep, k);
}

FourierExpansion hecke_act(const FourierExpansion& f, const RightCosetSet& cosets, int k) {
  if (cosets.key.n() != f.n) throw std::invalid_argument("hecke_act: degree mismatch");
  return CosetAction(cosets).apply(f, k);
}

FourierExpansion hecke_act(const FourierExpansion& f, const HeckeElement& e, int k, HeckeEngine& engine) {
  if (e.field != f.field || e.n != f.n) throw std::invalid_argument("hecke_act: field or degree mismatch");
  FourierExpansion g{f.field, f.n, k, f.scale, f.trunc, {}};
  bool first = true;
  for (const auto& [key, c] : e.terms) {
    FourierExpansion part = hecke_act(f, engine.right_cosets(key), k);
    g.trunc = first ? part.trunc : std::min(g.trunc, part.trunc);
    first = false;
    for (const auto& [S, v] : part.coeffs) g.coeffs[S] += c * v;
  }
  for (auto it = g.coeffs.begin(); it != g.coeffs.end();) {
    if (it->first.trace() > g.trunc || it->second == 0)
      it = g.coeffs.erase(it);
    else
      ++it;
  }
  return g;
}

FourierExpansion siegel_phi(const FourierExpansion& f) {
  if (f.n < 1) throw std::invalid_argument("siegel_phi needs degree >= 1");
  FourierExpansion g{f.field, f.n - 1, f.k, f.scale, f.trunc, {}};
  for (const auto& [T, a] : f.coeffs)
    if (last_row_vanishes(T)) g.coeffs.emplace(leading_block(T), a);
  return g;
}

FourierExpansion slash_RU(const FourierExpansion& f, const MatK& U, int k) {
  if (!U.is_square() || U.rows() != f.n) throw std::invalid_argument("slash_RU: U must be n x n");
  const KElem det = U.det();
  if (det.is_zero()) throw std::invalid_argument("slash_RU: U is singular");
  const KElem factor = kpow(det, k, f.field);
  if (!factor.is_rational()) throw std::domain_error("slash_RU: det(U)^k = " + factor.str() + " is not rational");
  const MatK Uadj = U.adjoint();
  const MatK W = U.inverse();
  FourierExpansion g{f.field, f.n, f.k, 1, 0, {}};
  // T = W S conj(W)^tr, so trace T ≤ λ_max(conj(W)^tr W) trace S
  g.trunc = f.trunc / lambda_upper(W.adjoint() * W);
  Integer scale = 1;
  for (const auto& [T, a] : f.coeffs) {
    HermIndex S = HermIndex::from_matrix(U * T.to_matrix(f.field) * Uadj);
    if (S.trace() > g.trunc) continue;
    scale = lcm_int(scale, Integer(static_cast<long>(S.lambda_denominator(f.field))));
    g.coeffs[S] += a * factor.to_rational();
  }
  g.prune();
  if (!scale.fits_slong_p()) throw std::invalid_argument("slash_RU: lattice scale overflow");
  g.scale = scale.get_si();
  return g;
}

MatK class_twist_matrix(const QuadField& field, int n, const KElem& u) {
  if (n < 2) throw std::invalid_argument("class twist needs n >= 2");
  MatK U = MatK::identity(field, n);
  U(n - 1, n - 2) = u.conj();
  return U;
}

CuspReport cusp_tests(const FourierExpansion& f, const ClassRepSet& reps) {
  CuspReport r{true, true, true, {}};
  for (const auto& [T, a] : f.coeffs)
    if (a != 0 && !psd_rank(f.field, T).pd) r.direct = false;
  for (const ClassRep& rep : reps.reps) {
    // at n = 1 there is no twist and the test is Φ alone
    FourierExpansion g = f.n >= 2 ? slash_RU(f, class_twist_matrix(f.field, f.n, rep.u), f.k) : f;
    FourierExpansion h = siegel_phi(g);
    h.prune();
    r.per_class.push_back(h.coeffs.empty());
    if (!h.coeffs.empty()) r.twisted = false;
  }
  r.agree = r.direct == r.twisted;
  return r;
}

RankProfile rank_profile(const FourierExpansion& f) {
  RankProfile r;
  for (const auto& [T, a] : f.coeffs) {
    if (a == 0) continue;
    const int rk = psd_rank(f.field, T).rank;
    ++r.histogram[rk];
    r.min_rank = r.min_rank < 0 ? rk : std::min(r.min_rank, rk);
  }
  return r;
}

Rational bernoulli(int k) {
  if (k < 0) throw std::invalid_argument("bernoulli needs k >= 0");
  // Σ_{j=0}^{m} C(m+1, j) B_j = 0
  std::vector<Rational> B(static_cast<std::size_t>(k) + 1);
  B[0] = 1;
  for (int m = 1; m <= k; ++m) {
    Rational s = 0;
    Integer binom = 1;  // C(m+1, j)
    for (int j = 0; j < m; ++j) {
      s += Rational(binom) * B[static_cast<std::size_t>(j)];
      binom = binom * (m + 1 - j) / (j + 1);
    }
    B[static_cast<std::size_t>(m)] = -s / Rational(m + 1);
  }
  return B[static_cast<std::size_t>(k)];
}

Integer divisor_sigma(int r, std::int64_t t) {
  if (t < 1) throw std::invalid_argument("divisor_sigma needs t >= 1");
  Integer s = 0;
  for (std::int64_t d = 1; d * d <= t; ++d) {
    if (t % d != 0) continue;
    Integer x;
    mpz_ui_pow_ui(x.get_mpz_t(), static_cast<unsigned long>(d), static_cast<unsigned long>(r));
    s += x;
    if (d * d != t) {
      mpz_ui_pow_ui(x.get_mpz_t(), static_cast<unsigned long>(t / d), static_cast<unsigned long>(r));
      s += x;
    }
  }
  return s;
}

FourierExpansion eisenstein_q_expansion(const QuadField& field, int k, int terms) {
  if (k < 4 || k % 2 != 0) throw std::invalid_argument("eisenstein_q_expansion needs even k >= 4");
  if (terms < 1) throw std::invalid_argument("eisenstein_q_expansion needs terms >= 1");
  FourierExpansion f{field, 1, k, 1, Rational(terms - 1), {}};
  const Rational c = Rational(-2 * k) / bernoulli(k);
  f.coeffs.emplace(HermIndex{{Rational(0)}, {}}, Rational(1));
  for (int t = 1; t < terms; ++t) f.coeffs.emplace(HermIndex{{Rational(t)}, {}}, c * Rational(divisor_sigma(k - 1, t)));
  return f;
}

}  // namespace hermhecke
