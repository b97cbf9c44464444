#include "hermhecke/hecke.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "hermhecke/errors.hpp"
#include "hermhecke/lattice.hpp"

namespace hermhecke {

namespace {

using i128 = __int128;

constexpr std::int64_t kMaxSimilitude = std::int64_t{1} << 30;

void require_inert(const QuadField& field, std::int64_t q, const char* what) {
  for (const auto& [p, e] : factorize(q)) {
    (void)e;
    PrimeType t = classify_prime(field, p);
    if (t != PrimeType::inert)
      throw ScopeError(std::string(what) + ": similitude " + std::to_string(q) + " has the " + to_string(t) +
                       " prime " + std::to_string(p) + "; only inert primes are supported");
  }
}

std::int64_t ipow(std::int64_t p, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= p;
  return r;
}

Integer to_integer(std::int64_t x) { return Integer(static_cast<long>(x)); }

}  // namespace

// ---------------------------------------------------------------------------
// DoubleCosetKey

DoubleCosetKey DoubleCosetKey::make(const QuadField& field, std::vector<std::int64_t> d) {
  if (d.size() < 2 || d.size() % 2 != 0)
    throw std::invalid_argument("a key needs 2n divisors a_1..a_n, d_1..d_n with n >= 1");
  for (std::int64_t x : d)
    if (x < 1) throw std::invalid_argument("key divisors must be positive");
  const std::size_t n = d.size() / 2;
  const i128 q128 = static_cast<i128>(d[0]) * d[n];
  if (q128 > kMaxSimilitude) throw std::invalid_argument("similitude factor too large");
  const std::int64_t q = static_cast<std::int64_t>(q128);
  for (std::size_t j = 0; j < n; ++j)
    if (static_cast<i128>(d[j]) * d[n + j] != q128)
      throw std::invalid_argument("key violates a_j * d_j = q at j = " + std::to_string(j + 1));
  // a_1 | ... | a_n | d_n | ... | d_1
  std::vector<std::int64_t> e = d;
  std::reverse(e.begin() + static_cast<std::ptrdiff_t>(n), e.end());
  for (std::size_t i = 0; i + 1 < e.size(); ++i)
    if (e[i + 1] % e[i] != 0) throw std::invalid_argument("key violates the divisibility chain");
  require_inert(field, q, "double coset key");
  return DoubleCosetKey(std::move(d), q);
}

DoubleCosetKey DoubleCosetKey::identity(int n) {
  if (n < 1) throw std::invalid_argument("degree must be >= 1");
  return DoubleCosetKey(std::vector<std::int64_t>(static_cast<std::size_t>(2 * n), 1), 1);
}

std::vector<std::int64_t> DoubleCosetKey::elementary_divisors() const {
  std::vector<std::int64_t> e = div_;
  std::reverse(e.begin() + n(), e.end());
  return e;
}

bool DoubleCosetKey::is_prime_power() const { return q_ > 1 && factorize(q_).size() == 1; }

std::vector<std::pair<std::int64_t, DoubleCosetKey>> DoubleCosetKey::prime_parts() const {
  std::vector<std::pair<std::int64_t, DoubleCosetKey>> out;
  for (const auto& [p, e] : factorize(q_)) {
    std::vector<std::int64_t> part;
    for (std::int64_t x : div_) {
      std::int64_t y = 1;
      while (x % p == 0) {
        x /= p;
        y *= p;
      }
      part.push_back(y);
    }
    out.emplace_back(p, DoubleCosetKey(std::move(part), ipow(p, e)));
  }
  return out;
}

MatK DoubleCosetKey::diagonal_rep(const QuadField& field) const {
  std::vector<Integer> v;
  for (std::int64_t x : div_) v.push_back(to_integer(x));
  return MatK::diag_int(field, v);
}

bool DoubleCosetKey::operator<(const DoubleCosetKey& o) const {
  if (div_.size() != o.div_.size()) return div_.size() < o.div_.size();
  if (q_ != o.q_) return q_ < o.q_;
  return div_ < o.div_;
}

std::string DoubleCosetKey::str() const {
  std::ostringstream os;
  os << '(';
  for (int j = 0; j < n(); ++j) os << (j ? "," : "") << a(j);
  os << ';';
  for (int j = 0; j < n(); ++j) os << (j ? "," : "") << d(j);
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------------------
// HeckeElement

HeckeElement HeckeElement::identity(const QuadField& field, int n) {
  return single(field, DoubleCosetKey::identity(n));
}

HeckeElement HeckeElement::single(const QuadField& field, const DoubleCosetKey& key, const Rational& c) {
  HeckeElement e{field, key.n(), {}};
  if (c != 0) e.terms.emplace(key, c);
  return e;
}

HeckeElement HeckeElement::operator+(const HeckeElement& o) const {
  if (field != o.field || n != o.n) throw std::invalid_argument("Hecke elements of different field or degree");
  HeckeElement r = *this;
  for (const auto& [k, c] : o.terms) r.terms[k] += c;
  r.prune();
  return r;
}

HeckeElement HeckeElement::scaled(const Rational& s) const {
  HeckeElement r = *this;
  for (auto& [k, c] : r.terms) c *= s;
  r.prune();
  return r;
}

void HeckeElement::prune() {
  for (auto it = terms.begin(); it != terms.end();) {
    if (it->second == 0)
      it = terms.erase(it);
    else
      ++it;
  }
}

bool HeckeElement::operator==(const HeckeElement& o) const {
  return field == o.field && n == o.n && terms == o.terms;
}

std::string HeckeElement::str() const {
  if (terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, c] : terms) {
    if (!first) os << " + ";
    first = false;
    os << rational_to_string(c) << "*" << k.str();
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Invariants

DoubleCosetKey canonical_form(const MatK& M) {
  auto q = similitude_factor(M);
  if (!q) throw std::invalid_argument("canonical_form: matrix is not in any Delta_n(q)");
  if (*q > kMaxSimilitude) throw std::invalid_argument("similitude factor too large");
  const std::int64_t qq = q->get_si();
  require_inert(M.field(), qq, "canonical_form");
  const int dim = M.rows();
  DetDivChain ch = detdiv_chain(M);
  HERMHECKE_CHECK(static_cast<int>(ch.chain.size()) == dim, "similitude matrix is not of full rank");
  std::vector<std::int64_t> e;
  Integer prev = 1;
  for (const IdealHNF& I : ch.chain) {
    HERMHECKE_CHECK(I.is_rational_principal(), "determinantal divisor " + I.str() + " is not rational");
    const Integer& r = I.a();
    HERMHECKE_CHECK(r % prev == 0, "determinantal divisors do not form a chain");
    Integer ek = r / prev;
    HERMHECKE_CHECK(ek.fits_slong_p(), "elementary divisor overflow");
    e.push_back(ek.get_si());
    prev = r;
  }
  const int n = dim / 2;
  std::vector<std::int64_t> div(static_cast<std::size_t>(dim));
  for (int j = 0; j < n; ++j) {
    div[static_cast<std::size_t>(j)] = e[static_cast<std::size_t>(j)];
    div[static_cast<std::size_t>(n + j)] = e[static_cast<std::size_t>(dim - 1 - j)];
  }
  for (int j = 0; j < n; ++j)
    HERMHECKE_CHECK(div[static_cast<std::size_t>(j)] * div[static_cast<std::size_t>(n + j)] == qq,
                    "elementary divisors violate a_j d_j = q");
  return DoubleCosetKey::make(M.field(), std::move(div));
}

DoubleCosetKey inert_key_mod(const QuadField& field, const OkMatMod& M, std::int64_t q) {
  if (M.modulus() % q != 0) throw std::invalid_argument("inert_key_mod: matrix modulus is not a multiple of q");
  const int dim = M.dim();
  const int n = dim / 2;
  std::vector<std::int64_t> e(static_cast<std::size_t>(dim), 1);
  for (const auto& [p, ell] : factorize(q)) {
    const std::int64_t P = ipow(p, ell);
    std::vector<int> v = smith_valuations(M.reduced(P).z_row_module(P), 2 * dim, p, ell);
    for (int i = 0; i < dim; ++i) {
      // over an inert prime every O_K-elementary divisor appears twice over Z
      HERMHECKE_CHECK(v[static_cast<std::size_t>(2 * i)] == v[static_cast<std::size_t>(2 * i + 1)],
                      "unpaired Z-elementary divisors at an inert prime");
      e[static_cast<std::size_t>(i)] *= ipow(p, v[static_cast<std::size_t>(2 * i)]);
    }
  }
  std::vector<std::int64_t> div(static_cast<std::size_t>(dim));
  for (int j = 0; j < n; ++j) {
    div[static_cast<std::size_t>(j)] = e[static_cast<std::size_t>(j)];
    div[static_cast<std::size_t>(n + j)] = e[static_cast<std::size_t>(dim - 1 - j)];
  }
  try {
    return DoubleCosetKey::make(field, std::move(div));
  } catch (const std::invalid_argument& ex) {
    throw ConsistencyError(std::string("matrix is not in Delta_n(q): ") + ex.what());
  }
}

DoubleCosetKey t_key(const QuadField& field, int n, std::int64_t p) {
  std::vector<std::int64_t> d(static_cast<std::size_t>(2 * n), 1);
  for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(n + j)] = p;
  return DoubleCosetKey::make(field, d);
}

DoubleCosetKey t_square_key(const QuadField& field, int n, std::int64_t p, int j) {
  if (j < 0 || j >= n) throw std::invalid_argument("T_{n,j}(p^2) needs 0 <= j < n");
  std::vector<std::int64_t> d(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    d[static_cast<std::size_t>(i)] = i < j ? 1 : p;
    d[static_cast<std::size_t>(n + i)] = i < j ? p * p : p;
  }
  return DoubleCosetKey::make(field, d);
}

std::vector<HeckeElement> generators(const QuadField& field, int n, std::int64_t p) {
  if (n < 1) throw std::invalid_argument("degree must be >= 1");
  if (!is_prime(p)) throw std::invalid_argument("generators need a prime p");
  if (classify_prime(field, p) != PrimeType::inert)
    throw ScopeError("generators: p = " + std::to_string(p) + " is not inert");
  std::vector<HeckeElement> out;
  out.push_back(HeckeElement::single(field, t_key(field, n, p)));
  for (int j = 0; j < n; ++j) out.push_back(HeckeElement::single(field, t_square_key(field, n, p, j)));
  return out;
}

// ---------------------------------------------------------------------------
// Level enumeration
//
// A right coset of Delta_n(q) has a unique representative (A B; 0 D) with
// D the Hermite form of its row module, A = q conj(D)^{-tr} and B = X D / q,
// where X is Hermitian modulo q and X D = 0 modulo q.

namespace {

// a + b ω modulo q
struct Res {
  std::int64_t a, b;
};

struct RingMod {
  std::int64_t q, t, nrm;
  Res mul(Res x, Res y) const {
    const i128 bb = static_cast<i128>(x.b) * y.b;
    const i128 ra = static_cast<i128>(x.a) * y.a - bb * nrm;
    const i128 rb = static_cast<i128>(x.a) * y.b + static_cast<i128>(x.b) * y.a + (t ? bb : 0);
    return {red(ra), red(rb)};
  }
  Res add(Res x, Res y) const { return {red(static_cast<i128>(x.a) + y.a), red(static_cast<i128>(x.b) + y.b)}; }
  Res conj(Res x) const { return {red(static_cast<i128>(x.a) + t * x.b), red(-static_cast<i128>(x.b))}; }
  std::int64_t red(i128 v) const {
    i128 r = v % q;
    if (r < 0) r += q;
    return static_cast<std::int64_t>(r);
  }
};

struct DData {
  MatK D, A;
  std::vector<Res> d;  // D entries, row-major, exact (all lie in [0, q))
  std::vector<Res> a;  // A entries modulo q
};

}  // namespace

struct HeckeEngine::Level {
  std::int64_t p = 1;
  int ell = 0;
  std::int64_t q = 1;
  std::vector<DData> ds;
  struct Code {
    std::uint32_t d;
    std::vector<Res> x;  // X, row-major n×n
  };
  std::map<DoubleCosetKey, std::vector<Code>> groups;
};

HeckeEngine::HeckeEngine(const QuadField& field, int n, EnumerationOptions opts)
    : field_(field), n_(n), opts_(opts) {
  if (n < 1) throw std::invalid_argument("degree must be >= 1");
}

HeckeEngine::~HeckeEngine() = default;

namespace {

// Hermite forms D of O_K-submodules L with q O_K^n ⊆ L ⊆ O_K^n.
std::vector<DData> enumerate_d(const QuadField& field, int n, std::int64_t p, int ell, std::int64_t q) {
  std::vector<DData> out;
  std::vector<int> e(static_cast<std::size_t>(n), 0);
  const Rational qr(to_integer(q));
  while (true) {
    // positions above the diagonal, (i, j) with residues mod p^{e_j}
    std::vector<std::pair<int, int>> pos;
    std::vector<std::int64_t> mod;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < j; ++i) {
        pos.emplace_back(i, j);
        mod.push_back(ipow(p, e[static_cast<std::size_t>(j)]));
      }
    std::vector<std::int64_t> digits(2 * pos.size(), 0);
    while (true) {
      MatK D(field, n, n);
      for (int i = 0; i < n; ++i) D(i, i) = field.from_int(to_integer(ipow(p, e[static_cast<std::size_t>(i)])));
      for (std::size_t s = 0; s < pos.size(); ++s)
        D(pos[s].first, pos[s].second) = field.make(to_integer(digits[2 * s]), to_integer(digits[2 * s + 1]));
      MatK A = D.adjoint().inverse().scaled(qr);
      if (A.is_integral()) {
        DData dd{D, A, {}, {}};
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            dd.d.push_back({D(i, j).a().get_si(), D(i, j).b().get_si()});
            Integer ra, rb;
            mpz_fdiv_r(ra.get_mpz_t(), A(i, j).a().get_mpz_t(), to_integer(q).get_mpz_t());
            mpz_fdiv_r(rb.get_mpz_t(), A(i, j).b().get_mpz_t(), to_integer(q).get_mpz_t());
            dd.a.push_back({ra.get_si(), rb.get_si()});
          }
        out.push_back(std::move(dd));
      }
      std::size_t s = 0;
      for (; s < digits.size(); ++s) {
        if (++digits[s] < mod[s / 2]) break;
        digits[s] = 0;
      }
      if (s == digits.size()) break;
    }
    int k = 0;
    for (; k < n; ++k) {
      if (++e[static_cast<std::size_t>(k)] <= ell) break;
      e[static_cast<std::size_t>(k)] = 0;
    }
    if (k == n) break;
  }
  return out;
}

// Backtracking over Hermitian X mod q with X D = 0 mod q. Variables are the
// entries X_ij, i <= j, column by column; an entry of XD is tested as soon
// as every X value it needs is assigned.
class XSearch {
 public:
  XSearch(int n, const RingMod& R, const std::vector<Res>& d) : n_(n), R_(R), d_(d) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i) vars_.emplace_back(i, j);
    std::vector<int> step_of(static_cast<std::size_t>(n * n));
    for (std::size_t s = 0; s < vars_.size(); ++s) {
      auto [i, j] = vars_[s];
      step_of[static_cast<std::size_t>(i * n + j)] = static_cast<int>(s);
      step_of[static_cast<std::size_t>(j * n + i)] = static_cast<int>(s);
    }
    checks_.resize(vars_.size());
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        int last = 0;
        for (int i = 0; i <= c; ++i) last = std::max(last, step_of[static_cast<std::size_t>(r * n + i)]);
        checks_[static_cast<std::size_t>(last)].emplace_back(r, c);
      }
    x_.assign(static_cast<std::size_t>(n * n), Res{0, 0});
  }

  template <class F>
  void run(F&& emit) {
    rec(0, emit);
  }

 private:
  template <class F>
  void rec(std::size_t s, F& emit) {
    if (s == vars_.size()) {
      emit(x_);
      return;
    }
    auto [i, j] = vars_[s];
    const std::int64_t q = R_.q;
    if (i == j) {
      for (std::int64_t a = 0; a < q; ++a) {
        at(i, i) = {a, 0};
        if (ok(s)) rec(s + 1, emit);
      }
    } else {
      for (std::int64_t a = 0; a < q; ++a)
        for (std::int64_t b = 0; b < q; ++b) {
          at(i, j) = {a, b};
          at(j, i) = R_.conj({a, b});
          if (ok(s)) rec(s + 1, emit);
        }
    }
  }

  bool ok(std::size_t s) const {
    for (auto [r, c] : checks_[s]) {
      Res acc{0, 0};
      for (int i = 0; i <= c; ++i)
        acc = R_.add(acc, R_.mul(x_[static_cast<std::size_t>(r * n_ + i)], d_[static_cast<std::size_t>(i * n_ + c)]));
      if (acc.a != 0 || acc.b != 0) return false;
    }
    return true;
  }

  Res& at(int i, int j) { return x_[static_cast<std::size_t>(i * n_ + j)]; }

  int n_;
  RingMod R_;
  const std::vector<Res>& d_;
  std::vector<std::pair<int, int>> vars_;
  std::vector<std::vector<std::pair<int, int>>> checks_;
  std::vector<Res> x_;
};

// X is only Hermitian modulo q in the search; B = X D / q needs the lower
// triangle to be the exact conjugate of the upper one.
std::vector<Res> exact_hermitian(int n, const RingMod& R, std::vector<Res> x) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const Res u = x[static_cast<std::size_t>(j * n + i)];
      x[static_cast<std::size_t>(i * n + j)] = {u.a + R.t * u.b, -u.b};
    }
  return x;
}

// B = X D / q, computed exactly and reduced modulo q.
std::vector<Res> b_mod(int n, const RingMod& R, const std::vector<Res>& xin, const std::vector<Res>& d) {
  const std::vector<Res> x = exact_hermitian(n, R, xin);
  std::vector<Res> b(static_cast<std::size_t>(n * n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      i128 sa = 0, sb = 0;
      for (int i = 0; i <= c; ++i) {
        const Res u = x[static_cast<std::size_t>(r * n + i)], v = d[static_cast<std::size_t>(i * n + c)];
        const i128 bb = static_cast<i128>(u.b) * v.b;
        sa += static_cast<i128>(u.a) * v.a - bb * R.nrm;
        sb += static_cast<i128>(u.a) * v.b + static_cast<i128>(u.b) * v.a + (R.t ? bb : 0);
      }
      HERMHECKE_CHECK(sa % R.q == 0 && sb % R.q == 0, "X D is not divisible by q");
      b[static_cast<std::size_t>(r * n + c)] = {R.red(sa / R.q), R.red(sb / R.q)};
    }
  return b;
}

OkMatMod assemble_mod(const QuadField& field, int n, std::int64_t q, const std::vector<Res>& a,
                      const std::vector<Res>& b, const std::vector<Res>& d) {
  OkMatMod M(2 * n, q, field.omega_trace(), field.omega_norm());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i * n + j);
      M.a(i, j) = a[k].a;
      M.b(i, j) = a[k].b;
      M.a(i, n + j) = b[k].a;
      M.b(i, n + j) = b[k].b;
      M.a(n + i, n + j) = mod_floor(d[k].a, q);
      M.b(n + i, n + j) = mod_floor(d[k].b, q);
    }
  return M;
}

}  // namespace

HeckeEngine::Level& HeckeEngine::level(std::int64_t q) {
  auto it = levels_.find(q);
  if (it != levels_.end()) return *it->second;
  auto lv = std::make_unique<Level>();
  lv->q = q;
  if (q == 1) {
    DData dd{MatK::identity(field_, n_), MatK::identity(field_, n_), {}, {}};
    dd.d.assign(static_cast<std::size_t>(n_ * n_), Res{0, 0});
    for (int i = 0; i < n_; ++i) dd.d[static_cast<std::size_t>(i * n_ + i)] = {1, 0};
    dd.a = dd.d;
    lv->ds.push_back(dd);
    lv->groups[DoubleCosetKey::identity(n_)].push_back({0, std::vector<Res>(static_cast<std::size_t>(n_ * n_), Res{0, 0})});
    ++candidates_;
    return *levels_.emplace(q, std::move(lv)).first->second;
  }
  auto fac = factorize(q);
  if (fac.size() != 1) throw ScopeError("level enumeration needs a prime power, got " + std::to_string(q));
  lv->p = fac[0].first;
  lv->ell = fac[0].second;
  require_inert(field_, q, "right coset enumeration");
  lv->ds = enumerate_d(field_, n_, lv->p, lv->ell, q);

  const RingMod R{q, field_.omega_trace(), field_.omega_norm()};
  const std::size_t nd = lv->ds.size();
  std::vector<std::vector<std::pair<DoubleCosetKey, std::vector<Res>>>> found(nd);
  std::atomic<std::uint64_t> count{candidates_};
  std::atomic<bool> overflow{false};
  const std::uint64_t cap = opts_.cap;

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t di = first; di < nd && !overflow; di += stride) {
      const DData& dd = lv->ds[di];
      XSearch search(n_, R, dd.d);
      search.run([&](const std::vector<Res>& x) {
        if (overflow) return;
        if (++count > cap) {
          overflow = true;
          return;
        }
        OkMatMod M = assemble_mod(field_, n_, q, dd.a, b_mod(n_, R, x, dd.d), dd.d);
        found[di].emplace_back(inert_key_mod(field_, M, q), x);
      });
    }
  };

  const unsigned nt = std::max(1u, opts_.threads);
  if (nt == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    for (unsigned t = 0; t < nt; ++t)
      pool.emplace_back([&, t] {
        try {
          work(t, nt);
        } catch (...) {
          errs[t] = std::current_exception();
          overflow = true;
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }
  candidates_ = count.load();
  if (overflow)
    throw ResourceError("right coset enumeration at q = " + std::to_string(q) + " exceeded the cap of " +
                        std::to_string(cap) + " candidate matrices");
  // deterministic merge, in D order
  for (std::size_t di = 0; di < nd; ++di)
    for (auto& [key, x] : found[di]) lv->groups[key].push_back({static_cast<std::uint32_t>(di), std::move(x)});
  return *levels_.emplace(q, std::move(lv)).first->second;
}

RightCosetSet HeckeEngine::materialize(const Level& lv, const DoubleCosetKey& key) {
  RightCosetSet set{key, {}};
  auto it = lv.groups.find(key);
  if (it == lv.groups.end()) return set;
  const RingMod R{lv.q, field_.omega_trace(), field_.omega_norm()};
  const Rational inv_q(Integer(1), to_integer(lv.q));
  const MatK Z(field_, n_, n_);
  std::unordered_set<LatticeKey, LatticeKeyHash> seen;
  for (const auto& code : it->second) {
    const DData& dd = lv.ds[code.d];
    MatK X(field_, n_, n_);
    const std::vector<Res> x = exact_hermitian(n_, R, code.x);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const Res r = x[static_cast<std::size_t>(i * n_ + j)];
        X(i, j) = field_.make(to_integer(r.a), to_integer(r.b));
      }
    MatK B = (X * dd.D).scaled(inv_q);
    MatK M = MatK::from_blocks(dd.A, B, Z, dd.D);
    if (!seen.insert(row_lattice_key_unchecked(M, lv.q)).second) continue;
    set.reps.push_back(std::move(M));
  }
  return set;
}

void HeckeEngine::verify_closure(const RightCosetSet& set) {
  const std::int64_t q = set.key.q();
  std::unordered_set<LatticeKey, LatticeKeyHash> keys;
  std::vector<OkMatMod> reps;
  for (const MatK& M : set.reps) {
    reps.push_back(to_mod(M, q));
    keys.insert(hnf_mod(reps.back().z_row_module(q), 4 * n_, q));
  }
  HERMHECKE_CHECK(keys.size() == set.reps.size(), "right coset representatives are not distinct");
  for (const MatK& g : gamma_generators(field_, n_)) {
    OkMatMod gm = to_mod(g, q);
    for (const OkMatMod& R : reps) {
      OkMatMod P = R.mul(gm, q);
      HERMHECKE_CHECK(keys.count(hnf_mod(P.z_row_module(q), 4 * n_, q)),
                      "coset set for " + set.key.str() + " is not closed under right multiplication by Gamma_n");
    }
  }
  HERMHECKE_CHECK(within_coset_bound(set.reps.size(), q, n_), "coset count exceeds q^(8n^2)");
}

const RightCosetSet& HeckeEngine::right_cosets(const DoubleCosetKey& key) {
  if (key.n() != n_) throw std::invalid_argument("key degree does not match the engine");
  auto it = sets_.find(key);
  if (it != sets_.end()) return it->second;
  RightCosetSet set{key, {}};
  if (key.q() == 1 || key.is_prime_power()) {
    set = materialize(level(key.q()), key);
    HERMHECKE_CHECK(!set.reps.empty(), "no right cosets found for " + key.str());
  } else {
    // Coprime parts multiply coset by coset.
    auto parts = key.prime_parts();
    std::vector<MatK> acc = right_cosets(parts[0].second).reps;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto& next = right_cosets(parts[i].second).reps;
      std::vector<MatK> prod;
      prod.reserve(acc.size() * next.size());
      for (const MatK& x : acc)
        for (const MatK& y : next) prod.push_back(x * y);
      acc = std::move(prod);
    }
    std::unordered_set<LatticeKey, LatticeKeyHash> seen;
    for (MatK& M : acc) {
      HERMHECKE_CHECK(seen.insert(row_lattice_key_unchecked(M, key.q())).second,
                      "products of coprime coset representatives collide");
      set.reps.push_back(std::move(M));
    }
    for (const MatK& M : set.reps)
      HERMHECKE_CHECK(inert_key_mod(field_, to_mod(M, key.q()), key.q()) == key,
                      "product of coprime representatives left the expected double coset");
  }
  if (opts_.verify_closure) verify_closure(set);
  return sets_.emplace(key, std::move(set)).first->second;
}

std::size_t HeckeEngine::coset_count(const DoubleCosetKey& key) {
  if (key.n() != n_) throw std::invalid_argument("key degree does not match the engine");
  if (key.q() == 1 || key.is_prime_power()) {
    Level& lv = level(key.q());
    auto it = lv.groups.find(key);
    HERMHECKE_CHECK(it != lv.groups.end(), "key " + key.str() + " does not occur at its level");
    return it->second.size();
  }
  std::size_t c = 1;
  for (const auto& part : key.prime_parts()) c *= coset_count(part.second);
  return c;
}

std::map<DoubleCosetKey, std::size_t> HeckeEngine::level_keys(std::int64_t q) {
  std::map<DoubleCosetKey, std::size_t> out;
  for (const auto& [k, v] : level(q).groups) out.emplace(k, v.size());
  return out;
}

HeckeElement HeckeEngine::product(const HeckeElement& x, const HeckeElement& y) {
  if (x.field != field_ || y.field != field_ || x.n != n_ || y.n != n_)
    throw std::invalid_argument("Hecke product of elements from a different field or degree");
  HeckeElement out{field_, n_, {}};
  for (const auto& [k1, c1] : x.terms)
    for (const auto& [k2, c2] : y.terms) {
      const i128 Q128 = static_cast<i128>(k1.q()) * k2.q();
      if (Q128 > kMaxSimilitude) throw std::invalid_argument("similitude of the product is too large");
      const std::int64_t Q = static_cast<std::int64_t>(Q128);
      std::vector<OkMatMod> r1, r2;
      for (const MatK& M : right_cosets(k1).reps) r1.push_back(to_mod(M, Q));
      for (const MatK& M : right_cosets(k2).reps) r2.push_back(to_mod(M, Q));
      std::map<DoubleCosetKey, std::uint64_t> hits;
      for (const OkMatMod& a : r1)
        for (const OkMatMod& b : r2) ++hits[inert_key_mod(field_, a.mul(b, Q), Q)];
      for (const auto& [key, h] : hits) {
        const std::size_t cnt = coset_count(key);
        HERMHECKE_CHECK(h % cnt == 0, "product multiplicity " + std::to_string(h) + "/" + std::to_string(cnt) +
                                          " for " + key.str() + " is not integral");
        out.terms[key] += c1 * c2 * Rational(to_integer(static_cast<std::int64_t>(h / cnt)));
      }
    }
  out.prune();
  return out;
}

PhiResult HeckeEngine::phi(const DoubleCosetKey& key, int k) {
  if (n_ < 2) throw std::invalid_argument("phi_map needs degree n >= 2");
  const std::int64_t q = key.q();
  const int m = n_ - 1;
  if (!lower_) lower_ = std::make_unique<HeckeEngine>(field_, m, opts_);
  struct Image {
    Rational weight;
    DoubleCosetKey key;
  };
  std::map<LatticeKey, Image> images;
  Rational total = 0;
  const MatK Z(field_, m, m);
  for (const MatK& M : right_cosets(key).reps) {
    const MatK A = M.block(0, 0, n_, n_), B = M.block(0, n_, n_, n_), D = M.block(n_, n_, n_, n_);
    bool tri = M.block(n_, 0, n_, n_).is_zero();
    for (int i = 0; i < m; ++i) tri = tri && A(i, m).is_zero() && D(m, i).is_zero();
    const KElem& delta = D(m, m);
    if (!tri || !delta.is_rational() || delta.to_rational() <= 0)
      throw std::invalid_argument("phi_map: representative is not in triangular shape");
    Rational w = 1;
    const Rational dl = delta.to_rational();
    for (int i = 0; i < std::abs(k); ++i) w *= dl;
    if (k > 0) w = 1 / w;
    total += w;
    MatK M1 = MatK::from_blocks(A.block(0, 0, m, m), B.block(0, 0, m, m), Z, D.block(0, 0, m, m));
    auto s = similitude_factor(M1);
    HERMHECKE_CHECK(s && *s == q, "leading block is not in Delta_{n-1}(q)");
    LatticeKey lk = row_lattice_key_unchecked(M1, q);
    auto it = images.find(lk);
    if (it == images.end())
      images.emplace(lk, Image{w, inert_key_mod(field_, to_mod(M1, q), q)});
    else
      it->second.weight += w;
  }
  std::map<DoubleCosetKey, std::pair<Rational, std::size_t>> per_key;
  for (const auto& [lk, img] : images) {
    auto [it, fresh] = per_key.emplace(img.key, std::make_pair(img.weight, std::size_t{0}));
    HERMHECKE_CHECK(fresh || it->second.first == img.weight,
                    "phi weights are not constant on the double coset " + img.key.str());
    ++it->second.second;
  }
  PhiResult res{HeckeElement{field_, m, {}}, std::nullopt, total};
  for (const auto& [k2, wc] : per_key) {
    HERMHECKE_CHECK(wc.second == lower_->coset_count(k2),
                    "phi image does not cover the double coset " + k2.str());
    res.image.terms[k2] = wc.first;
  }
  res.image.prune();
  if (res.image.terms.size() == 1) res.scalar = res.image.terms.begin()->second;
  return res;
}

// ---------------------------------------------------------------------------

RightCosetSet enumerate_right_cosets(const QuadField& field, const DoubleCosetKey& key,
                                     const EnumerationOptions& opts) {
  if (key.q() != 1 && !key.is_prime_power())
    throw ScopeError("enumerate_right_cosets needs a prime-power similitude; " + std::to_string(key.q()) +
                     " has several prime factors (use hecke_product)");
  HeckeEngine eng(field, key.n(), opts);
  return eng.right_cosets(key);
}

HeckeElement hecke_product(const HeckeElement& x, const HeckeElement& y, const EnumerationOptions& opts) {
  HeckeEngine eng(x.field, x.n, opts);
  return eng.product(x, y);
}

PhiResult phi_map(const QuadField& field, const DoubleCosetKey& key, int k, const EnumerationOptions& opts) {
  HeckeEngine eng(field, key.n(), opts);
  return eng.phi(key, k);
}

InertSplit split_inert_rational(const QuadField& field, const DetDivChain& chain) {
  InertSplit out;
  for (const IdealHNF& I : chain.chain) {
    Integer c = I.content();
    if (!c.fits_slong_p()) throw std::invalid_argument("ideal content too large to factor");
    Integer a = 1;
    for (const auto& [p, e] : factorize(c.get_si()))
      if (classify_prime(field, p) == PrimeType::inert)
        for (int i = 0; i < e; ++i) a *= static_cast<long>(p);
    out.complement.push_back(ideal_divide_integer(field, I, a));
    out.inert.push_back(a);
  }
  return out;
}

bool chain_multiplicative(const QuadField& field, const DetDivChain& x, const DetDivChain& y,
                          const DetDivChain& xy) {
  if (x.chain.size() != y.chain.size() || x.chain.size() != xy.chain.size()) return false;
  for (std::size_t k = 0; k < x.chain.size(); ++k)
    if (ideal_product(field, x.chain[k], y.chain[k]) != xy.chain[k]) return false;
  return true;
}

bool within_coset_bound(std::size_t count, std::int64_t q, int n) {
  Integer bound;
  mpz_pow_ui(bound.get_mpz_t(), to_integer(q).get_mpz_t(), static_cast<unsigned long>(8 * n * n));
  return Integer(static_cast<unsigned long>(count)) <= bound;
}

}  // namespace hermhecke
