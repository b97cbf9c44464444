#include "hermhecke/ideal.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "hermhecke/errors.hpp"

namespace hermhecke {

namespace {

Integer floor_mod(const Integer& x, const Integer& m) {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
  return r;
}

void require_integral(const KElem& g) {
  if (!g.is_integral()) throw std::invalid_argument("ideal generator " + g.str() + " is not in O_K");
}

}  // namespace

IdealHNF::IdealHNF(const QuadField& field, Integer a, Integer b, Integer c)
    : m_(field.m()), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (sgn(a_) <= 0 || sgn(c_) <= 0) throw std::invalid_argument("ideal HNF needs a, c > 0");
  b_ = floor_mod(b_, a_);
  if (!mpz_divisible_p(a_.get_mpz_t(), c_.get_mpz_t()) || !mpz_divisible_p(b_.get_mpz_t(), c_.get_mpz_t()))
    throw std::invalid_argument("ideal HNF needs c | a and c | b");
  // ω-stability: ω·a and ω·(b + cω) must lie in the lattice.
  for (const KElem& g : z_basis()) {
    if (!contains(g * field.omega()))
      throw std::invalid_argument("lattice " + str() + " is not an O_K-module");
  }
}

std::vector<KElem> IdealHNF::z_basis() const { return {KElem(m_, a_, 0), KElem(m_, b_, c_)}; }

bool IdealHNF::contains(const KElem& x) const {
  if (x.field_m() != m_) throw std::invalid_argument("mixed-field ideal membership");
  if (!x.is_integral()) return false;
  if (!mpz_divisible_p(x.b().get_mpz_t(), c_.get_mpz_t())) return false;
  Integer t = x.b() / c_;
  Integer rest = x.a() - t * b_;
  return mpz_divisible_p(rest.get_mpz_t(), a_.get_mpz_t());
}

bool IdealHNF::is_rational_principal() const { return a_ == c_ && sgn(b_) == 0; }

Integer IdealHNF::content() const {
  Integer g = gcd(a_, b_);
  return gcd(g, c_);
}

std::string IdealHNF::str() const {
  std::ostringstream os;
  os << "(" << a_ << "," << b_ << "," << c_ << ")";
  return os.str();
}

IdealHNF ideal_from_generators(const QuadField& field, const std::vector<KElem>& gens) {
  // Z-lattice spanned by g and ω·g; reduce to {(a,0), (b,c)}.
  Integer a = 0, pb = 0, pc = 0;
  auto add = [&](Integer x, Integer y) {
    if (sgn(y) != 0) {
      if (sgn(pc) == 0) {
        pb = x;
        pc = y;
        if (sgn(pc) < 0) {
          pb = -pb;
          pc = -pc;
        }
        return;
      }
      Integer g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), pc.get_mpz_t(), y.get_mpz_t());
      Integer nb = s * pb + t * x;
      // the complementary combination has zero ω-coordinate
      Integer rest = (pc / g) * x - (y / g) * pb;
      pb = std::move(nb);
      pc = g;
      x = std::move(rest);
    }
    a = gcd(a, x);
    if (sgn(a) != 0 && sgn(pc) != 0) pb = floor_mod(pb, a);
  };
  bool any = false;
  for (const KElem& g : gens) {
    if (g.field_m() != field.m()) throw std::invalid_argument("mixed-field ideal generators");
    require_integral(g);
    if (g.is_zero()) continue;
    any = true;
    KElem wg = g * field.omega();
    add(g.a(), g.b());
    add(wg.a(), wg.b());
  }
  if (!any) throw std::invalid_argument("the zero ideal is not representable");
  HERMHECKE_CHECK(sgn(a) > 0 && sgn(pc) > 0, "ideal lattice is not of full rank");
  return IdealHNF(field, a, pb, pc);
}

IdealHNF unit_ideal(const QuadField& field) { return IdealHNF(field, 1, 0, 1); }

IdealHNF principal_ideal(const QuadField& field, const KElem& g) {
  return ideal_from_generators(field, {g});
}

IdealHNF ideal_product(const QuadField& field, const IdealHNF& x, const IdealHNF& y) {
  std::vector<KElem> gens;
  for (const KElem& u : x.z_basis())
    for (const KElem& v : y.z_basis()) gens.push_back(u * v);
  return ideal_from_generators(field, gens);
}

IdealHNF ideal_sum(const QuadField& field, const IdealHNF& x, const IdealHNF& y) {
  std::vector<KElem> gens = x.z_basis();
  for (const KElem& v : y.z_basis()) gens.push_back(v);
  return ideal_from_generators(field, gens);
}

bool ideal_divides(const IdealHNF& x, const IdealHNF& y) {
  for (const KElem& v : y.z_basis())
    if (!x.contains(v)) return false;
  return true;
}

IdealHNF ideal_conjugate(const QuadField& field, const IdealHNF& x) {
  std::vector<KElem> gens;
  for (const KElem& v : x.z_basis()) gens.push_back(v.conj());
  return ideal_from_generators(field, gens);
}

IdealHNF ideal_divide_integer(const QuadField& field, const IdealHNF& x, const Integer& r) {
  if (sgn(r) <= 0 || !mpz_divisible_p(x.content().get_mpz_t(), r.get_mpz_t()))
    throw std::invalid_argument("ideal " + x.str() + " is not divisible by " + r.get_str());
  return IdealHNF(field, x.a() / r, x.b() / r, x.c() / r);
}

bool ideals_coprime(const QuadField& field, const IdealHNF& x, const IdealHNF& y) {
  return ideal_sum(field, x, y).norm() == 1;
}

// ---------------------------------------------------------------------------

bool QuadForm::is_reduced() const {
  Integer ab = abs(beta);
  if (!(ab <= alpha && alpha <= gamma)) return false;
  if ((ab == alpha || alpha == gamma) && sgn(beta) < 0) return false;
  return true;
}

bool QuadForm::operator<(const QuadForm& o) const {
  if (alpha != o.alpha) return alpha < o.alpha;
  if (beta != o.beta) return beta < o.beta;
  return gamma < o.gamma;
}

QuadForm reduce_form(QuadForm f) {
  if (sgn(f.alpha) <= 0 || sgn(f.gamma) <= 0 || sgn(f.disc()) >= 0)
    throw std::invalid_argument("form reduction needs a positive definite form");
  while (true) {
    // normalise β into (−α, α]
    Integer two_a = 2 * f.alpha;
    Integer r = floor_mod(f.beta + f.alpha, two_a) - f.alpha;
    if (r == -f.alpha) r = f.alpha;
    if (r != f.beta) {
      Integer s = (r - f.beta) / two_a;  // x ↦ x + s·y
      f.gamma = f.alpha * s * s + f.beta * s + f.gamma;
      f.beta = r;
    }
    if (f.alpha > f.gamma) {
      std::swap(f.alpha, f.gamma);
      f.beta = -f.beta;
      continue;
    }
    if (f.alpha == f.gamma && sgn(f.beta) < 0) f.beta = -f.beta;
    return f;
  }
}

std::vector<QuadForm> reduced_forms(const QuadField& field) {
  const std::int64_t d = field.disc();
  std::vector<QuadForm> out;
  for (std::int64_t a = 1; 3 * a * a <= -d; ++a) {
    for (std::int64_t b = -a; b <= a; ++b) {
      std::int64_t num = b * b - d;
      if (num % (4 * a) != 0) continue;
      std::int64_t c = num / (4 * a);
      QuadForm f{a, b, c};
      if (!f.is_reduced()) continue;
      Integer g = gcd(gcd(f.alpha, f.beta), f.gamma);
      if (g != 1) continue;
      out.push_back(f);
    }
  }
  std::sort(out.begin(), out.end());
  HERMHECKE_CHECK(!out.empty() && out.front().alpha == 1, "principal form missing");
  return out;
}

int class_number(const QuadField& field) { return static_cast<int>(reduced_forms(field).size()); }

QuadForm ideal_to_form(const QuadField& field, const IdealHNF& ideal) {
  // N(x·a + y·(b + cω)) / N(I)
  const KElem w = field.make(ideal.b(), ideal.c());
  const Integer tr = w.trace().get_num();
  const Integer nm = w.norm().get_num();
  const Integer& a = ideal.a();
  const Integer& c = ideal.c();
  QuadForm f{a / c, tr / c, nm / (a * c)};
  HERMHECKE_CHECK(f.alpha * c == a && f.beta * c == tr && f.gamma * a * c == nm,
                  "ideal form has non-integral coefficients");
  HERMHECKE_CHECK(f.disc() == field.disc(), "ideal form has the wrong discriminant");
  return f;
}

ClassRepSet class_representatives(const QuadField& field, std::optional<std::int64_t> avoid_p) {
  const std::int64_t d = field.disc();
  if (avoid_p) {
    const std::int64_t p = *avoid_p;
    if (d == -4 || d == -8)
      throw std::invalid_argument("hypothesis d_K not in {-4,-8} violated (d_K = " + std::to_string(d) + ")");
    if (p % 2 == 0 || !is_prime(p))
      throw std::invalid_argument("hypothesis 'avoid_p is an odd prime' violated (p = " + std::to_string(p) + ")");
    if (d % p != 0)
      throw std::invalid_argument("hypothesis 'avoid_p divides d_K' violated (p = " + std::to_string(p) +
                                  ", d_K = " + std::to_string(d) + ")");
  }
  ClassRepSet out;
  out.avoided_prime = avoid_p;
  out.N = 1;
  const KElem sd = field.sqrt_disc();
  for (const QuadForm& f : reduced_forms(field)) {
    ClassRep rep{field.zero(), f, false, 1};
    KElem num = field.from_int(f.beta) + sd;
    if (avoid_p && mpz_divisible_ui_p(f.alpha.get_mpz_t(), static_cast<unsigned long>(*avoid_p))) {
      rep.inverted = true;
      rep.u = field.from_int(2 * f.alpha) / num;
      rep.n_j = (f.beta * f.beta - d) / *avoid_p;
      HERMHECKE_CHECK((rep.u * field.from_int(rep.n_j)).is_integral(), "N_j*u_j* is not integral");
      HERMHECKE_CHECK(!mpz_divisible_ui_p(rep.n_j.get_mpz_t(), static_cast<unsigned long>(*avoid_p)),
                      "avoided prime divides N_j");
    } else {
      rep.u = num / field.from_int(2 * f.alpha);
      rep.n_j = rep.u.den();
    }
    out.N *= rep.n_j;
    out.reps.push_back(std::move(rep));
  }
  return out;
}

IdealHNF rep_ideal(const QuadField& field, const ClassRep& rep) {
  KElem nj = field.from_int(rep.n_j);
  return ideal_from_generators(field, {rep.u * nj, nj});
}

int ideal_class_index(const QuadField& field, const IdealHNF& ideal, const ClassRepSet& reps) {
  QuadForm f = reduce_form(ideal_to_form(field, ideal));
  for (std::size_t j = 0; j < reps.reps.size(); ++j)
    if (reps.reps[j].form == f) return static_cast<int>(j) + 1;
  throw ConsistencyError("reduced form of ideal " + ideal.str() + " not among the class representatives");
}

std::int64_t find_inert_prime(const QuadField& field, std::int64_t modulus, std::int64_t search_bound,
                              std::int64_t min_p) {
  if (modulus < 1) throw std::invalid_argument("modulus must be >= 1");
  for (std::int64_t p = std::max<std::int64_t>(min_p, 2); p <= search_bound; ++p) {
    if ((p - 1) % modulus != 0 || !is_prime(p)) continue;
    if (chi(field, p) == -1) return p;
  }
  InertPrimeHypotheses h = inert_prime_hypotheses(field, modulus);
  throw SearchExhausted("no inert prime p = 1 mod " + std::to_string(modulus) + " up to " +
                        std::to_string(search_bound) + " (existence hypotheses " +
                        (h.holds ? "hold" : "fail") + ": " + h.detail + ")");
}

InertPrimeHypotheses inert_prime_hypotheses(const QuadField& field, std::int64_t modulus) {
  const std::int64_t d = field.disc();
  if (d == -4 || d == -8) return {false, "d_K = " + std::to_string(d) + " is excluded"};
  for (auto [p, e] : factorize(d)) {
    if (p % 2 == 1 && modulus % p != 0)
      return {true, "odd prime " + std::to_string(p) + " divides d_K but not the modulus"};
  }
  return {false, "every odd prime divisor of d_K divides the modulus"};
}

}  // namespace hermhecke
