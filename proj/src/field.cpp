#include "hermhecke/field.hpp"

#include <sstream>
#include <stdexcept>

namespace hermhecke {

std::string to_string(PrimeType t) {
  switch (t) {
    case PrimeType::split: return "split";
    case PrimeType::inert: return "inert";
    case PrimeType::ramified: return "ramified";
  }
  return "?";
}

QuadField QuadField::make(std::int64_t m) {
  if (m < 1) throw std::invalid_argument("field parameter m must be >= 1, got " + std::to_string(m));
  if (!is_squarefree(m))
    throw std::invalid_argument("field parameter m must be squarefree, got " + std::to_string(m));
  if (m % 4 == 3) return QuadField(m, -m, OmegaKind::half_integral);
  return QuadField(m, -4 * m, OmegaKind::sqrt_minus_m);
}

QuadField QuadField::with_class_number(int h) const {
  QuadField f = *this;
  f.h_ = h;
  return f;
}

KElem QuadField::zero() const { return KElem(m_, 0, 0); }
KElem QuadField::one() const { return KElem(m_, 1, 0); }
KElem QuadField::omega() const { return KElem(m_, 0, 1); }
KElem QuadField::from_int(const Integer& a) const { return KElem(m_, a, 0); }
KElem QuadField::from_rational(const Rational& r) const {
  return KElem(m_, r.get_num(), 0, r.get_den());
}
KElem QuadField::make(const Integer& a, const Integer& b) const { return KElem(m_, a, b); }

KElem QuadField::sqrt_disc() const {
  // (1+√−m)/2 = ω gives √−m = 2ω − 1 and d_K = −m; otherwise √d_K = 2√−m = 2ω.
  if (kind_ == OmegaKind::half_integral) return KElem(m_, -1, 2);
  return KElem(m_, 0, 2);
}

std::vector<KElem> QuadField::units() const {
  std::vector<KElem> u{one(), -one()};
  if (m_ == 1) {
    u.push_back(omega());
    u.push_back(-omega());
  } else if (m_ == 3) {
    // ω is a primitive sixth root of unity here.
    KElem w = omega();
    KElem w2 = w * w;
    u.push_back(w);
    u.push_back(-w);
    u.push_back(w2);
    u.push_back(-w2);
  }
  return u;
}

// ---------------------------------------------------------------------------

KElem::KElem(std::int64_t m, Integer a, Integer b, Integer den)
    : m_(m), a_(std::move(a)), b_(std::move(b)), den_(std::move(den)) {
  if (sgn(den_) == 0) throw std::domain_error("zero denominator");
  reduce();
}

void KElem::reduce() {
  if (den_ == 1) return;
  if (sgn(den_) < 0) {
    den_ = -den_;
    a_ = -a_;
    b_ = -b_;
  }
  Integer g = gcd(a_, b_);
  g = gcd(g, den_);
  if (g != 1) {
    mpz_divexact(a_.get_mpz_t(), a_.get_mpz_t(), g.get_mpz_t());
    mpz_divexact(b_.get_mpz_t(), b_.get_mpz_t(), g.get_mpz_t());
    mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
  }
}

void KElem::check_same(const KElem& o) const {
  if (m_ != o.m_)
    throw std::invalid_argument("mixed-field operands: Q(sqrt(-" + std::to_string(m_) +
                                ")) vs Q(sqrt(-" + std::to_string(o.m_) + "))");
}

Rational KElem::coord_a() const {
  Rational r(a_, den_);
  r.canonicalize();
  return r;
}

Rational KElem::coord_b() const {
  Rational r(b_, den_);
  r.canonicalize();
  return r;
}

Rational KElem::to_rational() const {
  if (!is_rational()) throw std::domain_error("element " + str() + " is not rational");
  return coord_a();
}

KElem KElem::conj() const {
  // conj(ω) = t − ω
  KElem r = *this;
  if (m_ % 4 == 3) r.a_ += b_;
  r.b_ = -b_;
  return r;
}

Rational KElem::norm() const {
  const bool half = m_ % 4 == 3;
  const Integer nrm = half ? Integer((1 + m_) / 4) : Integer(m_);
  Integer v = a_ * a_ + nrm * b_ * b_;
  if (half) v += a_ * b_;
  Rational r(v, den_ * den_);
  r.canonicalize();
  return r;
}

Rational KElem::trace() const {
  Integer v = 2 * a_;
  if (m_ % 4 == 3) v += b_;
  Rational r(v, den_);
  r.canonicalize();
  return r;
}

KElem KElem::inverse() const {
  if (is_zero()) throw std::domain_error("division by zero in K");
  Rational n = norm();
  KElem c = conj();
  return c.scaled(1 / n);
}

KElem& KElem::operator+=(const KElem& o) {
  check_same(o);
  if (den_ == o.den_) {
    a_ += o.a_;
    b_ += o.b_;
  } else {
    a_ = a_ * o.den_ + o.a_ * den_;
    b_ = b_ * o.den_ + o.b_ * den_;
    den_ *= o.den_;
  }
  reduce();
  return *this;
}

KElem& KElem::operator-=(const KElem& o) {
  check_same(o);
  if (den_ == o.den_) {
    a_ -= o.a_;
    b_ -= o.b_;
  } else {
    a_ = a_ * o.den_ - o.a_ * den_;
    b_ = b_ * o.den_ - o.b_ * den_;
    den_ *= o.den_;
  }
  reduce();
  return *this;
}

KElem& KElem::operator*=(const KElem& o) {
  check_same(o);
  const bool half = m_ % 4 == 3;
  const long nrm = static_cast<long>(half ? (1 + m_) / 4 : m_);
  Integer bb = b_ * o.b_;
  Integer na = a_ * o.a_ - bb * nrm;
  Integer nb = a_ * o.b_ + o.a_ * b_;
  if (half) nb += bb;
  a_ = std::move(na);
  b_ = std::move(nb);
  if (o.den_ != 1) den_ *= o.den_;
  reduce();
  return *this;
}

KElem& KElem::operator/=(const KElem& o) {
  check_same(o);
  return *this *= o.inverse();
}

KElem KElem::operator-() const {
  KElem r = *this;
  r.a_ = -a_;
  r.b_ = -b_;
  return r;
}

KElem KElem::scaled(const Rational& r) const {
  return KElem(m_, a_ * r.get_num(), b_ * r.get_num(), den_ * r.get_den());
}

bool KElem::operator<(const KElem& o) const {
  if (m_ != o.m_) return m_ < o.m_;
  if (den_ != o.den_) return den_ < o.den_;
  if (a_ != o.a_) return a_ < o.a_;
  return b_ < o.b_;
}

std::string KElem::str() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const KElem& x) {
  const bool frac = x.den() != 1;
  if (frac) os << "(";
  if (sgn(x.b()) == 0) {
    os << x.a();
  } else {
    if (sgn(x.a()) != 0) os << x.a() << (sgn(x.b()) > 0 ? "+" : "-");
    else if (sgn(x.b()) < 0) os << "-";
    Integer ab = abs(x.b());
    if (ab != 1) os << ab << "*";
    os << "w";
  }
  if (frac) os << ")/" << x.den();
  return os;
}

// ---------------------------------------------------------------------------

int kronecker(const Integer& a, const Integer& n) { return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t()); }

int chi(const QuadField& field, const Integer& n) { return kronecker(Integer(field.disc()), n); }

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::int64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

bool is_squarefree(std::int64_t n) {
  if (n < 1) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % (d * d) == 0) return false;
  return true;
}

std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t n) {
  std::vector<std::pair<std::int64_t, int>> out;
  if (n < 0) n = -n;
  for (std::int64_t d = 2; d * d <= n; ++d) {
    int e = 0;
    while (n % d == 0) {
      n /= d;
      ++e;
    }
    if (e) out.emplace_back(d, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

PrimeType classify_prime(const QuadField& field, std::int64_t p) {
  if (!is_prime(p)) throw std::invalid_argument(std::to_string(p) + " is not prime");
  int c = chi(field, p);
  if (c == 0) return PrimeType::ramified;
  return c > 0 ? PrimeType::split : PrimeType::inert;
}

Rational abs_upper_bound(const KElem& z) {
  Rational nrm = z.norm();
  Integer pq = nrm.get_num() * nrm.get_den();
  Integer s;
  mpz_sqrt(s.get_mpz_t(), pq.get_mpz_t());
  if (s * s < pq) s += 1;
  Rational r(s, nrm.get_den());
  r.canonicalize();
  return r;
}

std::string rational_to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Rational rational_from_string(const std::string& s) {
  Rational r;
  if (s.empty() || r.set_str(s, 10) != 0 || sgn(r.get_den()) == 0)
    throw std::invalid_argument("malformed rational '" + s + "'");
  r.canonicalize();
  return r;
}

}  // namespace hermhecke
