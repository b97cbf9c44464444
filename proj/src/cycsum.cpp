#include "hermhecke/cycsum.hpp"

#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hermhecke {

namespace {

constexpr std::int64_t kMaxModulus = 1 << 20;

std::vector<Integer> poly_divide_exact(std::vector<Integer> num, const std::vector<Integer>& den) {
  // den is monic
  const std::size_t dn = den.size() - 1;
  std::vector<Integer> q(num.size() - dn, 0);
  for (std::size_t i = num.size(); i-- > dn;) {
    const Integer c = num[i];
    q[i - dn] = c;
    if (c == 0) continue;
    for (std::size_t j = 0; j <= dn; ++j) num[i - dn + j] -= c * den[j];
  }
  return q;
}

}  // namespace

std::vector<Integer> cyclotomic_polynomial(std::int64_t L) {
  if (L < 1) throw std::invalid_argument("cyclotomic polynomial needs L >= 1");
  static std::mutex mu;
  static std::map<std::int64_t, std::vector<Integer>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(L);
    if (it != cache.end()) return it->second;
  }
  // Φ_L = (x^L − 1) / ∏_{d | L, d < L} Φ_d
  std::vector<Integer> p(static_cast<std::size_t>(L) + 1, 0);
  p[0] = -1;
  p[static_cast<std::size_t>(L)] = 1;
  for (std::int64_t d = 1; d < L; ++d)
    if (L % d == 0) p = poly_divide_exact(p, cyclotomic_polynomial(d));
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(L, p);
  return p;
}

void CycSum::lift(std::int64_t L) {
  if (L == L_) return;
  if (L % L_ != 0) throw std::logic_error("CycSum lift to a non-multiple");
  if (L > kMaxModulus) throw std::invalid_argument("CycSum modulus too large");
  std::vector<Rational> c(static_cast<std::size_t>(L));
  const std::int64_t f = L / L_;
  for (std::int64_t j = 0; j < L_; ++j) c[static_cast<std::size_t>(j * f)] = c_[static_cast<std::size_t>(j)];
  c_ = std::move(c);
  L_ = L;
}

void CycSum::add_term(const Rational& coeff, const Rational& phase) {
  if (coeff == 0) return;
  // phase mod 1 = j / den
  const Integer& den = phase.get_den();
  if (!den.fits_slong_p() || den > kMaxModulus) throw std::invalid_argument("phase denominator too large");
  const std::int64_t d = den.get_si();
  lift(std::lcm(L_, d));
  Integer j;
  mpz_fdiv_r(j.get_mpz_t(), phase.get_num().get_mpz_t(), den.get_mpz_t());
  c_[static_cast<std::size_t>(j.get_si() * (L_ / d))] += coeff;
}

CycSum& CycSum::operator+=(const CycSum& o) {
  const std::int64_t L = std::lcm(L_, o.L_);
  lift(L);
  const std::int64_t f = L / o.L_;
  for (std::int64_t j = 0; j < o.L_; ++j) c_[static_cast<std::size_t>(j * f)] += o.c_[static_cast<std::size_t>(j)];
  return *this;
}

CycSum CycSum::scaled(const Rational& s) const {
  CycSum r = *this;
  for (auto& x : r.c_) x *= s;
  return r;
}

std::vector<Rational> CycSum::reduced() const {
  const std::vector<Integer> phi = cyclotomic_polynomial(L_);
  const std::size_t deg = phi.size() - 1;
  std::vector<Rational> r = c_;
  for (std::size_t i = r.size(); i-- > deg;) {
    const Rational c = r[i];
    if (c == 0) continue;
    for (std::size_t j = 0; j <= deg; ++j) r[i - deg + j] -= c * Rational(phi[j]);
  }
  r.resize(deg);
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

bool CycSum::is_rational() const { return reduced().size() <= 1; }

bool CycSum::is_zero() const { return reduced().empty(); }

Rational CycSum::to_rational() const {
  auto r = reduced();
  if (r.size() > 1) throw std::domain_error("cyclotomic sum is not rational: " + str());
  return r.empty() ? Rational(0) : r[0];
}

bool CycSum::operator==(const CycSum& o) const {
  CycSum d = o.scaled(-1);
  d += *this;
  return d.is_zero();
}

std::string CycSum::str() const {
  std::ostringstream os;
  bool first = true;
  for (std::int64_t j = 0; j < L_; ++j) {
    const Rational& c = c_[static_cast<std::size_t>(j)];
    if (c == 0) continue;
    if (!first) os << " + ";
    first = false;
    os << rational_to_string(c);
    if (j) os << "*z" << L_ << "^" << j;
  }
  return first ? "0" : os.str();
}

}  // namespace hermhecke
