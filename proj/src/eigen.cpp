#include "hermhecke/eigen.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "hermhecke/errors.hpp"

namespace hermhecke {

namespace {

Rational rpow(const Rational& x, int e) {
  Rational r = 1;
  for (int i = 0; i < std::abs(e); ++i) r *= x;
  return e < 0 ? Rational(1 / r) : r;
}

void require_inert_prime(const QuadField& field, std::int64_t p) {
  if (!is_prime(p)) throw std::invalid_argument("p = " + std::to_string(p) + " is not prime");
  if (classify_prime(field, p) != PrimeType::inert) throw ScopeError("p = " + std::to_string(p) + " is not inert");
}

}  // namespace

Rational eigenvalue_formula(const QuadField& field, int n, int k, std::int64_t p) {
  if (n < 1) throw std::invalid_argument("eigenvalue_formula needs n >= 1");
  require_inert_prime(field, p);
  const Rational pr(Integer(static_cast<long>(p)));
  Rational l = 1;
  for (int j = 1; j <= n; ++j) l *= rpow(pr, 2 * j - 1 - k) + 1;
  return l;
}

bool CuspBound::admits(const Rational& lambda) const {
  return lambda * lambda <= decay_sq * Rational(count * count);
}

bool CuspBound::below_one() const { return decay_sq * Rational(count * count) < 1; }

CuspBound cusp_bound(const QuadField& field, int n, int k, std::int64_t p) {
  if (n < 1) throw std::invalid_argument("cusp_bound needs n >= 1");
  require_inert_prime(field, p);
  const Rational pr(Integer(static_cast<long>(p)));
  CuspBound b{rpow(pr, -k * n), 1, std::nullopt};
  for (int j = 1; j <= n; ++j) {
    Integer x;
    mpz_ui_pow_ui(x.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(2 * j - 1));
    b.count *= x + 1;
  }
  if ((k * n) % 2 == 0) b.value = rpow(pr, -k * n / 2) * Rational(b.count);
  return b;
}

EigenReport eigen_check(const FourierExpansion& f, const HeckeElement& e, int k, HeckeEngine& engine) {
  EigenReport r;
  FourierExpansion g = hecke_act(f, e, k, engine);
  r.certified_bound = g.trunc;
  if (g.trunc < 0) {
    r.detail = "empty certified range";
    return r;
  }
  std::optional<HermIndex> pivot;
  for (const auto& [T, a] : f.coeffs)
    if (a != 0 && T.trace() <= g.trunc) {
      pivot = T;
      break;
    }
  if (!pivot) {
    r.detail = "f vanishes on the certified range";
    return r;
  }
  const Rational lambda = g.coeff(*pivot) / f.coeff(*pivot);
  // every certified index carried by f or g
  std::map<HermIndex, bool> idx;
  for (const auto& [T, a] : f.coeffs)
    if (T.trace() <= g.trunc) idx[T] = true;
  for (const auto& [T, a] : g.coeffs) idx[T] = true;
  for (const auto& [T, unused] : idx) {
    (void)unused;
    ++r.checked_indices;
    if (g.coeff(T) != lambda * f.coeff(T)) {
      std::ostringstream os;
      os << "at " << T.str() << ": f|T = " << rational_to_string(g.coeff(T)) << " but lambda*f = "
         << rational_to_string(lambda * f.coeff(T));
      r.detail = os.str();
      return r;
    }
  }
  r.lambda = lambda;
  r.consistent = true;
  return r;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::skipped:
      return "skipped";
  }
  return "?";
}

std::optional<std::string> EisensteinCertificate::first_failure() const {
  for (const auto& h : hypotheses)
    if (h.status == CheckStatus::fail) return h.name;
  return std::nullopt;
}

EisensteinCertificate certify_eisenstein(const FourierExpansion& f, const QuadField& field, int k, std::int64_t p,
                                         const ClassRepSet& reps, const EnumerationOptions& opts) {
  EisensteinCertificate cert;
  const int n = f.n;
  auto add = [&](const char* name, CheckStatus s, std::string w) { cert.hypotheses.push_back({name, s, std::move(w)}); };
  auto pf = [](bool ok) { return ok ? CheckStatus::pass : CheckStatus::fail; };

  add(hypothesis::weight, pf(k > 2 * n), "k = " + std::to_string(k) + ", n = " + std::to_string(n));
  add(hypothesis::discriminant, pf(field.disc() != -3 && field.disc() != -4), "d_K = " + std::to_string(field.disc()));

  bool inert = false;
  if (!is_prime(p)) {
    add(hypothesis::inert, CheckStatus::fail, std::to_string(p) + " is not prime");
  } else {
    const PrimeType t = classify_prime(field, p);
    inert = t == PrimeType::inert;
    add(hypothesis::inert, pf(inert), std::to_string(p) + " is " + to_string(t));
  }

  Integer mod = 1;
  for (int i = 0; i < 2 * n - 2; ++i) mod *= reps.N;
  const bool congruent = (Integer(static_cast<long>(p)) - 1) % mod == 0;
  add(hypothesis::congruence, pf(congruent), "N = " + reps.N.get_str() + ", modulus " + mod.get_str());

  const Rational a0 = f.coeff(HermIndex::zero(field, n));
  add(hypothesis::constant_term, pf(a0 == 1), "alpha_f(0) = " + rational_to_string(a0));

  bool eigen_ok = false;
  if (!inert) {
    add(hypothesis::eigen, CheckStatus::skipped, "T_n(p) needs an inert p");
  } else if (f.field != field || f.n < 1) {
    add(hypothesis::eigen, CheckStatus::fail, "expansion belongs to a different field");
  } else {
    try {
      HeckeEngine engine(field, n, opts);
      const Rational expect = eigenvalue_formula(field, n, k, p);
      EigenReport rep = eigen_check(f, HeckeElement::single(field, t_key(field, n, p)), k, engine);
      cert.certified_bound = rep.certified_bound;
      if (!rep.consistent) {
        add(hypothesis::eigen, CheckStatus::fail, "not an eigenvector: " + rep.detail);
      } else {
        cert.lambda = rep.lambda;
        eigen_ok = *rep.lambda == expect;
        add(hypothesis::eigen, pf(eigen_ok),
            "lambda = " + rational_to_string(*rep.lambda) + ", expected " + rational_to_string(expect) + " on " +
                std::to_string(rep.checked_indices) + " indices");
      }
    } catch (const std::exception& ex) {
      add(hypothesis::eigen, CheckStatus::fail, std::string("Hecke action failed: ") + ex.what());
    }
  }

  if (n == 1) {
    bool match = false;
    std::string w;
    if (k >= 4 && k % 2 == 0) {
      Integer top;
      mpz_fdiv_q(top.get_mpz_t(), f.trunc.get_num_mpz_t(), f.trunc.get_den_mpz_t());
      const FourierExpansion e = eisenstein_q_expansion(field, k, static_cast<int>(std::max(0L, top.get_si())) + 1);
      match = true;
      std::size_t checked = 0;
      for (const auto& [T, c] : e.coeffs) {
        if (T.trace() > f.trunc) continue;
        ++checked;
        if (f.coeff(T) != c) {
          match = false;
          w = "differs at t = " + rational_to_string(T.diag[0]);
          break;
        }
      }
      if (match) w = std::to_string(checked) + " coefficients agree";
    } else {
      w = "no E_k for this weight";
    }
    add(hypothesis::q_expansion, pf(match), w);
  }

  cert.conclusion = true;
  for (const auto& h : cert.hypotheses)
    if (h.status != CheckStatus::pass) cert.conclusion = false;
  return cert;
}

}  // namespace hermhecke
