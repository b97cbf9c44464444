#include <doctest.h>

#include "hermhecke/eigen.hpp"
#include "hermhecke/errors.hpp"
#include "support.hpp"

using namespace hermhecke;
using testsupport::frac;

namespace {

Rational rpow(std::int64_t p, int e) {
  Rational r = 1;
  for (int i = 0; i < std::abs(e); ++i) r *= p;
  return e < 0 ? Rational(1 / r) : r;
}

// the first admissible inert primes: p ≡ 1 mod N^(2n−2), by brute force
std::vector<std::int64_t> admissible_primes(const QuadField& K, const Integer& N, int n, std::size_t count) {
  Integer mod = 1;
  for (int i = 0; i < 2 * n - 2; ++i) mod *= N;
  std::vector<std::int64_t> out;
  for (std::int64_t p = 2; out.size() < count; ++p)
    if (is_prime(p) && testsupport::omega_roots_mod(K, p) == 0 && (Integer(static_cast<long>(p)) - 1) % mod == 0)
      out.push_back(p);
  return out;
}

}  // namespace

TEST_CASE("eigenvalue formula") {
  auto Qi = QuadField::make(1);
  CHECK(eigenvalue_formula(Qi, 1, 4, 3) == frac(28, 27));
  CHECK(eigenvalue_formula(Qi, 2, 6, 3) == frac(6832, 6561));
  CHECK(eigenvalue_formula(Qi, 1, 0, 7) == 8);
  CHECK(eigenvalue_formula(Qi, 1, 6, 7) == rpow(7, -5) + 1);
  CHECK_THROWS_AS(eigenvalue_formula(Qi, 1, 4, 5), ScopeError);
  CHECK_THROWS_AS(eigenvalue_formula(Qi, 1, 4, 2), ScopeError);
  CHECK_THROWS_AS(eigenvalue_formula(Qi, 1, 4, 9), std::invalid_argument);
  // product over j against the closed form for each degree
  for (int n = 1; n <= 4; ++n)
    for (int k : {0, 4, 8, 10}) {
      Rational expect = 1;
      for (int j = 1; j <= n; ++j) expect *= rpow(3, 2 * j - 1 - k) + 1;
      CHECK(eigenvalue_formula(Qi, n, k, 3) == expect);
    }
}

TEST_CASE("cusp form bound") {
  auto Qi = QuadField::make(1);
  auto b1 = cusp_bound(Qi, 1, 4, 3);
  REQUIRE(b1.value);
  CHECK(*b1.value == frac(4, 9));
  auto b2 = cusp_bound(Qi, 2, 6, 3);
  REQUIRE(b2.value);
  CHECK(*b2.value == frac(112, 729));
  CHECK(cusp_bound(Qi, 2, 0, 3).count == 112);
  CHECK(*cusp_bound(Qi, 2, 0, 3).value == 112);
  auto odd = cusp_bound(Qi, 1, 3, 3);
  CHECK(!odd.value);
  // 4/3^{3/2} ≈ 0.77
  CHECK(odd.below_one());
  CHECK(odd.admits(frac(3, 4)));
  CHECK(!odd.admits(frac(4, 5)));
  CHECK(b1.admits(frac(-4, 9)));
  CHECK(!b1.admits(frac(5, 9)));
  CHECK_THROWS_AS(cusp_bound(Qi, 1, 4, 5), ScopeError);
}

TEST_CASE("Delta respects the cusp bound at p = 3") {
  auto Qi = QuadField::make(1);
  HeckeEngine eng(Qi, 1);
  auto r = eigen_check(testsupport::delta_expansion(Qi, 30), HeckeElement::single(Qi, t_key(Qi, 1, 3)), 12, eng);
  REQUIRE(r.consistent);
  CHECK(*r.lambda == frac(252, 177147));
  CHECK(cusp_bound(Qi, 1, 12, 3).admits(*r.lambda));
}

TEST_CASE("eigen checks on Eisenstein series") {
  auto Qi = QuadField::make(1);
  HeckeEngine eng(Qi, 1);
  for (int k : {4, 6})
    for (std::int64_t p : {3, 7}) {
      auto f = eisenstein_q_expansion(Qi, k, 30);
      auto r = eigen_check(f, HeckeElement::single(Qi, t_key(Qi, 1, p)), k, eng);
      REQUIRE(r.consistent);
      CHECK(*r.lambda == eigenvalue_formula(Qi, 1, k, p));
      CHECK(r.checked_indices > 0);
      CHECK(r.certified_bound == Rational(29 / p));
    }
  // one perturbed coefficient inside the certified range breaks it
  auto f = eisenstein_q_expansion(Qi, 4, 30);
  f.coeffs[HermIndex{{Rational(5)}, {}}] += 1;
  auto bad = eigen_check(f, HeckeElement::single(Qi, t_key(Qi, 1, 3)), 4, eng);
  CHECK(!bad.consistent);
  CHECK(!bad.lambda);
  CHECK(!bad.detail.empty());
  // the zero expansion has no pivot
  FourierExpansion z{Qi, 1, 4, 1, 20, {}};
  CHECK(!eigen_check(z, HeckeElement::single(Qi, t_key(Qi, 1, 3)), 4, eng).consistent);
}

TEST_CASE("Eisenstein certificates") {
  auto K11 = QuadField::make(11);
  auto reps = class_representatives(K11);
  auto E4 = eisenstein_q_expansion(K11, 4, 30);
  auto ok = certify_eisenstein(E4, K11, 4, 2, reps);
  CHECK(ok.conclusion);
  CHECK(!ok.first_failure());
  REQUIRE(ok.lambda);
  CHECK(*ok.lambda == frac(9, 8));
  CHECK(ok.certified_bound == 14);

  auto delta = certify_eisenstein(testsupport::delta_expansion(K11, 30), K11, 12, 2, reps);
  CHECK(!delta.conclusion);
  CHECK(delta.first_failure() == std::string(hypothesis::constant_term));

  auto e6 = certify_eisenstein(eisenstein_q_expansion(K11, 6, 30), K11, 4, 2, reps);
  CHECK(e6.first_failure() == std::string(hypothesis::eigen));

  auto split = certify_eisenstein(E4, K11, 4, 3, reps);
  CHECK(split.first_failure() == std::string(hypothesis::inert));
  for (const auto& h : split.hypotheses)
    if (h.name == hypothesis::eigen) CHECK(h.status == CheckStatus::skipped);

  auto Qi = QuadField::make(1);
  auto gauss = certify_eisenstein(eisenstein_q_expansion(Qi, 4, 30), Qi, 4, 3, class_representatives(Qi));
  CHECK(gauss.first_failure() == std::string(hypothesis::discriminant));

  CHECK(certify_eisenstein(E4, K11, 2, 2, reps).first_failure() == std::string(hypothesis::weight));

  // the congruence condition is vacuous at n = 1 even for N = 2
  auto K5 = QuadField::make(5);
  auto r5 = class_representatives(K5);
  auto c5 = certify_eisenstein(eisenstein_q_expansion(K5, 4, 30), K5, 4, 11, r5);
  CHECK(c5.conclusion);
  CHECK(to_string(CheckStatus::skipped) == "skipped");
}

TEST_CASE("cusp bounds separate from the Eisenstein eigenvalue") {
  struct Field {
    std::int64_t m;
    std::optional<std::int64_t> avoid;
  };
  for (const Field& fd : {Field{11, std::nullopt}, Field{5, 5}}) {
    auto K = QuadField::make(fd.m);
    auto reps = class_representatives(K, fd.avoid);
    for (int n : {2, 3}) {
      const int k = 2 * n + 2;
      for (std::int64_t p : admissible_primes(K, reps.N, n, 3))
        for (int j = 1; j <= n; ++j) {
          const int d = n - j + 1;
          auto b = cusp_bound(K, d, k, p);
          CHECK(b.below_one());
          CHECK(eigenvalue_formula(K, d, k, p) > 1);
          CHECK(!b.admits(eigenvalue_formula(K, d, k, p)));
        }
    }
  }
}
