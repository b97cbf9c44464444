#include <doctest.h>

#include <functional>

#include "hermhecke/cycsum.hpp"
#include "hermhecke/errors.hpp"
#include "hermhecke/fourier.hpp"
#include "hermhecke/hecke.hpp"
#include "hermhecke/ideal.hpp"
#include "support.hpp"

using namespace hermhecke;

namespace {

HermIndex idx1(long t) { return HermIndex{{Rational(t)}, {}}; }

// |{T ∈ Λ_2 : T ≥ 0, trace ≤ B}| by counting μ ∈ O_K with N(μ) ≤ |d_K|·t11·t22
std::size_t lambda2_count_oracle(const QuadField& K, std::int64_t B) {
  const std::int64_t d = -K.disc();
  std::size_t count = 0;
  for (std::int64_t a = 0; a <= B; ++a)
    for (std::int64_t c = 0; a + c <= B; ++c) {
      const std::int64_t lim = d * a * c;
      const std::int64_t r = 2 * (lim + 2);
      for (std::int64_t x = -r; x <= r; ++x)
        for (std::int64_t y = -r; y <= r; ++y)
          if (K.make(x, y).norm() <= lim) ++count;
    }
  return count;
}

FourierExpansion by_rank(const QuadField& K, int n, int k, std::int64_t B, std::function<Rational(int)> coeff) {
  FourierExpansion f{K, n, k, 1, Rational(Integer(static_cast<long>(B))), {}};
  for (const auto& T : lambda_indices(K, n, B)) {
    Rational c = coeff(psd_rank(K, T).rank);
    if (c != 0) f.coeffs[T] = c;
  }
  return f;
}

FourierExpansion restrict_to(const FourierExpansion& f, const Rational& bound) {
  FourierExpansion g = f;
  g.trunc = bound;
  for (auto it = g.coeffs.begin(); it != g.coeffs.end();)
    it = it->first.trace() > bound ? g.coeffs.erase(it) : std::next(it);
  return g;
}

}  // namespace

TEST_CASE("cyclotomic sums") {
  CycSum s;
  s.add_term(1, Rational(1, 3));
  s.add_term(1, Rational(2, 3));
  CHECK(s.is_rational());
  CHECK(s.to_rational() == -1);
  CycSum all;
  for (int j = 0; j < 12; ++j) all.add_term(1, testsupport::frac(j, 12));
  CHECK(all.is_zero());
  CycSum i4;
  i4.add_term(1, Rational(1, 4));
  CHECK(!i4.is_rational());
  CHECK_THROWS_AS(i4.to_rational(), std::domain_error);
  CycSum sq = i4 + i4.scaled(-1);
  CHECK(sq.is_zero());
  // phases are taken mod 1
  CycSum a, b;
  a.add_term(3, Rational(7, 5));
  b.add_term(3, Rational(2, 5));
  CHECK(a == b);
  CHECK(cyclotomic_polynomial(12) == std::vector<Integer>{1, 0, -1, 0, 1});
  CHECK(cyclotomic_polynomial(7) == std::vector<Integer>(7, 1));
  CHECK(cyclotomic_polynomial(1) == std::vector<Integer>{-1, 1});
  // Gauss sum over F_3 squares: 1 + 2·ζ_3 vs √−3 is irrational
  CycSum gs;
  gs.add_term(1, 0);
  gs.add_term(2, Rational(1, 3));
  CHECK(!gs.is_rational());
}

TEST_CASE("psd rank") {
  auto Qi = QuadField::make(1);
  auto z = psd_rank(Qi, HermIndex::zero(Qi, 2));
  CHECK(z.psd);
  CHECK(!z.pd);
  CHECK(z.rank == 0);
  HermIndex T{{Rational(1), Rational(1)}, {KElem(1, 1, 1, 2)}};
  auto r = psd_rank(Qi, T);
  CHECK(r.pd);
  CHECK(r.rank == 2);
  CHECK(T.to_matrix(Qi).det() == Qi.from_rational(Rational(1, 2)));
  // rank-one Gram form
  KElem t = Qi.make(1, 2);
  HermIndex G{{Rational(1), t.norm()}, {t}};
  auto g = psd_rank(Qi, G);
  CHECK(g.psd);
  CHECK(!g.pd);
  CHECK(g.rank == 1);
  HermIndex neg{{Rational(1), Rational(-1)}, {Qi.zero()}};
  CHECK(!psd_rank(Qi, neg).psd);
}

TEST_CASE("index lattice enumeration and duality") {
  for (std::int64_t m : {1, 5, 11}) {
    auto K = QuadField::make(m);
    auto idx = lambda_indices(K, 2, 4);
    CHECK(idx.size() == lambda2_count_oracle(K, 4));
    for (const auto& T : idx) {
      CHECK(T.in_lambda(K));
      CHECK(psd_rank(K, T).psd);
      CHECK(T.trace() <= 4);
    }
    CHECK(lambda_indices(K, 1, 7).size() == 8);
  }
  auto g = testsupport::rng(40);
  for (std::int64_t m : {1, 5, 7}) {
    auto K = QuadField::make(m);
    for (int i = 0; i < 100; ++i) {
      const int n = static_cast<int>(testsupport::uniform(g, 1, 3));
      HermIndex T = HermIndex::zero(K, n);
      MatK S(K, n, n);
      for (int a = 0; a < n; ++a) {
        T.diag[static_cast<std::size_t>(a)] = testsupport::uniform(g, -5, 5);
        S(a, a) = K.from_int(testsupport::uniform(g, -5, 5));
        for (int b = a + 1; b < n; ++b) {
          S(a, b) = testsupport::random_elem(K, g, 4);
          S(b, a) = S(a, b).conj();
        }
      }
      for (auto& u : T.upper) u = testsupport::random_elem(K, g, 4) / K.sqrt_disc();
      REQUIRE(T.in_lambda(K));
      const KElem tr = [&] {
        MatK P = T.to_matrix(K) * S;
        KElem t = K.zero();
        for (int a = 0; a < n; ++a) t += P(a, a);
        return t;
      }();
      CHECK(tr.is_rational());
      CHECK(tr.is_integral());
      MatK A(K, n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) A(a, b) = testsupport::random_elem(K, g, 3);
      CHECK(HermIndex::from_matrix(A.adjoint() * T.to_matrix(K) * A).in_lambda(K));
    }
  }
}

TEST_CASE("single-coset slash") {
  auto Qi = QuadField::make(1);
  auto E4 = eisenstein_q_expansion(Qi, 4, 30);
  auto id = slash_coset(E4, MatK::identity(Qi, 2), 4);
  CHECK(id.coeffs.size() == E4.coeffs.size());
  for (const auto& [T, c] : E4.coeffs) CHECK(id.coeffs.at(T).to_rational() == c);

  MatK L1 = MatK::diag_int(Qi, {3, 1});
  auto s1 = slash_coset(E4, L1, 4);
  for (const auto& [S, c] : s1.coeffs) {
    const Rational t = S.diag[0] / 3;
    REQUIRE(t.get_den() == 1);
    CHECK(c.to_rational() == E4.coeff(idx1(t.get_num().get_si())));
  }

  MatK L2(Qi, 2, 2);
  L2(0, 0) = Qi.one();
  L2(0, 1) = Qi.one();
  L2(1, 1) = Qi.from_int(3);
  auto s2 = slash_coset(E4, L2, 4);
  for (long t = 0; t <= 9; ++t) {
    CycSum expect;
    expect.add_term(E4.coeff(idx1(t)) / 81, testsupport::frac(t, 3));
    HermIndex S{{testsupport::frac(t, 3)}, {}};
    if (expect.is_zero()) continue;
    REQUIRE(s2.coeffs.count(S));
    CHECK(s2.coeffs.at(S) == expect);
  }
  MatK bad = MatK::identity(Qi, 2);
  bad(1, 0) = Qi.one();
  CHECK_THROWS_AS(slash_coset(E4, bad, 4), std::invalid_argument);
}

TEST_CASE("degree-one Hecke action against the classical formula") {
  auto Qi = QuadField::make(1);
  HeckeEngine eng(Qi, 1);
  for (int k : {4, 6, 12}) {
    FourierExpansion f = k == 12 ? testsupport::delta_expansion(Qi, 30) : eisenstein_q_expansion(Qi, k, 30);
    for (std::int64_t p : {3, 7}) {
      auto g = hecke_act(f, eng.right_cosets(t_key(Qi, 1, p)), k);
      auto oracle = testsupport::t1_oracle(f, p, k);
      CHECK(g.trunc == Rational(29 / p));
      for (const auto& [t, v] : oracle) CHECK(g.coeff(idx1(t)) == v);
    }
  }
  auto g = testsupport::rng(41);
  auto f = testsupport::random_expansion(Qi, 1, 4, 20, g);
  auto same = hecke_act(f, HeckeElement::identity(Qi, 1), 4, eng);
  CHECK(same == f);
}

TEST_CASE("certified truncation is sound") {
  // The image of a truncated input must agree with the image of a longer
  // input on the certified range.
  auto g = testsupport::rng(42);
  struct Case {
    std::int64_t m;
    int n;
    std::vector<std::int64_t> key;
    std::int64_t small, large;
  };
  for (const Case& c : {Case{1, 1, {1, 3}, 10, 30}, Case{11, 2, {1, 1, 2, 2}, 5, 8}, Case{1, 2, {1, 1, 3, 3}, 5, 7}}) {
    auto K = QuadField::make(c.m);
    HeckeEngine eng(K, c.n);
    auto key = DoubleCosetKey::make(K, c.key);
    auto big = testsupport::random_expansion(K, c.n, 4, c.large, g);
    auto small = restrict_to(big, Rational(Integer(static_cast<long>(c.small))));
    auto gs = hecke_act(small, eng.right_cosets(key), 4);
    auto gb = hecke_act(big, eng.right_cosets(key), 4);
    CHECK(gb.trunc >= gs.trunc);
    CHECK(restrict_to(gb, gs.trunc) == gs);
  }
}

TEST_CASE("Hecke images are rational and supported on the index lattice") {
  auto g = testsupport::rng(43);
  auto K = QuadField::make(11);
  HeckeEngine eng(K, 2);
  for (const auto& [key, count] : eng.level_keys(4)) {
    (void)count;
    auto f = testsupport::random_expansion(K, 2, 4, 7, g);
    FourierExpansion h = hecke_act(f, eng.right_cosets(key), 4);
    for (const auto& [S, c] : h.coeffs) {
      CHECK(S.in_lambda(K));
      CHECK(S.trace() <= h.trunc);
    }
  }
}

TEST_CASE("Hecke action equals the sum of single-coset slashes") {
  auto g = testsupport::rng(46);
  struct Case {
    std::int64_t m, q, trunc;
  };
  for (const Case& c : {Case{1, 3, 6}, Case{11, 2, 6}, Case{11, 4, 9}}) {
    auto K = QuadField::make(c.m);
    HeckeEngine eng(K, 2);
    for (const auto& [key, count] : eng.level_keys(c.q)) {
      (void)count;
      const auto& cosets = eng.right_cosets(key);
      const auto f = testsupport::random_expansion(K, 2, 4, c.trunc, g);
      const auto h = hecke_act(f, cosets, 4);
      std::map<HermIndex, CycSum> sum;
      for (const MatK& L : cosets.reps)
        for (const auto& [S, v] : slash_coset(f, L, 4).coeffs) sum[S] += v;
      std::size_t seen = 0;
      for (const auto& [S, v] : sum) {
        if (S.trace() > h.trunc) continue;
        REQUIRE(v.is_rational());
        CHECK(v.to_rational() == h.coeff(S));
        seen += v.to_rational() != 0;
      }
      CHECK(seen == h.coeffs.size());
    }
  }
}

TEST_CASE("Hecke operators preserve cusp support") {
  auto g = testsupport::rng(44);
  auto K = QuadField::make(11);
  HeckeEngine eng(K, 2);
  for (const auto& [key, count] : eng.level_keys(2)) {
    (void)count;
    auto f = testsupport::random_expansion(K, 2, 6, 8, g, true);
    auto h = hecke_act(f, eng.right_cosets(key), 6);
    for (const auto& [S, c] : h.coeffs) CHECK(psd_rank(K, S).pd);
  }
  auto Qi = QuadField::make(1);
  HeckeEngine e1(Qi, 1);
  auto h = hecke_act(testsupport::delta_expansion(Qi, 30), e1.right_cosets(t_key(Qi, 1, 3)), 12);
  CHECK(h.coeff(HermIndex::zero(Qi, 1)) == 0);
}

TEST_CASE("Eisenstein q-expansions") {
  auto Qi = QuadField::make(1);
  CHECK(bernoulli(1) == Rational(-1, 2));
  CHECK(bernoulli(4) == Rational(-1, 30));
  CHECK(bernoulli(6) == Rational(1, 42));
  CHECK(bernoulli(12) == Rational(-691, 2730));
  CHECK(bernoulli(7) == 0);
  auto E4 = eisenstein_q_expansion(Qi, 4, 30);
  auto E6 = eisenstein_q_expansion(Qi, 6, 30);
  auto E8 = eisenstein_q_expansion(Qi, 8, 30);
  CHECK(E4.coeff(idx1(0)) == 1);
  CHECK(E4.coeff(idx1(1)) == 240);
  CHECK(E4.coeff(idx1(2)) == 2160);
  CHECK(E6.coeff(idx1(1)) == -504);
  CHECK(E6.coeff(idx1(2)) == -16632);
  for (long t = 1; t < 30; ++t) {
    CHECK(E4.coeff(idx1(t)) == 240 * Rational(testsupport::sigma_oracle(3, t)));
    CHECK(E6.coeff(idx1(t)) == -504 * Rational(testsupport::sigma_oracle(5, t)));
    CHECK(divisor_sigma(7, t) == testsupport::sigma_oracle(7, t));
  }
  // E_4² = E_8
  for (long t = 0; t < 30; ++t) {
    Rational s = 0;
    for (long u = 0; u <= t; ++u) s += E4.coeff(idx1(u)) * E4.coeff(idx1(t - u));
    CHECK(s == E8.coeff(idx1(t)));
  }
  CHECK_THROWS_AS(eisenstein_q_expansion(Qi, 5, 10), std::invalid_argument);
  CHECK_THROWS_AS(eisenstein_q_expansion(Qi, 2, 10), std::invalid_argument);
}

TEST_CASE("Siegel Phi") {
  auto Qi = QuadField::make(1);
  auto E4 = eisenstein_q_expansion(Qi, 4, 10);
  auto p = siegel_phi(E4);
  CHECK(p.n == 0);
  CHECK(p.coeffs.size() == 1);
  CHECK(p.coeff(HermIndex{}) == 1);
  CHECK(siegel_phi(testsupport::delta_expansion(Qi, 10)).coeffs.empty());
  auto g = testsupport::rng(45);
  for (int i = 0; i < 5; ++i) {
    auto f = testsupport::random_expansion(Qi, 2, 4, 4, g);
    auto c = siegel_phi(siegel_phi(f));
    CHECK(c.coeff(HermIndex{}) == f.coeff(HermIndex::zero(Qi, 2)));
  }
}

TEST_CASE("R_U twists") {
  auto Qi = QuadField::make(1);
  auto g = testsupport::rng(46);
  auto f = testsupport::random_expansion(Qi, 2, 4, 5, g);
  auto same = slash_RU(f, MatK::identity(Qi, 2), 4);
  CHECK(same == f);
  for (int i = 0; i < 10; ++i) {
    MatK U = testsupport::random_gl(Qi, 2, g, 3);
    auto h = slash_RU(f, U, 4);
    CHECK(h.scale == 1);
    for (const auto& [S, c] : h.coeffs) CHECK(S.in_lambda(Qi));
    // the twist is invertible on its certified range
    auto back = slash_RU(h, U.inverse(), 4);
    for (const auto& [S, c] : back.coeffs) CHECK(f.coeff(S) == c);
  }
  auto K5 = QuadField::make(5);
  auto reps = class_representatives(K5);
  auto f5 = testsupport::random_expansion(K5, 2, 4, 6, g);
  auto t = slash_RU(f5, class_twist_matrix(K5, 2, reps.reps[1].u), 4);
  CHECK(t.scale % 2 == 0);
  MatK rot = MatK::identity(Qi, 2);
  rot(0, 0) = Qi.make(1, 1);
  CHECK_THROWS_AS(slash_RU(f, rot, 3), std::domain_error);
  CHECK_THROWS_AS(slash_RU(f, MatK(Qi, 2, 2), 4), std::invalid_argument);
}

TEST_CASE("cusp tests agree on invariant fixtures") {
  for (std::int64_t m : {1, 2, 5, 6}) {
    auto K = QuadField::make(m);
    auto reps = class_representatives(K);
    auto cusp = by_rank(K, 2, 4, 10, [](int r) { return r == 2 ? Rational(1) : Rational(0); });
    auto rank1 = by_rank(K, 2, 4, 10, [](int r) { return r == 1 ? Rational(1) : Rational(0); });
    auto full = by_rank(K, 2, 4, 10, [](int r) { return Rational(r + 1); });
    auto c = cusp_tests(cusp, reps);
    CHECK(c.direct);
    CHECK(c.twisted);
    for (const auto* f : {&rank1, &full}) {
      auto r = cusp_tests(*f, reps);
      CHECK(!r.direct);
      CHECK(!r.twisted);
      CHECK(r.agree);
      for (bool b : r.per_class) CHECK(!b);
    }
  }
  auto Qi = QuadField::make(1);
  auto reps = class_representatives(Qi);
  auto d = cusp_tests(testsupport::delta_expansion(Qi, 20), reps);
  CHECK(d.direct);
  CHECK(d.twisted);
  auto e = cusp_tests(eisenstein_q_expansion(Qi, 4, 20), reps);
  CHECK(!e.direct);
  CHECK(!e.twisted);
  FourierExpansion zero{Qi, 2, 4, 1, 5, {}};
  CHECK(cusp_tests(zero, reps).direct);
  CHECK(cusp_tests(zero, reps).twisted);
}

TEST_CASE("rank profiles") {
  auto Qi = QuadField::make(1);
  FourierExpansion c{Qi, 2, 4, 1, 3, {{HermIndex::zero(Qi, 2), Rational(5)}}};
  CHECK(rank_profile(c).min_rank == 0);
  auto E4 = eisenstein_q_expansion(Qi, 4, 10);
  auto r = rank_profile(E4);
  CHECK(r.min_rank == 0);
  CHECK(r.histogram.at(0) == 1);
  CHECK(r.histogram.at(1) == 9);
  auto g = testsupport::rng(47);
  CHECK(rank_profile(testsupport::random_expansion(Qi, 2, 4, 5, g, true)).min_rank == 2);
  FourierExpansion zero{Qi, 2, 4, 1, 3, {}};
  CHECK(rank_profile(zero).min_rank == -1);
}

TEST_CASE("full-depth twists vanish exactly with the constant term") {
  auto g = testsupport::rng(48);
  for (std::int64_t m : {1, 5}) {
    auto K = QuadField::make(m);
    for (int i = 0; i < 6; ++i) {
      auto f = testsupport::random_expansion(K, 2, 4, 4, g);
      if (i % 2) f.coeffs.erase(HermIndex::zero(K, 2));
      MatK U = testsupport::random_gl(K, 2, g, 3);
      auto c = siegel_phi(siegel_phi(slash_RU(f, U, 4)));
      c.prune();
      CHECK(c.coeffs.empty() == (f.coeff(HermIndex::zero(K, 2)) == 0));
    }
  }
}
