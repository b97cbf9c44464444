#include "support.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

namespace testsupport {

using namespace hermhecke;

std::uint64_t& seed() {
  static std::uint64_t s = 20261018;
  return s;
}

void load_config(const char* path) {
  std::ifstream in(path);
  if (!in) return;
  for (const auto& item : CLI::ConfigTOML().from_config(in))
    if (item.name == "seed" && !item.inputs.empty()) seed() = std::stoull(item.inputs.front());
}

void consume_args(int& argc, char** argv) {
  int w = 1;
  for (int i = 1; i < argc; ++i) {
    if (std::strncmp(argv[i], "--config=", 9) == 0) {
      load_config(argv[i] + 9);
    } else if (std::strncmp(argv[i], "--seed=", 7) == 0) {
      seed() = std::stoull(argv[i] + 7);
    } else {
      argv[w++] = argv[i];
    }
  }
  argc = w;
}

std::mt19937_64 rng(std::uint64_t salt) { return std::mt19937_64(seed() * 0x9e3779b97f4a7c15ull + salt); }

Rational frac(std::int64_t a, std::int64_t b) {
  Rational r(Integer(static_cast<long>(a)), Integer(static_cast<long>(b)));
  r.canonicalize();
  return r;
}

std::int64_t uniform(std::mt19937_64& g, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(g);
}

KElem random_elem(const QuadField& K, std::mt19937_64& g, std::int64_t r, bool integral) {
  Integer den = integral ? 1 : uniform(g, 1, r);
  return KElem(K.m(), uniform(g, -r, r), uniform(g, -r, r), den);
}

Rational random_rational(std::mt19937_64& g, std::int64_t r) {
  Rational x(Integer(static_cast<long>(uniform(g, -r, r))), Integer(static_cast<long>(uniform(g, 1, r))));
  x.canonicalize();
  return x;
}

MatK random_gamma(const QuadField& K, int n, std::mt19937_64& g, int steps) {
  const MatK I = MatK::identity(K, n);
  const MatK Z(K, n, n);
  MatK M = MatK::identity(K, 2 * n);
  for (int s = 0; s < steps; ++s) {
    switch (uniform(g, 0, 2)) {
      case 0: {
        MatK H(K, n, n);
        for (int i = 0; i < n; ++i) {
          H(i, i) = K.from_int(uniform(g, -3, 3));
          for (int j = i + 1; j < n; ++j) {
            H(i, j) = random_elem(K, g, 2);
            H(j, i) = H(i, j).conj();
          }
        }
        M = M * MatK::from_blocks(I, H, Z, I);
        break;
      }
      case 1: {
        MatK U = random_gl(K, n, g, 2);
        M = M * MatK::from_blocks(U.adjoint(), Z, Z, U.inverse());
        break;
      }
      default:
        M = M * MatK::J(K, n);
    }
  }
  return M;
}

MatK random_gl(const QuadField& K, int n, std::mt19937_64& g, int steps) {
  MatK U = MatK::identity(K, n);
  const auto units = K.units();
  for (int s = 0; s < steps; ++s) {
    MatK E = MatK::identity(K, n);
    if (n > 1 && uniform(g, 0, 3) != 0) {
      const int i = static_cast<int>(uniform(g, 0, n - 1));
      int j = static_cast<int>(uniform(g, 0, n - 2));
      if (j >= i) ++j;
      E(i, j) = random_elem(K, g, 2);
    } else {
      E(0, 0) = units[static_cast<std::size_t>(uniform(g, 0, static_cast<std::int64_t>(units.size()) - 1))];
    }
    U = U * E;
  }
  return U;
}

int omega_roots_mod(const QuadField& K, std::int64_t p) {
  // x² − t·x + nrm
  const std::int64_t t = K.omega_trace(), nrm = K.omega_norm();
  int roots = 0;
  for (std::int64_t x = 0; x < p; ++x)
    if (((x * x - t * x + nrm) % p + p) % p == 0) ++roots;
  return roots;
}

int chi_oracle(const QuadField& K, std::int64_t n) {
  int r = 1;
  for (std::int64_t p = 2; p * p <= n; ++p)
    while (n % p == 0) {
      r *= omega_roots_mod(K, p) - 1;
      n /= p;
    }
  if (n > 1) r *= omega_roots_mod(K, n) - 1;
  return r;
}

int class_number_oracle(const QuadField& K) {
  const std::int64_t d = K.disc();
  if (d == -3 || d == -4) return 1;
  std::int64_t s = 0;
  for (std::int64_t a = 1; a < -d; ++a) s += chi_oracle(K, a) * a;
  return static_cast<int>(-s / -d);
}

std::vector<std::array<std::int64_t, 3>> reduced_forms_oracle(std::int64_t d) {
  std::vector<std::array<std::int64_t, 3>> out;
  for (std::int64_t a = 1; a <= -d; ++a)
    for (std::int64_t b = -a; b <= a; ++b) {
      if ((b * b - d) % (4 * a) != 0) continue;
      const std::int64_t c = (b * b - d) / (4 * a);
      if (c < a) continue;
      if ((b < 0) && (-b == a || a == c)) continue;
      if (std::gcd(std::gcd(a, std::abs(b)), c) != 1) continue;
      out.push_back({a, b, c});
    }
  return out;
}

std::vector<Integer> tau_oracle(int N) {
  // P = ∏_{m<N} (1 − q^m)^24 truncated, then shift by one
  std::vector<Integer> P(static_cast<std::size_t>(N), 0);
  P[0] = 1;
  for (int m = 1; m < N; ++m)
    for (int rep = 0; rep < 24; ++rep)
      for (int i = N - 1; i >= m; --i) P[static_cast<std::size_t>(i)] -= P[static_cast<std::size_t>(i - m)];
  std::vector<Integer> tau(static_cast<std::size_t>(N), 0);
  for (int i = 1; i < N; ++i) tau[static_cast<std::size_t>(i)] = P[static_cast<std::size_t>(i - 1)];
  return tau;
}

Integer sigma_oracle(int r, std::int64_t t) {
  Integer s = 0;
  for (std::int64_t d = 1; d <= t; ++d)
    if (t % d == 0) {
      Integer x;
      mpz_ui_pow_ui(x.get_mpz_t(), static_cast<unsigned long>(d), static_cast<unsigned long>(r));
      s += x;
    }
  return s;
}

FourierExpansion delta_expansion(const QuadField& K, int terms) {
  FourierExpansion f{K, 1, 12, 1, Rational(terms - 1), {}};
  const auto tau = tau_oracle(terms);
  for (int t = 1; t < terms; ++t) f.coeffs[HermIndex{{Rational(t)}, {}}] = Rational(tau[static_cast<std::size_t>(t)]);
  return f;
}

FourierExpansion random_expansion(const QuadField& K, int n, int k, std::int64_t trunc, std::mt19937_64& g,
                                  bool cusp_only) {
  FourierExpansion f{K, n, k, 1, Rational(Integer(static_cast<long>(trunc))), {}};
  for (const HermIndex& T : lambda_indices(K, n, trunc)) {
    if (cusp_only && !psd_rank(K, T).pd) continue;
    const Rational c = random_rational(g, 9);
    if (c != 0) f.coeffs[T] = c;
  }
  return f;
}

FourierExpansion sparse_expansion(const QuadField& K, int n, int k, std::int64_t dense_trunc, std::int64_t trunc,
                                  std::size_t extra, std::mt19937_64& g, bool cusp_only) {
  FourierExpansion f = random_expansion(K, n, k, std::min(dense_trunc, trunc), g, cusp_only);
  f.trunc = Rational(Integer(static_cast<long>(trunc)));
  if (trunc <= dense_trunc || n > 2) return f;
  const Rational floor_tr(Integer(static_cast<long>(dense_trunc)));
  std::size_t added = 0;
  while (added < extra) {
    HermIndex T = HermIndex::zero(K, n);
    if (n == 1) {
      T.diag[0] = uniform(g, dense_trunc + 1, trunc);
    } else {
      const std::int64_t a = uniform(g, 0, trunc), b = uniform(g, 0, trunc - a);
      T.diag = {Rational(Integer(static_cast<long>(a))), Rational(Integer(static_cast<long>(b)))};
      // N(μ) ≤ |d|·a·b keeps T positive semidefinite
      const Rational R(Integer(static_cast<long>(-K.disc() * a * b)));
      const auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(-K.disc() * a * b))) + 1;
      const KElem mu = K.make(Integer(static_cast<long>(uniform(g, -2 * r, 2 * r))),
                              Integer(static_cast<long>(uniform(g, -r, r))));
      if (mu.norm() > R) continue;
      T.upper[0] = mu / K.sqrt_disc();
    }
    if (T.trace() <= floor_tr) continue;
    if (cusp_only && !hermhecke::psd_rank(K, T).pd) continue;
    const Rational c = random_rational(g, 9);
    if (c == 0) continue;
    f.coeffs[T] = c;
    ++added;
  }
  return f;
}

std::map<std::int64_t, Rational> t1_oracle(const FourierExpansion& f, std::int64_t p, int k) {
  std::map<std::int64_t, Rational> out;
  Integer top;
  mpz_fdiv_q(top.get_mpz_t(), f.trunc.get_num_mpz_t(), f.trunc.get_den_mpz_t());
  const Rational pr(Integer(static_cast<long>(p)));
  Rational w = 1;  // p^{1−k}
  for (int i = 0; i < k - 1; ++i) w /= pr;
  for (int i = 0; i < 1 - k; ++i) w *= pr;
  for (std::int64_t t = 0; t * p <= top.get_si(); ++t) {
    Rational v = f.coeff(HermIndex{{Rational(Integer(static_cast<long>(t * p)))}, {}}) * w;
    if (t % p == 0) v += f.coeff(HermIndex{{Rational(Integer(static_cast<long>(t / p)))}, {}});
    out[t] = v;
  }
  return out;
}

}  // namespace testsupport
