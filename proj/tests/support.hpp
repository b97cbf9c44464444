#pragma once

// Shared test helpers: seeded randomness, random Γ_n elements, and oracles
// that recompute reference values without going through the library code
// paths under test.

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "hermhecke/field.hpp"
#include "hermhecke/fourier.hpp"
#include "hermhecke/matrix.hpp"

namespace testsupport {

using hermhecke::Integer;
using hermhecke::KElem;
using hermhecke::MatK;
using hermhecke::QuadField;
using hermhecke::Rational;

/// Seed for randomized drivers: the config file value unless overridden by
/// --seed=N on the command line.
std::uint64_t& seed();
/// Reads "key = value" lines; returns the seed entry if present.
void load_config(const char* path);
/// Strips --seed=N and --config=path from argv (doctest sees the rest).
void consume_args(int& argc, char** argv);

/// Independent stream per test, derived from the global seed.
std::mt19937_64 rng(std::uint64_t salt);

/// a/b in lowest terms (mpq_class(a, b) is not canonicalized).
Rational frac(std::int64_t a, std::int64_t b);

std::int64_t uniform(std::mt19937_64& g, std::int64_t lo, std::int64_t hi);
KElem random_elem(const QuadField& K, std::mt19937_64& g, std::int64_t r, bool integral = true);
Rational random_rational(std::mt19937_64& g, std::int64_t r);

/// Random element of Γ_n: a word in translations by random integral
/// Hermitian H, rotations by random elementary U, and J.
MatK random_gamma(const QuadField& K, int n, std::mt19937_64& g, int steps = 6);
/// Random n×n integral matrix with unit determinant.
MatK random_gl(const QuadField& K, int n, std::mt19937_64& g, int steps = 6);

/// Number of roots of the minimal polynomial of ω modulo p (brute force):
/// 0 inert, 1 ramified, 2 split.
int omega_roots_mod(const QuadField& K, std::int64_t p);
/// χ_K(n) for n ≥ 1 from prime factors and root counts.
int chi_oracle(const QuadField& K, std::int64_t n);
/// h(d) = −(1/|d|) Σ_{a=1}^{|d|} χ(a)·a for d < −4; 1 for d ∈ {−3, −4}.
int class_number_oracle(const QuadField& K);
/// Brute-force reduced primitive forms of discriminant d.
std::vector<std::array<std::int64_t, 3>> reduced_forms_oracle(std::int64_t d);

/// τ(1), …, τ(N−1) from q·∏(1 − q^m)^24 (index 0 is 0).
std::vector<Integer> tau_oracle(int N);
Integer sigma_oracle(int r, std::int64_t t);

/// Δ as a degree-one expansion with coefficients τ(t), t < terms.
hermhecke::FourierExpansion delta_expansion(const QuadField& K, int terms);

/// Random expansion with rational coefficients on all indices of Λ_n with
/// T ≥ 0 and trace ≤ trunc.
hermhecke::FourierExpansion random_expansion(const QuadField& K, int n, int k, std::int64_t trunc,
                                             std::mt19937_64& g, bool cusp_only = false);

/// Random expansion that is dense up to trace dense_trunc and carries
/// `extra` further random coefficients at indices of trace ≤ trunc; every
/// other index up to trunc is zero. Degree two or one only.
hermhecke::FourierExpansion sparse_expansion(const QuadField& K, int n, int k, std::int64_t dense_trunc,
                                             std::int64_t trunc, std::size_t extra, std::mt19937_64& g,
                                             bool cusp_only = false);

/// Degree-one Hecke image by the classical formula
/// α(t/p) + p^{1−k}·α(pt), for t ≤ trunc/p.
std::map<std::int64_t, Rational> t1_oracle(const hermhecke::FourierExpansion& f, std::int64_t p, int k);

}  // namespace testsupport
