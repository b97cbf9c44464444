#include "hermhecke/matrix.hpp"

#include <sstream>
#include <stdexcept>

#include "hermhecke/errors.hpp"

namespace hermhecke {

MatK::MatK(const QuadField& field, int rows, int cols)
    : field_(field), rows_(rows), cols_(cols), e_(static_cast<std::size_t>(rows * cols), field.zero()) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
}

MatK MatK::identity(const QuadField& field, int n) {
  MatK r(field, n, n);
  for (int i = 0; i < n; ++i) r(i, i) = field.one();
  return r;
}

MatK MatK::J(const QuadField& field, int n) {
  MatK r(field, 2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    r(i, n + i) = -field.one();
    r(n + i, i) = field.one();
  }
  return r;
}

MatK MatK::diag(const QuadField& field, const std::vector<KElem>& d) {
  const int n = static_cast<int>(d.size());
  MatK r(field, n, n);
  for (int i = 0; i < n; ++i) r(i, i) = d[static_cast<std::size_t>(i)];
  return r;
}

MatK MatK::diag_int(const QuadField& field, const std::vector<Integer>& d) {
  std::vector<KElem> v;
  for (const Integer& x : d) v.push_back(field.from_int(x));
  return diag(field, v);
}

MatK MatK::from_blocks(const MatK& A, const MatK& B, const MatK& C, const MatK& D) {
  if (A.rows_ != B.rows_ || C.rows_ != D.rows_ || A.cols_ != C.cols_ || B.cols_ != D.cols_)
    throw std::invalid_argument("block dimension mismatch");
  A.check_compatible(B);
  A.check_compatible(C);
  A.check_compatible(D);
  MatK r(A.field_, A.rows_ + C.rows_, A.cols_ + B.cols_);
  for (int i = 0; i < A.rows_; ++i) {
    for (int j = 0; j < A.cols_; ++j) r(i, j) = A(i, j);
    for (int j = 0; j < B.cols_; ++j) r(i, A.cols_ + j) = B(i, j);
  }
  for (int i = 0; i < C.rows_; ++i) {
    for (int j = 0; j < C.cols_; ++j) r(A.rows_ + i, j) = C(i, j);
    for (int j = 0; j < D.cols_; ++j) r(A.rows_ + i, C.cols_ + j) = D(i, j);
  }
  return r;
}

void MatK::check_compatible(const MatK& o) const {
  if (field_ != o.field_) throw std::invalid_argument("mixed-field matrices");
}

MatK MatK::operator+(const MatK& o) const {
  check_compatible(o);
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("dimension mismatch in +");
  MatK r = *this;
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
  return r;
}

MatK MatK::operator-(const MatK& o) const {
  check_compatible(o);
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("dimension mismatch in -");
  MatK r = *this;
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] -= o.e_[i];
  return r;
}

MatK MatK::operator*(const MatK& o) const {
  check_compatible(o);
  if (cols_ != o.rows_) throw std::invalid_argument("dimension mismatch in *");
  MatK r(field_, rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const KElem& x = (*this)(i, k);
      if (x.is_zero()) continue;
      for (int j = 0; j < o.cols_; ++j) {
        const KElem& y = o(k, j);
        if (y.is_zero()) continue;
        r(i, j) += x * y;
      }
    }
  return r;
}

MatK MatK::scaled(const KElem& s) const {
  MatK r = *this;
  for (auto& x : r.e_) x *= s;
  return r;
}

MatK MatK::scaled(const Rational& s) const { return scaled(field_.from_rational(s)); }

MatK MatK::transpose() const {
  MatK r(field_, cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

MatK MatK::conj() const {
  MatK r = *this;
  for (auto& x : r.e_) x = x.conj();
  return r;
}

MatK MatK::adjoint() const { return transpose().conj(); }

KElem MatK::det() const {
  if (!is_square()) throw std::invalid_argument("determinant of a non-square matrix");
  const int n = rows_;
  if (n == 0) return field_.one();
  // Bareiss fraction-free elimination; divisions are exact in O_K for
  // integral input.
  std::vector<KElem> a = e_;
  auto at = [&](int i, int j) -> KElem& { return a[static_cast<std::size_t>(i * n + j)]; };
  KElem prev = field_.one();
  bool neg = false;
  for (int k = 0; k < n - 1; ++k) {
    if (at(k, k).is_zero()) {
      int s = k + 1;
      while (s < n && at(s, k).is_zero()) ++s;
      if (s == n) return field_.zero();
      for (int j = 0; j < n; ++j) std::swap(at(k, j), at(s, j));
      neg = !neg;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        KElem v = at(k, k) * at(i, j) - at(i, k) * at(k, j);
        at(i, j) = prev.is_one() ? v : v / prev;
      }
    }
    prev = at(k, k);
  }
  KElem d = at(n - 1, n - 1);
  return neg ? -d : d;
}

MatK MatK::inverse() const {
  if (!is_square()) throw std::invalid_argument("inverse of a non-square matrix");
  const int n = rows_;
  MatK a = *this;
  MatK inv = identity(field_, n);
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (p < n && a(p, c).is_zero()) ++p;
    if (p == n) throw std::domain_error("singular matrix has no inverse");
    if (p != c)
      for (int j = 0; j < n; ++j) {
        std::swap(a(p, j), a(c, j));
        std::swap(inv(p, j), inv(c, j));
      }
    KElem s = a(c, c).inverse();
    for (int j = 0; j < n; ++j) {
      a(c, j) *= s;
      inv(c, j) *= s;
    }
    for (int i = 0; i < n; ++i) {
      if (i == c || a(i, c).is_zero()) continue;
      KElem f = a(i, c);
      for (int j = 0; j < n; ++j) {
        a(i, j) -= f * a(c, j);
        inv(i, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

MatK MatK::block(int r0, int c0, int nr, int nc) const {
  if (r0 < 0 || c0 < 0 || r0 + nr > rows_ || c0 + nc > cols_) throw std::invalid_argument("block out of range");
  MatK r(field_, nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) r(i, j) = (*this)(r0 + i, c0 + j);
  return r;
}

int MatK::rank() const {
  MatK a = *this;
  int r = 0;
  for (int c = 0; c < cols_ && r < rows_; ++c) {
    int p = r;
    while (p < rows_ && a(p, c).is_zero()) ++p;
    if (p == rows_) continue;
    for (int j = 0; j < cols_; ++j) std::swap(a(p, j), a(r, j));
    KElem s = a(r, c).inverse();
    for (int i = r + 1; i < rows_; ++i) {
      if (a(i, c).is_zero()) continue;
      KElem f = a(i, c) * s;
      for (int j = c; j < cols_; ++j) a(i, j) -= f * a(r, j);
    }
    ++r;
  }
  return r;
}

bool MatK::is_integral() const {
  for (const auto& x : e_)
    if (!x.is_integral()) return false;
  return true;
}

bool MatK::is_zero() const {
  for (const auto& x : e_)
    if (!x.is_zero()) return false;
  return true;
}

bool MatK::operator==(const MatK& o) const {
  return field_ == o.field_ && rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_;
}

std::string MatK::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < rows_; ++i) {
    if (i) os << "; ";
    for (int j = 0; j < cols_; ++j) os << (j ? " " : "") << (*this)(i, j);
  }
  os << "]";
  return os.str();
}

// ---------------------------------------------------------------------------

MatK j_form(const MatK& M) {
  if (!M.is_square() || M.rows() % 2 != 0) throw std::invalid_argument("J[M] needs an even square matrix");
  return M.adjoint() * MatK::J(M.field(), M.rows() / 2) * M;
}

std::optional<Integer> similitude_factor(const MatK& M) {
  if (!M.is_square() || M.rows() % 2 != 0 || M.rows() == 0)
    throw std::invalid_argument("similitude factor needs a non-empty even square matrix");
  if (!M.is_integral()) throw std::invalid_argument("similitude factor needs an integral matrix");
  const int n = M.rows() / 2;
  MatK jm = j_form(M);
  const KElem& q0 = jm(n, 0);
  if (!q0.is_rational() || !q0.is_integral() || sgn(q0.a()) <= 0) return std::nullopt;
  if (jm != MatK::J(M.field(), n).scaled(q0)) return std::nullopt;
  Integer q = q0.a();
  KElem d = M.det();
  Integer q2n;
  mpz_pow_ui(q2n.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(2 * n));
  HERMHECKE_CHECK(d.norm() == Rational(q2n), "norm(det M) != q^{2n} for a similitude");
  return q;
}

bool in_gamma(const MatK& M, const Integer& level) {
  if (!M.is_square() || M.rows() % 2 != 0 || M.rows() == 0) return false;
  if (!M.is_integral()) return false;
  auto q = similitude_factor(M);
  if (!q || *q != 1) return false;
  if (level > 1) {
    MatK d = M - MatK::identity(M.field(), M.rows());
    for (int i = 0; i < d.rows(); ++i)
      for (int j = 0; j < d.cols(); ++j)
        if (!mpz_divisible_p(d(i, j).a().get_mpz_t(), level.get_mpz_t()) ||
            !mpz_divisible_p(d(i, j).b().get_mpz_t(), level.get_mpz_t()))
          return false;
  }
  return true;
}

bool is_unimodular(const MatK& M) {
  if (!M.is_square() || !M.is_integral()) return false;
  return M.det().norm() == 1;
}

namespace {

void combinations(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

DetDivChain detdiv_chain(const MatK& M, std::optional<int> up_to) {
  if (!M.is_integral()) throw std::invalid_argument("determinantal divisors need an integral matrix");
  const int mx = std::min(M.rows(), M.cols());
  const int k_max = up_to.value_or(mx);
  if (k_max > mx || k_max < 0)
    throw std::invalid_argument("minor size " + std::to_string(k_max) + " exceeds matrix dimension");
  DetDivChain out;
  for (int k = 1; k <= k_max; ++k) {
    std::vector<std::vector<int>> rs, cs;
    combinations(M.rows(), k, rs);
    combinations(M.cols(), k, cs);
    std::vector<KElem> minors;
    for (const auto& r : rs)
      for (const auto& c : cs) {
        MatK sub(M.field(), k, k);
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j)
            sub(i, j) = M(r[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(j)]);
        KElem d = sub.det();
        if (!d.is_zero()) minors.push_back(std::move(d));
      }
    if (minors.empty()) break;  // rank reached
    out.chain.push_back(ideal_from_generators(M.field(), minors));
  }
  return out;
}

OkMatMod to_mod(const MatK& M, std::int64_t q) {
  if (!M.is_square() || !M.is_integral()) throw std::invalid_argument("to_mod needs a square integral matrix");
  const QuadField& f = M.field();
  OkMatMod r(M.rows(), q, f.omega_trace(), f.omega_norm());
  Integer t;
  const Integer qq(static_cast<long>(q));
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) {
      mpz_fdiv_r(t.get_mpz_t(), M(i, j).a().get_mpz_t(), qq.get_mpz_t());
      r.a(i, j) = t.get_si();
      mpz_fdiv_r(t.get_mpz_t(), M(i, j).b().get_mpz_t(), qq.get_mpz_t());
      r.b(i, j) = t.get_si();
    }
  return r;
}

LatticeKey row_lattice_key_unchecked(const MatK& M, std::int64_t q) {
  OkMatMod mm = to_mod(M, q);
  return hnf_mod(mm.z_row_module(q), 2 * M.cols(), q);
}

LatticeKey row_lattice_key(const MatK& M, const Integer& q) {
  auto s = similitude_factor(M);
  if (!s || *s != q) throw std::invalid_argument("row_lattice_key: matrix is not a similitude of factor " + q.get_str());
  if (!q.fits_slong_p() || q > (Integer(1) << 30)) throw std::invalid_argument("similitude factor too large for lattice key");
  return row_lattice_key_unchecked(M, q.get_si());
}

bool right_coset_equal(const MatK& M1, const MatK& M2) {
  auto q1 = similitude_factor(M1);
  auto q2 = similitude_factor(M2);
  if (!q1 || !q2) throw std::invalid_argument("right_coset_equal needs similitude matrices");
  if (*q1 != *q2) throw std::invalid_argument("right_coset_equal: mismatched similitude factors");
  // M2^{-1} = q^{-1} · J^{-1} · conj(M2)^tr · J
  const int n = M2.rows() / 2;
  MatK Jn = MatK::J(M2.field(), n);
  MatK Jinv = Jn.scaled(Rational(-1));
  MatK inv = (Jinv * M2.adjoint() * Jn).scaled(Rational(1, 1) / Rational(*q2));
  MatK x = M1 * inv;
  return x.is_integral() && in_gamma(x);
}

std::vector<MatK> gamma_generators(const QuadField& field, int n) {
  std::vector<MatK> gens;
  const MatK I = MatK::identity(field, n);
  const MatK Z(field, n, n);
  auto translation = [&](const MatK& H) { return MatK::from_blocks(I, H, Z, I); };
  for (int i = 0; i < n; ++i) {
    MatK H(field, n, n);
    H(i, i) = field.one();
    gens.push_back(translation(H));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      MatK H(field, n, n);
      H(i, j) = field.one();
      H(j, i) = field.one();
      gens.push_back(translation(H));
      MatK H2(field, n, n);
      H2(i, j) = field.omega();
      H2(j, i) = field.omega().conj();
      gens.push_back(translation(H2));
    }
  gens.push_back(MatK::J(field, n));
  auto rotation = [&](const MatK& U) { return MatK::from_blocks(U.adjoint(), Z, Z, U.inverse()); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      MatK U = I;
      U(i, j) = field.one();
      gens.push_back(rotation(U));
      U(i, j) = field.omega();
      gens.push_back(rotation(U));
    }
  // units[2] (i, or a primitive sixth root of unity) generates the unit group when present
  MatK U = I;
  const auto units = field.units();
  U(0, 0) = units.size() > 2 ? units[2] : units[1];
  gens.push_back(rotation(U));
  return gens;
}

}  // namespace hermhecke
