#include "irsec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "irsec/errors.hpp"

namespace irsec {

namespace {

bool all_finite(std::span<const cplx> xs) {
  return std::all_of(xs.begin(), xs.end(), [](const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

void require_same_shape(const CMat& a, const CMat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DomainError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
  }
}

// Cyclic Jacobi on a dense real symmetric matrix stored row-major.
// On return `s` holds the eigenvalues on its diagonal and `v` the eigenvectors
// as columns.
void symmetric_jacobi(std::vector<double>& s, std::vector<double>& v, std::size_t n) {
  v.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto at = [n](std::vector<double>& m, std::size_t r, std::size_t c) -> double& {
    return m[r * n + c];
  };

  double total = 0.0;
  for (double x : s) total += x * x;
  if (total == 0.0) return;

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += at(s, p, q) * at(s, p, q);
    if (off <= 1e-32 * total) return;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(s, p, q);
        if (apq == 0.0) continue;
        const double theta = (at(s, q, q) - at(s, p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        for (std::size_t r = 0; r < n; ++r) {
          const double srp = at(s, r, p);
          const double srq = at(s, r, q);
          at(s, r, p) = c * srp - sn * srq;
          at(s, r, q) = sn * srp + c * srq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double spr = at(s, p, r);
          const double sqr = at(s, q, r);
          at(s, p, r) = c * spr - sn * sqr;
          at(s, q, r) = sn * spr + c * sqr;
        }
        at(s, p, q) = 0.0;
        at(s, q, p) = 0.0;

        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = at(v, r, p);
          const double vrq = at(v, r, q);
          at(v, r, p) = c * vrp - sn * vrq;
          at(v, r, q) = sn * vrp + c * vrq;
        }
      }
    }
  }
}

// Real symmetric embedding [[Re A, -Im A], [Im A, Re A]] of a Hermitian A.
// Every eigenvalue of A appears twice; an eigenvector [x; y] maps back to the
// complex eigenvector x + i y.
std::vector<double> real_embedding(const CMat& a) {
  const std::size_t n = a.rows();
  const std::size_t m = 2 * n;
  std::vector<double> s(m * m);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      // Symmetrize on the fly; callers already checked near-Hermitian.
      const cplx z = 0.5 * (a(r, c) + std::conj(a(c, r)));
      s[r * m + c] = z.real();
      s[(r + n) * m + (c + n)] = z.real();
      s[(r + n) * m + c] = z.imag();
      s[r * m + (c + n)] = -z.imag();
    }
  }
  return s;
}

void require_hermitian(const CMat& a, const char* op) {
  if (!a.is_square()) {
    throw DomainError(std::string(op) + ": matrix is not square (" + std::to_string(a.rows()) +
                      "x" + std::to_string(a.cols()) + ")");
  }
  if (!is_hermitian(a)) {
    throw DomainError(std::string(op) + ": matrix is not Hermitian");
  }
}

}  // namespace

// ---------------------------------------------------------------- CVec

CVec::CVec(std::vector<cplx> entries) : data_(std::move(entries)) {
  if (!all_finite(data_)) throw DomainError("CVec: non-finite entry");
}

CVec CVec::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DomainError("CVec::basis: index out of range");
  CVec e(dim);
  e[index] = 1.0;
  return e;
}

double CVec::squared_norm() const {
  double acc = 0.0;
  for (const cplx& z : data_) acc += std::norm(z);
  return acc;
}

double CVec::norm() const { return std::sqrt(squared_norm()); }

CVec CVec::normalized() const {
  const double n = norm();
  if (n == 0.0) throw DomainError("CVec::normalized: zero vector");
  CVec out = *this;
  out *= 1.0 / n;
  return out;
}

CVec& CVec::operator+=(const CVec& other) {
  if (size() != other.size()) throw DomainError("CVec +=: size mismatch");
  for (std::size_t i = 0; i < size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CVec& CVec::operator-=(const CVec& other) {
  if (size() != other.size()) throw DomainError("CVec -=: size mismatch");
  for (std::size_t i = 0; i < size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CVec& CVec::operator*=(cplx s) {
  for (cplx& z : data_) z *= s;
  return *this;
}

CVec operator+(CVec a, const CVec& b) { return a += b; }
CVec operator-(CVec a, const CVec& b) { return a -= b; }
CVec operator*(cplx s, CVec v) { return v *= s; }

cplx dot(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) throw DomainError("dot: size mismatch");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

// ---------------------------------------------------------------- CMat

CMat::CMat(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows_ * cols_ != data_.size()) {
    throw DomainError("CMat: " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                      " needs " + std::to_string(rows_ * cols_) + " entries, got " +
                      std::to_string(data_.size()));
  }
  if (!all_finite(data_)) throw DomainError("CMat: non-finite entry");
}

CMat::CMat(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DomainError("CMat: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite(data_)) throw DomainError("CMat: non-finite entry");
}

CMat CMat::identity(std::size_t n) {
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMat CMat::diagonal(std::span<const cplx> diag) {
  CMat m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

CVec CMat::row(std::size_t r) const {
  CVec v(cols_);
  for (std::size_t c = 0; c < cols_; ++c) v[c] = (*this)(r, c);
  return v;
}

CVec CMat::col(std::size_t c) const {
  CVec v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

CMat CMat::adjoint() const {
  CMat out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

double CMat::frobenius_norm() const {
  double acc = 0.0;
  for (const cplx& z : data_) acc += std::norm(z);
  return std::sqrt(acc);
}

double CMat::max_abs() const {
  double m = 0.0;
  for (const cplx& z : data_) m = std::max(m, std::abs(z));
  return m;
}

CMat& CMat::operator+=(const CMat& other) {
  require_same_shape(*this, other, "CMat +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CMat& CMat::operator-=(const CMat& other) {
  require_same_shape(*this, other, "CMat -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CMat& CMat::operator*=(cplx s) {
  for (cplx& z : data_) z *= s;
  return *this;
}

CMat operator+(CMat a, const CMat& b) { return a += b; }
CMat operator-(CMat a, const CMat& b) { return a -= b; }
CMat operator*(cplx s, CMat m) { return m *= s; }

CMat operator*(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows()) throw DomainError("CMat *: inner dimension mismatch");
  CMat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

CVec operator*(const CMat& a, const CVec& x) {
  if (a.cols() != x.size()) throw DomainError("CMat * CVec: dimension mismatch");
  CVec out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * x[k];
    out[i] = acc;
  }
  return out;
}

CMat outer(const CVec& u, const CVec& v) {
  CMat out(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = u[i] * std::conj(v[j]);
  return out;
}

CMat gram(const CMat& a) {
  const std::size_t n = a.cols();
  CMat out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      cplx acc = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) acc += std::conj(a(r, i)) * a(r, j);
      out(i, j) = acc;
      out(j, i) = std::conj(acc);
    }
    out(i, i) = out(i, i).real();
  }
  return out;
}

bool is_hermitian(const CMat& a, double rel_tol) {
  if (!a.is_square()) return false;
  double diff = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) diff += std::norm(a(r, c) - std::conj(a(c, r)));
  return std::sqrt(diff) <= rel_tol * std::max(a.frobenius_norm(), 1e-300);
}

// ---------------------------------------------------------------- eigen

CVec canonical_phase(CVec v) {
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    // Strictly greater keeps the first index on ties.
    if (m > best_mag * (1.0 + 1e-12)) {
      best_mag = m;
      best = i;
    }
  }
  if (best_mag <= 0.0) return v;
  const cplx rot = std::conj(v[best]) / best_mag;
  v *= rot;
  v[best] = cplx(std::abs(v[best]), 0.0);
  return v;
}

std::vector<double> hermitian_eigenvalues(const CMat& a) {
  require_hermitian(a, "hermitian_eigenvalues");
  const std::size_t n = a.rows();
  std::vector<double> s = real_embedding(a);
  std::vector<double> v;
  symmetric_jacobi(s, v, 2 * n);
  std::vector<double> diag(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) diag[i] = s[i * 2 * n + i];
  std::sort(diag.begin(), diag.end(), std::greater<>());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (diag[2 * i] + diag[2 * i + 1]);
  return out;
}

EigPair hermitian_eig_max(const CMat& a) {
  require_hermitian(a, "hermitian_eig_max");
  const std::size_t n = a.rows();
  if (n == 0) throw DomainError("hermitian_eig_max: empty matrix");
  const std::size_t m = 2 * n;

  std::vector<double> s = real_embedding(a);
  std::vector<double> v;
  symmetric_jacobi(s, v, m);

  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) top = std::max(top, s[i * m + i]);

  const double scale = std::max(a.frobenius_norm(), 1e-300);
  const double cluster_tol = 1e-10 * scale;

  // Project the real image of the seed (1,...,1)/sqrt(n) onto the top
  // eigenspace.
  std::vector<double> seed(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) seed[i] = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> proj(m, 0.0);
  std::size_t first_in_cluster = m;
  for (std::size_t k = 0; k < m; ++k) {
    if (s[k * m + k] < top - cluster_tol) continue;
    if (first_in_cluster == m) first_in_cluster = k;
    double coeff = 0.0;
    for (std::size_t i = 0; i < m; ++i) coeff += v[i * m + k] * seed[i];
    for (std::size_t i = 0; i < m; ++i) proj[i] += coeff * v[i * m + k];
  }

  CVec vec(n);
  for (std::size_t i = 0; i < n; ++i) vec[i] = cplx(proj[i], proj[i + n]);
  if (vec.norm() < 1e-6) {
    for (std::size_t i = 0; i < n; ++i)
      vec[i] = cplx(v[i * m + first_in_cluster], v[(i + n) * m + first_in_cluster]);
  }
  vec = canonical_phase(vec.normalized());

  const CVec av = a * vec;
  const double value = dot(vec, av).real();
  const double residual = (av - cplx(value) * vec).norm();
  if (!(residual <= 1e-8 * scale)) {
    throw NumericalError("hermitian_eig_max: eigenvector residual " + std::to_string(residual) +
                             " exceeds tolerance",
                         residual);
  }
  return EigPair{value, std::move(vec)};
}

// ---------------------------------------------------------------- cholesky

CMat cholesky(const CMat& a) {
  require_hermitian(a, "cholesky");
  const std::size_t n = a.rows();
  CMat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NotPositiveDefiniteError(
          "cholesky: non-positive pivot " + std::to_string(d) + " at index " + std::to_string(j),
          j);
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      // Lower triangle of A; upper is its conjugate by hermiticity.
      cplx acc = 0.5 * (a(i, j) + std::conj(a(j, i)));
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * std::conj(l(j, k));
      l(i, j) = acc / ljj;
    }
  }
  return l;
}

CVec solve_lower(const CMat& l, const CVec& b) {
  const std::size_t n = l.rows();
  if (!l.is_square() || b.size() != n) throw DomainError("solve_lower: dimension mismatch");
  CVec x(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc = b[i];
    for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * x[k];
    x[i] = acc / l(i, i);
  }
  return x;
}

CVec solve_lower_adjoint(const CMat& l, const CVec& b) {
  const std::size_t n = l.rows();
  if (!l.is_square() || b.size() != n) throw DomainError("solve_lower_adjoint: dimension mismatch");
  CVec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    cplx acc = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= std::conj(l(k, ii)) * x[k];
    x[ii] = acc / std::conj(l(ii, ii));
  }
  return x;
}

CMat solve_lower(const CMat& l, const CMat& b) {
  if (!l.is_square() || b.rows() != l.rows()) throw DomainError("solve_lower: dimension mismatch");
  CMat x(b.rows(), b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    const CVec xc = solve_lower(l, b.col(c));
    for (std::size_t r = 0; r < b.rows(); ++r) x(r, c) = xc[r];
  }
  return x;
}

// ---------------------------------------------------------------- special functions

double gamma_upper_regularized(int m, double x) {
  if (m < 1) throw DomainError("gamma_upper_regularized: order must be >= 1");
  if (!(x >= 0.0)) throw DomainError("gamma_upper_regularized: argument must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;

  if (x < 500.0) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < m; ++k) {
      term *= x / k;
      sum += term;
    }
    return std::clamp(std::exp(-x) * sum, 0.0, 1.0);
  }
  // Large x: sum in log space so x^k / k! cannot overflow before exp(-x).
  const double lx = std::log(x);
  double acc = 0.0;
  for (int k = 0; k < m; ++k) acc += std::exp(k * lx - std::lgamma(k + 1.0) - x);
  return std::clamp(acc, 0.0, 1.0);
}

double spectral_norm_sq_of_channel(const CMat& h) {
  if (h.empty()) throw DomainError("spectral_norm_sq_of_channel: empty channel");
  const CMat g = gram(h);
  if (g.max_abs() == 0.0) return 0.0;
  return std::max(0.0, hermitian_eig_max(g).value);
}

}  // namespace irsec
