#pragma once

// Small dense complex linear algebra and the special functions behind the
// closed-form outage expression. Matrices here are tiny (a handful of
// antennas), so everything is written for clarity over asymptotics.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace irsec {

using cplx = std::complex<double>;

class CVec {
 public:
  CVec() = default;
  explicit CVec(std::size_t dim) : data_(dim) {}
  // Throws DomainError on non-finite entries.
  explicit CVec(std::vector<cplx> entries);
  CVec(std::initializer_list<cplx> entries) : CVec(std::vector<cplx>(entries)) {}

  static CVec zeros(std::size_t dim) { return CVec(dim); }
  static CVec basis(std::size_t dim, std::size_t index);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }

  std::span<const cplx> entries() const noexcept { return data_; }
  std::span<cplx> entries() noexcept { return data_; }

  double norm() const;
  double squared_norm() const;
  CVec normalized() const;

  CVec& operator+=(const CVec& other);
  CVec& operator-=(const CVec& other);
  CVec& operator*=(cplx s);

  bool operator==(const CVec&) const = default;

 private:
  std::vector<cplx> data_;
};

CVec operator+(CVec a, const CVec& b);
CVec operator-(CVec a, const CVec& b);
CVec operator*(cplx s, CVec v);

// Hermitian inner product a^H b.
cplx dot(const CVec& a, const CVec& b);

// Row-major complex matrix.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  // Throws DomainError when rows*cols != entries.size() or an entry is not finite.
  CMat(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  CMat(std::initializer_list<std::initializer_list<cplx>> rows);

  static CMat zeros(std::size_t rows, std::size_t cols) { return CMat(rows, cols); }
  static CMat identity(std::size_t n);
  static CMat diagonal(std::span<const cplx> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const cplx> entries() const noexcept { return data_; }
  std::span<cplx> entries() noexcept { return data_; }

  CVec row(std::size_t r) const;
  CVec col(std::size_t c) const;

  CMat adjoint() const;
  double frobenius_norm() const;
  double max_abs() const;

  CMat& operator+=(const CMat& other);
  CMat& operator-=(const CMat& other);
  CMat& operator*=(cplx s);

  bool operator==(const CMat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

CMat operator+(CMat a, const CMat& b);
CMat operator-(CMat a, const CMat& b);
CMat operator*(cplx s, CMat m);
CMat operator*(const CMat& a, const CMat& b);
CVec operator*(const CMat& a, const CVec& x);

// Outer product u v^H.
CMat outer(const CVec& u, const CVec& v);

// A^H A without forming A^H.
CMat gram(const CMat& a);

bool is_hermitian(const CMat& a, double rel_tol = 1e-10);

struct EigPair {
  double value = 0.0;
  CVec vector;
};

// Largest eigenvalue of a Hermitian matrix and a unit eigenvector.
//
// The eigenvector's global phase is fixed so that its largest-magnitude entry
// is real and nonnegative. When the top eigenvalue is repeated, the returned
// vector is the normalized projection of the all-ones seed (1,...,1)/sqrt(n)
// onto the top eigenspace, which is where a shifted power iteration started
// from that seed ends up.
EigPair hermitian_eig_max(const CMat& a);

// All eigenvalues of a Hermitian matrix, descending.
std::vector<double> hermitian_eigenvalues(const CMat& a);

// Lower-triangular L with L L^H = A for Hermitian positive definite A.
CMat cholesky(const CMat& a);

// Solve L x = b with L lower triangular.
CVec solve_lower(const CMat& l, const CVec& b);
// Solve L^H x = b with L lower triangular.
CVec solve_lower_adjoint(const CMat& l, const CVec& b);
// L^{-1} B, column by column.
CMat solve_lower(const CMat& l, const CMat& b);

// Regularized upper incomplete Gamma Q(m, x) = Gamma(m, x) / Gamma(m) for
// integer order, via the finite series exp(-x) * sum_{k<m} x^k / k!.
double gamma_upper_regularized(int m, double x);

// lambda_max(H^H H), the squared spectral norm.
double spectral_norm_sq_of_channel(const CMat& h);

// Phase-normalize v so its largest-magnitude entry is real and >= 0.
CVec canonical_phase(CVec v);

}  // namespace irsec
