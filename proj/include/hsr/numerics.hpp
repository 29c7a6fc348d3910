#pragma once
// Complex arithmetic, transforms and small dense linear algebra shared by
// every stage of the link simulator.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsr {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a tall basis cannot separate its columns (equal or aliased tap
/// delays, too few pilots).
class IdentifiabilityError : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class SingularMatrixError : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

/// Dense row-major complex matrix. Small sizes only (Wiener blocks, delay
/// bases); no expression templates.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols, cplx fill = {});
  CMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static CMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<cplx> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const cplx> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  CVector column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const cplx> values);

  const std::vector<cplx>& data() const noexcept { return data_; }
  std::vector<cplx>& data() noexcept { return data_; }

  CMatrix adjoint() const;
  CMatrix transpose() const;

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(cplx s);

  /// Largest absolute entry.
  double max_abs() const;
  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
CVector operator*(const CMatrix& a, std::span<const cplx> v);

/// Throws NumericsError if any entry is NaN or infinite.
void require_finite(std::span<const cplx> values, const char* what);
inline void require_finite(const CMatrix& m, const char* what) { require_finite(m.data(), what); }

/// Dirichlet kernel G(k) = sum_{n=0}^{N-1} exp(-j 2 pi k n / N) for real k,
/// evaluated in closed form. Integer k not divisible by N returns exactly 0;
/// k = 0 (mod N) returns the limit N * exp(-j pi k (N-1)/N).
cplx dirichlet_kernel(double k, std::size_t n);

/// Bessel function of the first kind, order zero.
double bessel_j0(double x);

// Transforms. Forward uses exp(-j 2 pi k n / N) without scaling; inverse
// carries the 1/N factor so that a unit subcarrier maps to amplitude 1/N.
CVector dft_direct(std::span<const cplx> v);
CVector idft_direct(std::span<const cplx> v);
bool is_power_of_two(std::size_t n) noexcept;
/// In-place iterative radix-2 FFT. Length must be a power of two.
void fft_radix2(std::span<cplx> v, bool inverse);
/// Radix-2 for power-of-two lengths, direct evaluation otherwise.
CVector dft(std::span<const cplx> v);
CVector idft(std::span<const cplx> v);

/// Inverse of a small square matrix by Gauss-Jordan with partial pivoting.
CMatrix invert(const CMatrix& a);

/// 2-norm condition number of a tall matrix A (m x Q). Exact for Q <= 2,
/// sqrt of the 1-norm condition of A^H A otherwise.
double condition_number(const CMatrix& a);

/// Moore-Penrose pseudo-inverse (A^H A)^{-1} A^H of a tall full-column-rank
/// matrix. Throws IdentifiabilityError when cond(A) > max_condition.
CMatrix pseudo_inverse(const CMatrix& a, double max_condition = 1e6);

/// Solves (R + load I) X = B for Hermitian positive semi-definite R by
/// Cholesky factorization.
CMatrix regularized_hermitian_solve(const CMatrix& r, double load, const CMatrix& b);

}  // namespace hsr
