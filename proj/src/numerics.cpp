#include "hsr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace hsr {

CMatrix::CMatrix(std::size_t rows, std::size_t cols, cplx fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

CMatrix::CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("CMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CVector CMatrix::column(std::size_t c) const {
  CVector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void CMatrix::set_column(std::size_t c, std::span<const cplx> values) {
  if (values.size() != rows_) throw std::invalid_argument("CMatrix::set_column: size mismatch");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

CMatrix CMatrix::transpose() const {
  CMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("CMatrix: dimension mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("CMatrix: dimension mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
  for (auto& x : data_) x *= s;
  return *this;
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& x : data_) m = std::max(m, std::abs(x));
  return m;
}

double CMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& x : data_) s += std::norm(x);
  return std::sqrt(s);
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("CMatrix: dimension mismatch in *");
  CMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{}) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

CVector operator*(const CMatrix& a, std::span<const cplx> v) {
  if (a.cols() != v.size()) throw std::invalid_argument("CMatrix: dimension mismatch in matvec");
  CVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx acc{};
    auto r = a.row(i);
    for (std::size_t j = 0; j < v.size(); ++j) acc += r[j] * v[j];
    out[i] = acc;
  }
  return out;
}

void require_finite(std::span<const cplx> values, const char* what) {
  for (const auto& x : values) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      throw NumericsError(std::string(what) + ": non-finite entry");
  }
}

cplx dirichlet_kernel(double k, std::size_t n) {
  if (n == 0) throw std::invalid_argument("dirichlet_kernel: N must be >= 1");
  const double nd = static_cast<double>(n);
  const cplx phase = std::polar(1.0, -kPi * k * (nd - 1.0) / nd);
  if (k == std::round(k) && std::abs(k) < 9.0e15) {
    const auto ki = static_cast<long long>(k);
    if (ki % static_cast<long long>(n) == 0) return nd * phase;
    return {0.0, 0.0};
  }
  const double s = std::sin(kPi * k / nd);
  if (std::abs(s) < 1e-12) return nd * phase;
  return phase * (std::sin(kPi * k) / s);
}

double bessel_j0(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("bessel_j0: non-finite argument");
  return std::cyl_bessel_j(0.0, std::abs(x));
}

CVector dft_direct(std::span<const cplx> v) {
  const std::size_t n = v.size();
  CVector out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{};
    for (std::size_t t = 0; t < n; ++t) {
      // reduce k*t mod n before forming the angle to keep the phase exact
      const double ang = -kTwoPi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += v[t] * std::polar(1.0, ang);
    }
    out[k] = acc;
  }
  return out;
}

CVector idft_direct(std::span<const cplx> v) {
  const std::size_t n = v.size();
  CVector out(n);
  for (std::size_t t = 0; t < n; ++t) {
    cplx acc{};
    for (std::size_t k = 0; k < n; ++k) {
      const double ang = kTwoPi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += v[k] * std::polar(1.0, ang);
    }
    out[t] = acc / static_cast<double>(n);
  }
  return out;
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

namespace {

const CVector& twiddles(std::size_t n) {
  thread_local std::unordered_map<std::size_t, CVector> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  CVector w(n / 2);
  for (std::size_t i = 0; i < n / 2; ++i)
    w[i] = std::polar(1.0, -kTwoPi * static_cast<double>(i) / static_cast<double>(n));
  return cache.emplace(n, std::move(w)).first->second;
}

}  // namespace

void fft_radix2(std::span<cplx> v, bool inverse) {
  const std::size_t n = v.size();
  if (!is_power_of_two(n)) throw std::invalid_argument("fft_radix2: length must be a power of two");
  if (n == 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(v[i], v[j]);
  }

  const CVector& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cplx tw = w[k * stride];
        if (inverse) tw = std::conj(tw);
        const cplx a = v[start + k];
        const cplx b = v[start + k + half] * tw;
        v[start + k] = a + b;
        v[start + k + half] = a - b;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : v) x *= scale;
  }
}

CVector dft(std::span<const cplx> v) {
  if (v.empty()) throw std::invalid_argument("dft: empty input");
  if (!is_power_of_two(v.size())) return dft_direct(v);
  CVector out(v.begin(), v.end());
  fft_radix2(out, false);
  return out;
}

CVector idft(std::span<const cplx> v) {
  if (v.empty()) throw std::invalid_argument("idft: empty input");
  if (!is_power_of_two(v.size())) return idft_direct(v);
  CVector out(v.begin(), v.end());
  fft_radix2(out, true);
  return out;
}

CMatrix invert(const CMatrix& a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("invert: matrix must be square");
  CMatrix work = a;
  CMatrix inv = CMatrix::identity(n);
  const double scale = std::max(a.max_abs(), std::numeric_limits<double>::min());
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
    if (std::abs(work(pivot, col)) <= 1e-14 * scale)
      throw SingularMatrixError("invert: matrix is singular");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(work(col, c), work(pivot, c));
        std::swap(inv(col, c), inv(pivot, c));
      }
    }
    const cplx d = 1.0 / work(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      work(col, c) *= d;
      inv(col, c) *= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const cplx f = work(r, col);
      if (f == cplx{}) continue;
      for (std::size_t c = 0; c < n; ++c) {
        work(r, c) -= f * work(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

namespace {

double one_norm(const CMatrix& m) {
  double best = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) s += std::abs(m(r, c));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

double condition_number(const CMatrix& a) {
  if (a.rows() < a.cols() || a.cols() == 0)
    throw std::invalid_argument("condition_number: expected a tall matrix");
  const CMatrix gram = a.adjoint() * a;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (gram.rows() == 1) return gram(0, 0).real() > 0.0 ? 1.0 : inf;
  if (gram.rows() == 2) {
    const double p = gram(0, 0).real();
    const double q = gram(1, 1).real();
    const double mean = 0.5 * (p + q);
    const double rad = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(gram(0, 1)));
    const double lmax = mean + rad;
    const double lmin = mean - rad;
    if (lmin <= lmax * 1e-30) return inf;
    return std::sqrt(lmax / lmin);
  }
  try {
    return std::sqrt(one_norm(gram) * one_norm(invert(gram)));
  } catch (const SingularMatrixError&) {
    return inf;
  }
}

CMatrix pseudo_inverse(const CMatrix& a, double max_condition) {
  if (a.rows() < a.cols() || a.cols() == 0)
    throw std::invalid_argument("pseudo_inverse: expected m >= Q >= 1");
  require_finite(a, "pseudo_inverse");
  const double cond = condition_number(a);
  if (!(cond <= max_condition))
    throw IdentifiabilityError("pseudo_inverse: columns not separable (condition number " +
                               std::to_string(cond) + ")");
  const CMatrix ah = a.adjoint();
  const CMatrix gram = ah * a;
  CMatrix gram_inv;
  if (gram.rows() == 2) {
    const cplx det = gram(0, 0) * gram(1, 1) - gram(0, 1) * gram(1, 0);
    gram_inv = CMatrix{{gram(1, 1) / det, -gram(0, 1) / det}, {-gram(1, 0) / det, gram(0, 0) / det}};
  } else {
    gram_inv = invert(gram);
  }
  return gram_inv * ah;
}

CMatrix regularized_hermitian_solve(const CMatrix& r, double load, const CMatrix& b) {
  const std::size_t n = r.rows();
  if (n == 0 || n != r.cols()) throw std::invalid_argument("regularized_hermitian_solve: R must be square");
  if (b.rows() != n) throw std::invalid_argument("regularized_hermitian_solve: B row mismatch");
  if (!(load >= 0.0) || !std::isfinite(load))
    throw std::invalid_argument("regularized_hermitian_solve: load must be finite and >= 0");
  require_finite(r, "regularized_hermitian_solve(R)");
  require_finite(b, "regularized_hermitian_solve(B)");

  const double tol = 1e-10 * std::max(1.0, r.max_abs());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (std::abs(r(i, j) - std::conj(r(j, i))) > tol)
        throw std::invalid_argument("regularized_hermitian_solve: R is not Hermitian");

  // Cholesky of M = R + load I, lower triangular L with M = L L^H.
  CMatrix l(n, n);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, r(i, i).real() + load);
  const double pivot_floor = 1e-13 * std::max(max_diag, std::numeric_limits<double>::min());
  for (std::size_t j = 0; j < n; ++j) {
    double d = r(j, j).real() + load;
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (d <= pivot_floor) throw SingularMatrixError("regularized_hermitian_solve: system is singular");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = r(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }

  CMatrix x = b;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    // forward: L y = b
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    // backward: L^H x = y
    for (std::size_t ii = n; ii-- > 0;) {
      cplx s = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l(k, ii)) * x(k, c);
      x(ii, c) = s / l(ii, ii);
    }
  }
  return x;
}

}  // namespace hsr
