#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "kimura/errors.hpp"

namespace kimura::tridiag {

/// General tridiagonal matrix: lower[i] = A(i+1, i), diag[i] = A(i, i), upper[i] = A(i, i+1).
struct Matrix {
  std::vector<double> lower, diag, upper;

  explicit Matrix(std::size_t n = 0) : lower(n ? n - 1 : 0), diag(n), upper(n ? n - 1 : 0) {}
  std::size_t size() const { return diag.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = diag[i] * x[i];
      if (i > 0) v += lower[i - 1] * x[i - 1];
      if (i + 1 < n) v += upper[i] * x[i + 1];
      y[i] = v;
    }
    return y;
  }
};

/// LU factorization with partial pivoting (the LAPACK gttrf layout: one extra
/// super-diagonal of fill-in). Reusable across right-hand sides.
class LU {
 public:
  explicit LU(const Matrix& a) : n_(a.size()), dl_(a.lower), d_(a.diag), du_(a.upper), du2_(n_ > 2 ? n_ - 2 : 0, 0.0), ipiv_(n_) {
    std::iota(ipiv_.begin(), ipiv_.end(), std::size_t{0});
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        if (d_[i] != 0.0) {
          const double fact = dl_[i] / d_[i];
          dl_[i] = fact;
          d_[i + 1] -= fact * du_[i];
        }
      } else {
        const double fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const double temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n_) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        ipiv_[i] = i + 1;
      }
    }
    for (std::size_t i = 0; i < n_; ++i)
      if (d_[i] == 0.0) d_[i] = std::numeric_limits<double>::epsilon() * (1.0 + std::abs(a.diag[i]));
  }

  std::vector<double> solve(std::vector<double> b) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (ipiv_[i] == i) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i];
      }
    }
    if (n_ == 0) return b;
    b[n_ - 1] /= d_[n_ - 1];
    if (n_ > 1) b[n_ - 2] = (b[n_ - 2] - du_[n_ - 2] * b[n_ - 1]) / d_[n_ - 2];
    if (n_ > 2)
      for (std::size_t k = n_ - 2; k-- > 0;) b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
    return b;
  }

 private:
  std::size_t n_;
  std::vector<double> dl_, d_, du_, du2_;
  std::vector<std::size_t> ipiv_;
};

inline std::vector<double> solve(const Matrix& a, std::vector<double> b) { return LU(a).solve(std::move(b)); }

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
struct Symmetric {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] = A(i, i+1) = A(i+1, i)

  std::size_t size() const { return diag.size(); }

  /// Number of eigenvalues strictly below sigma (Sturm sequence count).
  std::size_t count_below(double sigma) const {
    const double tiny = std::numeric_limits<double>::min();
    std::size_t count = 0;
    double d = diag[0] - sigma;
    if (d < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
      if (std::abs(d) < tiny) d = -tiny;
      d = diag[i] - sigma - off[i - 1] * off[i - 1] / d;
      if (d < 0.0) ++count;
    }
    return count;
  }

  /// Gershgorin bounds on the spectrum.
  std::pair<double, double> gershgorin() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(off[i - 1]);
      if (i < off.size()) r += std::abs(off[i]);
      lo = std::min(lo, diag[i] - r);
      hi = std::max(hi, diag[i] + r);
    }
    return {lo, hi};
  }
};

/// The k-th smallest eigenvalue (k = 0, 1, ...) by bisection on the Sturm count.
inline double eigenvalue_bisect(const Symmetric& a, std::size_t k) {
  auto [lo, hi] = a.gershgorin();
  const double scale = std::max(std::abs(lo), std::abs(hi));
  lo -= 1e-12 * scale;
  hi += 1e-12 * scale;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (a.count_below(mid) > k)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

/// Unit eigenvector for an accurately known eigenvalue by inverse iteration.
/// Throws NumericalError when the Rayleigh residual fails to settle.
inline std::vector<double> eigenvector_inverse_iteration(const Symmetric& a, double lambda) {
  const std::size_t n = a.size();
  Matrix shifted(n);
  const double shift_nudge = std::max(std::abs(lambda), 1.0) * 1e-13;
  for (std::size_t i = 0; i < n; ++i) shifted.diag[i] = a.diag[i] - (lambda + shift_nudge);
  for (std::size_t i = 0; i + 1 < n; ++i) shifted.lower[i] = shifted.upper[i] = a.off[i];
  const LU lu(shifted);

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double e : x) s += e * e;
    s = std::sqrt(s);
    for (double& e : x) e /= s;
  };
  normalize(v);
  for (int iter = 0; iter < 6; ++iter) {
    v = lu.solve(std::move(v));
    normalize(v);
  }

  Matrix plain(n);
  plain.diag = a.diag;
  plain.lower = a.off;
  plain.upper = a.off;
  const std::vector<double> av = plain.apply(v);
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(av[i] - lambda * v[i]));
  auto [glo, ghi] = a.gershgorin();
  const double norm = std::max(std::abs(glo), std::abs(ghi));
  if (!(residual <= 1e-8 * norm)) throw NumericalError("inverse iteration did not converge");
  return v;
}

}  // namespace kimura::tridiag
