#pragma once

// Shared vocabulary for the conenav library: linear-algebra aliases, the error
// hierarchy, central finite differences and a bracketed scalar root finder.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conenav {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation outside the domain of a field or metric (division by zero,
/// sqrt of a negative number, vector outside a conic domain).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Failure of a numerical procedure: bracketing, step failure, singular tensors.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Violated input invariant (strong wind, empty cone, bad arity ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Target not reachable within the search horizon.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  enum class Kind { syntax, unknown_identifier, arity };

  ParseError(Kind kind, std::size_t offset, const std::string& what)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), kind_(kind), offset_(offset), message_(what) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }
  /// Message without the location suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  Kind kind_;
  std::size_t offset_;
  std::string message_;
};

/// Step sizes for central differences. Steps are relative: the effective step
/// is h * max(1, |base|).
struct DiffConfig {
  double h1 = 1e-5;
  double h2 = 1e-4;
  // Second derivatives: combine steps h2 and h2/2 to cancel the O(h^2) term.
  bool richardson = false;

  void validate() const {
    if (!(h1 > 0.0) || !(h2 > 0.0) || h2 < h1) {
      throw ValidationError("DiffConfig requires h1, h2 > 0 and h2 >= h1");
    }
  }
};

using ScalarFn = std::function<double(const Vec&)>;

inline double step_scale(const Vec& base) { return std::max(1.0, base.norm()); }

/// Central first derivative of f at base along dir1 or, when dir2 is given, the
/// mixed second derivative d^2 f / (d dir1 d dir2).
inline double directional_derivative(const ScalarFn& f, const Vec& base, const Vec& dir1,
                                     const std::optional<Vec>& dir2 = std::nullopt,
                                     const DiffConfig& cfg = {}) {
  if (!dir2) {
    const double h = cfg.h1 * step_scale(base);
    return (f(base + h * dir1) - f(base - h * dir1)) / (2.0 * h);
  }
  const double h = cfg.h2 * step_scale(base);
  const Vec& u = dir1;
  const Vec& w = *dir2;
  const double fpp = f(base + h * u + h * w);
  const double fpm = f(base + h * u - h * w);
  const double fmp = f(base - h * u + h * w);
  const double fmm = f(base - h * u - h * w);
  return (fpp - fpm - fmp + fmm) / (4.0 * h * h);
}

/// Central-difference gradient with the first-derivative step.
inline Vec numeric_gradient(const ScalarFn& f, const Vec& base, const DiffConfig& cfg = {}) {
  const Eigen::Index n = base.size();
  Vec grad(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    grad(i) = directional_derivative(f, base, Vec::Unit(n, i), std::nullopt, cfg);
  }
  return grad;
}

/// Full second-derivative matrix from mixed central differences.
inline Mat numeric_hessian(const ScalarFn& f, const Vec& base, const DiffConfig& cfg = {}) {
  if (cfg.richardson) {
    DiffConfig coarse = cfg;
    coarse.richardson = false;
    DiffConfig fine = coarse;
    fine.h2 = 0.5 * cfg.h2;
    fine.h1 = std::min(fine.h1, fine.h2);
    return (4.0 * numeric_hessian(f, base, fine) - numeric_hessian(f, base, coarse)) / 3.0;
  }
  const Eigen::Index n = base.size();
  Mat hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double value =
          directional_derivative(f, base, Vec::Unit(n, i), Vec(Vec::Unit(n, j)), cfg);
      hess(i, j) = value;
      hess(j, i) = value;
    }
  }
  return hess;
}

/// Root of f on [lo, hi] where f(lo) and f(hi) have opposite signs: bisection
/// until the bracket is small, then safeguarded Newton using df when provided
/// (secant otherwise). Terminates when the step falls below xtol * max(1, |x|).
inline double bracketed_root(const std::function<double(double)>& f, double lo, double hi,
                             double xtol = 1e-15,
                             const std::function<double(double)>& df = nullptr) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NumericalError("bracketed_root: f(lo) and f(hi) have the same sign");
  }
  // Coarse bisection first; Newton from a 1e-3 relative bracket converges in a
  // handful of steps for the smooth monotone functions used in this library.
  for (int it = 0; it < 200 && (hi - lo) > 1e-3 * std::max(1.0, std::abs(lo) + std::abs(hi));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  double x = (flo * hi - fhi * lo) / (flo - fhi);
  for (int it = 0; it < 100; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    double slope = df ? df(x) : (fhi - flo) / (hi - lo);
    double next = (slope != 0.0 && std::isfinite(slope)) ? x - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= xtol * std::max(1.0, std::abs(x)) || (hi - lo) <= xtol * std::max(1.0, std::abs(x))) {
      return x;
    }
  }
  return x;
}

/// Golden-section minimization of a unimodal function on [lo, hi].
inline double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                 double xtol = 1e-12, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Angle in radians between two nonzero vectors, insensitive to orientation.
inline double line_angle(const Vec& a, const Vec& b) {
  const Vec bu = b / b.norm();
  const double along = a.dot(bu);
  const double across = (a - along * bu).norm();
  return std::atan2(across, std::abs(along));
}

/// Orthonormal basis (columns) of the Euclidean orthogonal complement of the
/// span of the given columns.
inline Mat orthogonal_complement(const Mat& columns) {
  const Eigen::Index n = columns.rows();
  if (columns.cols() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(columns.transpose(), Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 1e-12 * std::max(1.0, smax)) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

/// Deterministic, roughly uniform unit directions in R^n (n = 1, 2, 3): the two
/// signs in 1-D, equally spaced angles in 2-D, a Fibonacci sphere in 3-D.
inline std::vector<Vec> unit_directions(int n, int count) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  const double pi = 3.14159265358979323846;
  for (int k = 0; k < count; ++k) {
    Vec d(n);
    if (n == 1) {
      d(0) = (k % 2 == 0) ? 1.0 : -1.0;
    } else if (n == 2) {
      const double a = 2.0 * pi * k / count;
      d << std::cos(a), std::sin(a);
    } else if (n == 3) {
      const double golden = pi * (3.0 - std::sqrt(5.0));
      const double z = count == 1 ? 1.0 : 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      d << r * std::cos(golden * k), r * std::sin(golden * k), z;
    } else {
      throw ValidationError("unit_directions supports dimensions 1 to 3");
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace conenav
