#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "smalldev/error.hpp"

namespace smalldev::detail {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Lower tail P{N <= x}.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

/// Upper tail P{N > x}, accurate far into the right tail.
inline double normal_ccdf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

/// Inverse of the standard normal cdf (Wichura, AS 241, PPND16). Relative
/// accuracy about 1e-16 over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
  if (!(p < 1.0)) return std::numeric_limits<double>::infinity();
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
               45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
               21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
               1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
               0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
               0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

/// Probability mass of [a,b] under N(0,1) together with the inverse-cdf
/// image of the fraction u of that mass. Works from whichever tail keeps
/// the difference well conditioned.
struct TruncatedDraw {
  double mass;
  double z;
};

inline TruncatedDraw truncated_normal_draw(double a, double b, double u) {
  if (a >= 0.0) {
    const double qa = normal_ccdf(a);
    const double qb = normal_ccdf(b);
    const double mass = qa - qb;
    if (!(mass > 0.0)) return {0.0, a};
    return {mass, -normal_quantile(qa - u * mass)};
  }
  if (b <= 0.0) {
    const double pa = normal_cdf(a);
    const double pb = normal_cdf(b);
    const double mass = pb - pa;
    if (!(mass > 0.0)) return {0.0, b};
    return {mass, normal_quantile(pa + u * mass)};
  }
  const double pa = normal_cdf(a);
  const double mass = normal_cdf(b) - pa;
  if (!(mass > 0.0)) return {0.0, 0.0};
  return {mass, normal_quantile(pa + u * mass)};
}

/// Mass of [a,b] under N(0,1) alone.
inline double normal_interval_mass(double a, double b) {
  if (a >= 0.0) return normal_ccdf(a) - normal_ccdf(b);
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return normal_cdf(b) - normal_cdf(a);
}

/// Streaming log-sum-exp accumulator; order of additions is the caller's
/// responsibility when bit-stable output is needed.
class LogSumExp {
 public:
  void add(double log_value) {
    if (log_value == -std::numeric_limits<double>::infinity()) {
      ++count_;
      return;
    }
    if (log_value > max_) {
      sum_ = sum_ * std::exp(max_ - log_value) + 1.0;
      max_ = log_value;
    } else {
      sum_ += std::exp(log_value - max_);
    }
    ++count_;
  }
  void merge(const LogSumExp& other) {
    if (other.sum_ > 0.0) {
      if (other.max_ > max_) {
        sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
        max_ = other.max_;
      } else {
        sum_ += other.sum_ * std::exp(other.max_ - max_);
      }
    }
    count_ += other.count_;
  }
  double log_sum() const {
    return sum_ > 0.0 ? max_ + std::log(sum_) : -std::numeric_limits<double>::infinity();
  }
  double log_mean() const { return log_sum() - std::log(static_cast<double>(count_)); }
  std::size_t count() const { return count_; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

/// Fixed-tree pairwise summation, so results do not depend on how a caller
/// chunks the work.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

/// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

inline std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  primes.reserve(count);
  for (std::uint32_t c = 2; primes.size() < count; ++c) {
    bool is_prime = true;
    for (std::uint32_t p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        is_prime = false;
        break;
      }
    }
    if (is_prime) primes.push_back(c);
  }
  return primes;
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration to an absolute
/// tolerance. Throws NumericalError("quadrature tolerance not met") when the
/// interval budget runs out.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol, std::size_t max_intervals = 4000) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  if (a == b) return {};
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto eval = [&](double lo, double hi) {
    double err = 0.0;
    const double v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    return Piece{lo, hi, v, err};
  };
  std::priority_queue<Piece> heap;
  Piece first = eval(a, b);
  double total = first.value, total_err = first.error;
  heap.push(first);
  while (total_err > abs_tol && heap.size() < max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    Piece left = eval(worst.a, mid), right = eval(mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  double value = 0.0, err = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  if (err > abs_tol) {
    std::ostringstream os;
    os << "quadrature tolerance not met: achieved error " << err << " > " << abs_tol;
    throw NumericalError(os.str());
  }
  return {value, err};
}

/// Sum of adaptive integrals over consecutive breakpoints, sharing the
/// tolerance budget evenly.
template <class F>
QuadratureResult integrate_pieces(F&& f, std::span<const double> breaks, double abs_tol) {
  QuadratureResult out;
  if (breaks.size() < 2) return out;
  const double tol = abs_tol / static_cast<double>(breaks.size() - 1);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    const auto r = integrate(f, breaks[i], breaks[i + 1], tol);
    out.value += r.value;
    out.error += r.error;
  }
  return out;
}

/// Ordinary least squares for a small design matrix given row by row.
/// Returns coefficients and their standard errors (from residual variance).
struct LeastSquares {
  std::vector<double> coef;
  std::vector<double> stderr_;
  double residual_sd = 0.0;
};

inline LeastSquares least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  if (n < p || p == 0) throw DomainError("least squares: fewer observations than parameters");
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rows[i][j];
    Y(i) = y[i];
  }
  const Eigen::MatrixXd XtX = X.transpose() * X;
  const Eigen::VectorXd beta = XtX.ldlt().solve(X.transpose() * Y);
  const Eigen::VectorXd resid = Y - X * beta;
  LeastSquares out;
  out.coef.assign(beta.data(), beta.data() + p);
  const double dof = static_cast<double>(n - p);
  const double s2 = dof > 0 ? resid.squaredNorm() / dof : 0.0;
  out.residual_sd = std::sqrt(s2);
  const Eigen::MatrixXd cov = XtX.inverse() * s2;
  out.stderr_.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) out.stderr_[j] = std::sqrt(std::max(0.0, cov(j, j)));
  return out;
}

}  // namespace smalldev::detail
