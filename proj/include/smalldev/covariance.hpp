#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "smalldev/detail/numeric.hpp"
#include "smalldev/error.hpp"
#include "smalldev/parallel.hpp"
#include "smalldev/spectral.hpp"

namespace smalldev {

// ---------------------------------------------------------------------------
// Autocovariance coefficients
// ---------------------------------------------------------------------------

namespace detail {

/// Complement of the zones inside [0, pi], as consecutive [lo, hi] pieces.
inline std::vector<std::pair<double, double>> free_segments(const std::vector<Zone>& zones) {
  std::vector<std::pair<double, double>> out;
  double start = 0.0;
  for (const Zone& z : zones) {
    if (z.lo > start) out.emplace_back(start, z.lo);
    start = std::max(start, z.hi);
  }
  if (start < kPi) out.emplace_back(start, kPi);
  return out;
}

/// Integral of cos(k u) over [a, b].
inline double cos_integral(std::size_t k, double a, double b) {
  if (k == 0) return b - a;
  const double kd = static_cast<double>(k);
  return (std::sin(kd * b) - std::sin(kd * a)) / kd;
}

inline double piece_length(std::size_t k) { return kPi / static_cast<double>(std::max<std::size_t>(k, 4)); }

/// 2 * integral over [a,b] of cos(ku) p_FGN(u).
inline double fgn_cos_integral(const HurstParams& hp, int truncation, std::size_t k, double a, double b, double tol) {
  const double kd = static_cast<double>(k);
  return 2.0 * fgn_weighted_integral(
                   hp, truncation, [kd](double u) { return std::cos(kd * u); }, a, b, 0.5 * tol, piece_length(k))
                   .value;
}

}  // namespace detail

/// r(k) by numerical integration of the density against cos(ku) plus the
/// atom contributions. Only the flat part is integrated in closed form.
inline double autocovariance_quadrature(const SpectralMeasure& measure, std::size_t k, double tol = 1e-8) {
  double r = 0.0;
  const auto segments = detail::free_segments(measure.zones());
  const double seg_tol = tol / static_cast<double>(std::max<std::size_t>(1, segments.size()) + 1);
  for (const auto& [a, b] : segments) {
    if (measure.flat_level() > 0.0) r += 2.0 * measure.flat_level() * detail::cos_integral(k, a, b);
    if (measure.has_fgn())
      r += measure.fgn_scale() *
           detail::fgn_cos_integral(*measure.hurst(), measure.truncation(), k, a, b, seg_tol / std::abs(measure.fgn_scale()));
    if (const auto* custom = measure.custom_density()) {
      const double kd = static_cast<double>(k);
      const double len = detail::piece_length(k);
      const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / len));
      std::vector<double> breaks;
      for (std::size_t i = 0; i <= pieces; ++i) breaks.push_back(std::min(b, a + len * static_cast<double>(i)));
      r += 2.0 * detail::integrate_pieces([&](double u) { return std::cos(kd * u) * (*custom)(u); }, breaks, 0.5 * seg_tol)
                     .value;
    }
  }
  for (const Atom& atom : measure.atoms()) r += atom.w * std::cos(static_cast<double>(k) * atom.u);
  return r;
}

/// r(k) using the closed form for the FGN component; zone corrections and
/// any custom density still go through quadrature.
inline double autocovariance(const SpectralMeasure& measure, std::size_t k, double tol = 1e-8) {
  if (measure.custom_density() != nullptr) return autocovariance_quadrature(measure, k, tol);
  double r = 0.0;
  const auto segments = detail::free_segments(measure.zones());
  if (measure.flat_level() > 0.0)
    for (const auto& [a, b] : segments) r += 2.0 * measure.flat_level() * detail::cos_integral(k, a, b);
  if (measure.has_fgn()) {
    double v = fgn_autocovariance(measure.hurst()->H, static_cast<long long>(k));
    const double zone_tol = tol / static_cast<double>(measure.zones().size() + 1) / std::abs(measure.fgn_scale());
    for (const Zone& z : measure.zones())
      v -= detail::fgn_cos_integral(*measure.hurst(), measure.truncation(), k, z.lo, std::min(z.hi, detail::kPi), zone_tol);
    r += measure.fgn_scale() * v;
  }
  for (const Atom& atom : measure.atoms()) r += atom.w * std::cos(static_cast<double>(k) * atom.u);
  return r;
}

// ---------------------------------------------------------------------------
// Covariance model
// ---------------------------------------------------------------------------

enum class AutocovRoute { automatic, quadrature };

struct CovarianceOptions {
  AutocovRoute route = AutocovRoute::automatic;
  double tolerance = 1e-8;
};

/// Autocovariance r(0..K_max) of a stationary sequence, optionally tied to
/// the spectral measure it came from.
class CovarianceModel {
 public:
  static CovarianceModel from_measure(const SpectralMeasure& measure, std::size_t horizon,
                                      const CovarianceOptions& opt = {}) {
    CovarianceModel m;
    m.source_ = std::make_shared<const SpectralMeasure>(measure);
    m.r_.assign(horizon + 1, 0.0);
    parallel_for(horizon + 1, [&](std::size_t k) {
      m.r_[k] = opt.route == AutocovRoute::quadrature ? autocovariance_quadrature(measure, k, opt.tolerance)
                                                      : autocovariance(measure, k, opt.tolerance);
    });
    m.label_ = measure.label();
    m.check();
    return m;
  }

  static CovarianceModel from_autocov(std::vector<double> r, std::string label = "autocov") {
    CovarianceModel m;
    m.r_ = std::move(r);
    m.label_ = std::move(label);
    m.check();
    return m;
  }

  double r(std::size_t k) const {
    if (k >= r_.size()) throw DomainError("autocovariance horizon too short");
    return r_[k];
  }
  const std::vector<double>& autocov() const { return r_; }
  /// Largest lag available.
  std::size_t horizon() const { return r_.size() - 1; }
  const SpectralMeasure* source() const { return source_.get(); }
  const std::string& label() const { return label_; }

  /// True when r(k) = 0 for every k >= 1, so that the steps are independent.
  bool is_white() const {
    for (std::size_t k = 1; k < r_.size(); ++k)
      if (std::abs(r_[k]) > 1e-14 * r_[0]) return false;
    return true;
  }

  /// N x N Toeplitz matrix r(|i-j|).
  Eigen::MatrixXd toeplitz(std::size_t N) const {
    require(N);
    const auto n = static_cast<Eigen::Index>(N);
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) K(i, j) = r_[static_cast<std::size_t>(std::abs(i - j))];
    return K;
  }

  void require(std::size_t N) const {
    if (N == 0 || N > r_.size()) {
      std::ostringstream os;
      os << "autocovariance horizon too short: need r(0.." << (N == 0 ? 0 : N - 1) << "), have r(0.." << horizon()
         << ")";
      throw DomainError(os.str());
    }
  }

 private:
  void check() const {
    if (r_.empty() || !(r_[0] > 0.0)) throw DomainError("autocovariance must have r(0) > 0");
    for (std::size_t k = 1; k < r_.size(); ++k) {
      if (std::abs(r_[k]) > r_[0] * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "autocovariance violates |r(k)| <= r(0) at k=" << k;
        throw DomainError(os.str());
      }
    }
  }

  std::vector<double> r_;
  std::string label_;
  std::shared_ptr<const SpectralMeasure> source_;
};

// ---------------------------------------------------------------------------
// Partial sums
// ---------------------------------------------------------------------------

/// V(n) = E|S_n|^2 for n = 0..N, through V(n) = V(n-1) + r(0) + 2 sum_{j<n} r(j).
inline std::vector<double> partial_sum_variances(const CovarianceModel& model, std::size_t N) {
  model.require(N);
  std::vector<double> V(N + 1, 0.0);
  double c = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    if (n >= 2) c += model.r(n - 1);
    V[n] = V[n - 1] + model.r(0) + 2.0 * c;
  }
  return V;
}

struct PartialSumCovariance {
  Eigen::MatrixXd sigma;  // sigma(n-1, m-1) = E S_n S_m
  std::size_t N = 0;
};

inline PartialSumCovariance partial_sum_covariance(const CovarianceModel& model, std::size_t N) {
  const auto V = partial_sum_variances(model, N);
  PartialSumCovariance out;
  out.N = N;
  const auto n = static_cast<Eigen::Index>(N);
  out.sigma.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = 0.5 * (V[i + 1] + V[j + 1] - V[i - j]);
      out.sigma(i, j) = v;
      out.sigma(j, i) = v;
    }
  return out;
}

/// E S_n S_m straight from the measure: the integral of
/// sin(nu/2) sin(mu/2) cos((n-m)u/2) / sin^2(u/2) against mu(du).
inline double partial_sum_covariance_spectral(const SpectralMeasure& measure, std::size_t n, std::size_t m,
                                              double tol = 1e-9) {
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  auto kernel = [nd, md](double u) {
    const double s = std::sin(0.5 * u);
    if (std::abs(s) < 1e-12) return nd * md;
    return std::sin(0.5 * nd * u) * std::sin(0.5 * md * u) * std::cos(0.5 * (nd - md) * u) / (s * s);
  };
  double total = 0.0;
  const std::size_t k = std::max(n, m);
  const auto segments = detail::free_segments(measure.zones());
  const double seg_tol = tol / static_cast<double>(segments.size() + 1);
  const double len = detail::piece_length(k);
  for (const auto& [a, b] : segments) {
    if (measure.has_fgn())
      total += 2.0 * measure.fgn_scale() *
               fgn_weighted_integral(*measure.hurst(), measure.truncation(), kernel, a, b, 0.5 * seg_tol, len).value;
    if (measure.flat_level() > 0.0 || measure.custom_density() != nullptr) {
      const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / len));
      std::vector<double> breaks;
      for (std::size_t i = 0; i <= pieces; ++i) breaks.push_back(std::min(b, a + len * static_cast<double>(i)));
      auto g = [&](double u) {
        double d = measure.flat_level();
        if (const auto* c = measure.custom_density()) d += (*c)(u);
        return kernel(u) * d;
      };
      total += 2.0 * detail::integrate_pieces(g, breaks, 0.5 * seg_tol).value;
    }
  }
  for (const Atom& atom : measure.atoms()) total += atom.w * kernel(atom.u);
  return total;
}

// ---------------------------------------------------------------------------
// Toeplitz factorizations
// ---------------------------------------------------------------------------

/// Durbin-Levinson recursion: one-step prediction coefficients phi[k][j]
/// (predicting xi_{k+1} from xi_k, ..., xi_1 with weights phi[k][0..k-1])
/// and innovation variances v[k].
struct Levinson {
  std::vector<std::vector<double>> phi;
  std::vector<double> v;

  double logdet() const {
    double s = 0.0;
    for (double x : v) s += std::log(x);
    return s;
  }
};

inline Levinson levinson(const CovarianceModel& model, std::size_t N, bool keep_coefficients = true) {
  model.require(N);
  Levinson out;
  out.v.resize(N);
  if (keep_coefficients) out.phi.resize(N);
  const double scale = model.r(0);
  std::vector<double> a, next;
  double v = model.r(0);
  out.v[0] = v;
  for (std::size_t k = 1; k < N; ++k) {
    double acc = model.r(k);
    for (std::size_t j = 0; j < a.size(); ++j) acc -= a[j] * model.r(k - 1 - j);
    const double refl = acc / v;
    next.assign(k, 0.0);
    for (std::size_t j = 0; j + 1 < k; ++j) next[j] = a[j] - refl * a[k - 2 - j];
    next[k - 1] = refl;
    a.swap(next);
    v *= (1.0 - refl) * (1.0 + refl);
    if (!(v > 1e-13 * scale)) {
      std::ostringstream os;
      os << "singular covariance (Kolmogorov criterion may fail): innovation variance " << v << " at step " << k;
      throw DegenerateCovariance(os.str());
    }
    out.v[k] = v;
    if (keep_coefficients) out.phi[k] = a;
  }
  return out;
}

enum class LogdetMethod { cholesky, levinson };

inline double toeplitz_logdet(const CovarianceModel& model, std::size_t N, LogdetMethod method = LogdetMethod::levinson) {
  if (method == LogdetMethod::levinson) return levinson(model, N, false).logdet();
  const Eigen::LLT<Eigen::MatrixXd> llt(model.toeplitz(N));
  if (llt.info() != Eigen::Success)
    throw DegenerateCovariance("singular covariance (Kolmogorov criterion may fail)");
  const Eigen::MatrixXd& L = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    if (!(L(i, i) > 0.0)) throw DegenerateCovariance("singular covariance (Kolmogorov criterion may fail)");
    s += 2.0 * std::log(L(i, i));
  }
  return s;
}

/// Smallest eigenvalue of the N x N Toeplitz matrix.
inline double toeplitz_min_eigenvalue(const CovarianceModel& model, std::size_t N) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.toeplitz(N), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// True when every leading Toeplitz minor up to N is PSD, with eigenvalues
/// down to -1e-10 r(0) treated as rounding noise.
inline bool toeplitz_is_psd(const CovarianceModel& model, std::size_t N) {
  return toeplitz_min_eigenvalue(model, N) >= -1e-10 * model.r(0);
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct VarianceRatio {
  std::size_t n;
  double ratio;
};

/// E|S_n|^2 / (n^{2H} l(1/n)) on a grid of n.
inline std::vector<VarianceRatio> variance_ratio_diagnostic(const CovarianceModel& model, double H,
                                                            const SlowlyVaryingFn& ell,
                                                            const std::vector<std::size_t>& grid) {
  std::size_t top = 0;
  for (std::size_t n : grid) top = std::max(top, n);
  const auto V = partial_sum_variances(model, top);
  std::vector<VarianceRatio> out;
  for (std::size_t n : grid) {
    if (n == 0) throw DomainError("variance_ratio_diagnostic: n must be positive");
    const double nd = static_cast<double>(n);
    const double denom = std::pow(nd, 2.0 * H) * (n == 1 ? ell(1.0 - 1e-12) : ell(1.0 / nd));
    out.push_back({n, V[n] / denom});
  }
  return out;
}

/// The measure split into low (|u| < 1/(M d)), central (1/(M d) <= |u| <= M/d)
/// and high (|u| > M/d) frequency parts.
struct ThreeZoneSplit {
  SpectralMeasure low, central, high;
  double lo_edge = 0.0, hi_edge = 0.0;
};

inline ThreeZoneSplit three_zone_split(const SpectralMeasure& measure, double d, double M) {
  if (!(d > 0.0 && M > 1.0)) throw DomainError("three_zone_split: need d > 0 and M > 1");
  const double a = std::min(1.0 / (M * d), detail::kPi), b = std::min(M / d, detail::kPi);
  return {measure.restricted(0.0, a, true, false), measure.restricted(a, b), measure.restricted(b, detail::kPi, false, true),
          a, b};
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

inline void write_autocov_csv(std::ostream& os, const CovarianceModel& model, double H = 0.0) {
  os << "# label=" << model.label() << " H=" << H << " N=" << model.horizon() + 1 << "\n";
  os << "k,r\n";
  os.precision(17);
  for (std::size_t k = 0; k <= model.horizon(); ++k) os << k << "," << model.r(k) << "\n";
}

inline void write_sigma_csv(std::ostream& os, const PartialSumCovariance& s, const std::string& label, double H = 0.0) {
  os << "# label=" << label << " H=" << H << " N=" << s.N << "\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < s.sigma.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.sigma.cols(); ++j) os << (j ? "," : "") << s.sigma(i, j);
    os << "\n";
  }
}

}  // namespace smalldev
