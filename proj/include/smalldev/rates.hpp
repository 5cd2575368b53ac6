#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "smalldev/boundary.hpp"
#include "smalldev/covariance.hpp"
#include "smalldev/detail/log.hpp"
#include "smalldev/detail/numeric.hpp"
#include "smalldev/engines.hpp"
#include "smalldev/error.hpp"
#include "smalldev/parallel.hpp"
#include "smalldev/rng.hpp"
#include "smalldev/spectral.hpp"

namespace smalldev {

inline constexpr double kKappaHalf = 1.2337005501361698;  // pi^2 / 8

// ---------------------------------------------------------------------------
// Regimes
// ---------------------------------------------------------------------------

enum class Regime { to_zero, constant, sub_scale, out_of_theory };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::to_zero:
      return "to-zero";
    case Regime::constant:
      return "constant";
    case Regime::sub_scale:
      return "to-infinity-sub-scale";
    case Regime::out_of_theory:
      return "out-of-theory";
  }
  return "?";
}

/// Finite-N stand-in for the asymptotic regimes, judged at the largest N:
/// to-zero when f_N < 0.5; constant when the family is constant or
/// f_N <= 2 f_1; otherwise sub-scale when f_N <= 0.5 N^H l(1/N)^{1/2}.
inline Regime classify(const Boundary& boundary, double H, const SlowlyVaryingFn& ell, std::size_t N) {
  const double f = boundary(N);
  if (f < 0.5) return Regime::to_zero;
  if (boundary.family() == Boundary::Family::constant || f <= 2.0 * boundary(1)) return Regime::constant;
  const double nd = static_cast<double>(N);
  const double scale = std::pow(nd, H) * std::sqrt(ell(1.0 / nd));
  return f / scale <= 0.5 ? Regime::sub_scale : Regime::out_of_theory;
}

// ---------------------------------------------------------------------------
// Predictions
// ---------------------------------------------------------------------------

enum class BoundKind { asymptotic, upper_bound, lower_bound };

struct RatePrediction {
  std::string theorem;
  std::size_t N = 0;
  double f = 0.0;
  double log_p = 0.0;
  BoundKind kind = BoundKind::asymptotic;
  Regime regime = Regime::constant;
  double log_p_lo = -std::numeric_limits<double>::infinity();  // propagated CI, when a constant is estimated
  double log_p_hi = std::numeric_limits<double>::infinity();
  std::map<std::string, double> constants;
};

struct KappaEstimate {
  double H = 0.5;
  double kappa = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  double se = 0.0;
  bool truncated = false;  // some ladder rungs were dropped
  struct Rung {
    double d, f;
    std::size_t N;
    double c, c_err;
  };
  std::vector<Rung> rungs;
  std::vector<double> replicate_kappa;

  double half_width() const { return 0.5 * (ci_hi - ci_lo); }
  bool covers(double x) const { return ci_lo <= x && x <= ci_hi; }
};

/// -kappa_H [L(f_N) f_N]^{-1/H} N.
inline RatePrediction fbm_rate(double H, const SlowlyVaryingFn& ell, const Boundary& boundary, std::size_t N,
                               const std::optional<KappaEstimate>& kappa = std::nullopt) {
  const Regime regime = classify(boundary, H, ell, N);
  if (regime != Regime::sub_scale) {
    std::ostringstream os;
    os << "theorem not applicable in this regime (" << to_string(regime) << ")";
    throw DomainError(os.str());
  }
  double k = 0.0, k_lo = 0.0, k_hi = 0.0;
  if (kappa) {
    k = kappa->kappa;
    k_lo = kappa->ci_lo;
    k_hi = kappa->ci_hi;
  } else if (H == 0.5) {
    k = k_lo = k_hi = kKappaHalf;
  } else {
    throw DomainError("fbm_rate: kappa_H is only known for H = 1/2; supply an estimate");
  }
  const double f = boundary(N);
  const double L = ell.family() == SlowlyVaryingFn::Family::one ? 1.0 : adjoint_slowly_varying(ell, H, f).L;
  const double base = std::pow(L * f, -1.0 / H) * static_cast<double>(N);
  RatePrediction out;
  out.theorem = "fbm-rate";
  out.N = N;
  out.f = f;
  out.regime = regime;
  out.log_p = -k * base;
  out.log_p_lo = -k_hi * base;
  out.log_p_hi = -k_lo * base;
  out.constants["kappa"] = k;
  out.constants["L"] = L;
  return out;
}

// ---------------------------------------------------------------------------
// Kappa estimation
// ---------------------------------------------------------------------------

struct KappaConfig {
  std::vector<double> d_ladder{4, 6, 9, 12, 16, 25, 36};  // d = f^{1/H}
  double steps_per_d = 2.0;  // N >= steps_per_d * d, rounded up to a power of two
  std::size_t n_max = 64;
  std::size_t samples = 8192;
  std::size_t randomizations = 16;
  std::size_t replicates = 4;
  std::uint64_t seed = 2024;
  double log_p_floor = -40.0;
};

/// c(f) from the ladder N, 2N by Richardson extrapolation of ln p / N.
inline std::pair<double, double> richardson_rate(const CovarianceModel& model, std::size_t N, double f,
                                                 const QmcOptions& opt) {
  const auto a = band_probability_qmc(model, N, f, opt);
  const auto b = band_probability_qmc(model, 2 * N, f, opt);
  const double n = static_cast<double>(N);
  const double c = 2.0 * b.log_p / (2.0 * n) - a.log_p / n;
  const double err = std::hypot(b.log_err / n, a.log_err / n);
  return {c, err};
}

/// Fits (-c(f))^{-H} = a + kappa^{-H} f + b / f over the ladder.
inline KappaEstimate estimate_kappa(double H, const KappaConfig& cfg = {}) {
  HurstParams hp(H);
  (void)hp;
  std::size_t n_top = 1;
  for (double d : cfg.d_ladder) {
    std::size_t n = 8;
    while (static_cast<double>(n) < cfg.steps_per_d * d && n < cfg.n_max) n <<= 1;
    n_top = std::max(n_top, 2 * n);
  }
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(H), n_top);
  KappaEstimate out;
  out.H = H;
  std::vector<double> fit_se;
  for (std::size_t rep = 0; rep < cfg.replicates; ++rep) {
    std::vector<std::vector<double>> rows;
    std::vector<double> ys;
    for (double d : cfg.d_ladder) {
      const double f = std::pow(d, H);
      std::size_t n = 8;
      while (static_cast<double>(n) < cfg.steps_per_d * d && n < cfg.n_max) n <<= 1;
      QmcOptions opt;
      opt.samples = cfg.samples;
      opt.randomizations = cfg.randomizations;
      opt.seed = derive_seed(cfg.seed, rep * 1000 + static_cast<std::uint64_t>(d * 16));
      const auto [c, err] = richardson_rate(model, n, f, opt);
      if (!(c < 0.0) || c * 2.0 * static_cast<double>(n) < cfg.log_p_floor) {
        out.truncated = true;
        if (rep == 0) {
          std::ostringstream os;
          os << "estimate_kappa: truncated ladder, dropping d=" << d;
          detail::warn(os.str());
        }
        continue;
      }
      if (rep == 0) out.rungs.push_back({d, f, n, c, err});
      rows.push_back({1.0, f, 1.0 / f});
      ys.push_back(std::pow(-c, -H));
    }
    if (rows.size() < 4) throw NumericalError("estimate_kappa: fewer than four usable ladder rungs");
    const auto ls = detail::least_squares(rows, ys);
    const double b = ls.coef[1];
    if (!(b > 0.0)) throw NumericalError("estimate_kappa: nonpositive slope in the shift fit");
    const double k = std::pow(b, -1.0 / H);
    out.replicate_kappa.push_back(k);
    fit_se.push_back((1.0 / H) * std::pow(b, -1.0 / H - 1.0) * ls.stderr_[1]);
  }
  const double R = static_cast<double>(out.replicate_kappa.size());
  double mean = 0.0, se_fit = 0.0;
  for (std::size_t i = 0; i < out.replicate_kappa.size(); ++i) {
    mean += out.replicate_kappa[i];
    se_fit += fit_se[i];
  }
  mean /= R;
  se_fit /= R;
  double var = 0.0;
  for (double k : out.replicate_kappa) var += (k - mean) * (k - mean);
  const double se_rep = R > 1.0 ? std::sqrt(var / (R - 1.0) / R) : 0.0;
  out.kappa = mean;
  out.se = std::hypot(se_rep, se_fit);
  out.ci_lo = mean - 1.96 * out.se;
  out.ci_hi = mean + 1.96 * out.se;
  return out;
}

// ---------------------------------------------------------------------------
// Very small deviations
// ---------------------------------------------------------------------------

/// Integral of ln p over [-pi, pi); throws when it diverges. The piece
/// [0, eps] is integrated in closed form from a local power law fitted at
/// eps and eps/2.
inline double log_density_integral(const SpectralMeasure& measure) {
  if (!measure.has_density() || !measure.zones().empty())
    throw NumericalError("irregular sequence: Szego term undefined (density vanishes on a set of positive measure)");
  constexpr double eps = 1e-8;
  auto lp = [&](double u) {
    const double p = measure.density(u);
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  };
  const double A = lp(eps), alpha = (A - lp(0.5 * eps)) / std::log(2.0);
  if (!std::isfinite(A) || !std::isfinite(alpha)) throw NumericalError("irregular sequence: Szego term undefined");
  const double head = eps * (A - alpha);  // integral of A + alpha ln(u/eps) over [0, eps]
  boost::math::quadrature::tanh_sinh<double> ts;
  double err = 0.0;
  double body = 0.0;
  try {
    body = ts.integrate([&](double u) { return lp(std::min(u, std::nextafter(detail::kPi, 0.0))); }, eps, detail::kPi,
                        1e-10, &err);
  } catch (const std::exception&) {
    throw NumericalError("irregular sequence: Szego term undefined");
  }
  const double v = 2.0 * (head + body);
  if (!std::isfinite(v)) throw NumericalError("irregular sequence: Szego term undefined");
  return v;
}

/// ln pi + (1/4 pi) integral of ln p: the per-step constant of the two-term
/// small-f expansion.
inline double szego_constant(const SpectralMeasure& measure) {
  return std::log(detail::kPi) + log_density_integral(measure) / (4.0 * detail::kPi);
}

/// (1/2 pi) integral of ln[2 pi p]: the limit of (1/N) ln det K_N.
inline double szego_logdet_limit(const SpectralMeasure& measure) {
  return std::log(detail::kTwoPi) + log_density_integral(measure) / detail::kTwoPi;
}

/// One-step prediction variance 2 pi exp((1/2 pi) integral of ln p).
inline double innovation_variance(const SpectralMeasure& measure) {
  return detail::kTwoPi * std::exp(log_density_integral(measure) / detail::kTwoPi);
}

/// N ln f - N [ln pi + (1/4 pi) integral ln p]; the constant `envelope`
/// N ln f is the universal first-order lower envelope.
inline RatePrediction szego_rate(const SpectralMeasure& measure, const Boundary& boundary, std::size_t N) {
  const double H = measure.hurst() ? measure.hurst()->H : 0.5;
  const Regime regime = classify(boundary, H, measure.ell(), N);
  if (regime != Regime::to_zero) {
    std::ostringstream os;
    os << "theorem not applicable in this regime (" << to_string(regime) << ")";
    throw DomainError(os.str());
  }
  const double f = boundary(N);
  const double c = szego_constant(measure);
  const double n = static_cast<double>(N);
  RatePrediction out;
  out.theorem = "szego";
  out.N = N;
  out.f = f;
  out.regime = regime;
  out.log_p = n * std::log(f) - n * c;
  out.constants["szego_constant"] = c;
  out.constants["envelope"] = n * std::log(f);
  return out;
}

// ---------------------------------------------------------------------------
// Analytic bounds
// ---------------------------------------------------------------------------

/// ln P <= N ln(2f) - (N/2) ln(2 pi) - (1/2) ln det K_N.
inline double volumetric_upper_bound(const CovarianceModel& model, std::size_t N, double f) {
  if (!(f > 0.0)) throw DomainError("band half-width must be positive");
  const double n = static_cast<double>(N);
  return n * std::log(2.0 * f) - 0.5 * n * std::log(detail::kTwoPi) - 0.5 * toeplitz_logdet(model, N);
}

/// Lower bound through the measure mu + delta * Lebesgue (covariance
/// K + 2 pi delta I), whose eigenvalues are at least 2 pi delta.
inline double regularized_lower_bound(const CovarianceModel& model, std::size_t N, double f, double delta) {
  if (!(delta > 0.0)) throw DomainError("regularization delta must be positive");
  if (!(f > 0.0)) throw DomainError("band half-width must be positive");
  std::vector<double> r(N);
  for (std::size_t k = 0; k < N; ++k) r[k] = model.r(k);
  r[0] += detail::kTwoPi * delta;
  const auto reg = CovarianceModel::from_autocov(std::move(r), model.label() + "+delta");
  const double n = static_cast<double>(N);
  return n * std::log(2.0 * f) - 0.5 * n * std::log(detail::kTwoPi) - 0.5 * toeplitz_logdet(reg, N) -
         n * f * f / (detail::kPi * delta);
}

struct RegularizedBound {
  double value = -std::numeric_limits<double>::infinity();
  double delta = 0.0;
};

/// Best regularized bound over delta in {f^2, f, 1, 10}.
inline RegularizedBound regularized_lower_bound_best(const CovarianceModel& model, std::size_t N, double f) {
  RegularizedBound best;
  for (double delta : {f * f, f, 1.0, 10.0}) {
    const double v = regularized_lower_bound(model, N, f, delta);
    if (v > best.value) best = {v, delta};
  }
  return best;
}

/// Per-step bound (1/N) ln P <= ln P{sigma |Z| <= f}, sigma^2 the
/// one-step prediction variance.
inline double conditional_variance_bound(double sigma, double f) {
  return std::log(detail::normal_interval_mass(-f / sigma, f / sigma));
}

// ---------------------------------------------------------------------------
// Constant boundary
// ---------------------------------------------------------------------------

struct ConstantRateLimit {
  double f = 0.0;
  std::vector<std::size_t> N;
  std::vector<double> rate;      // ln p(N) / N
  std::vector<double> rate_err;  // standard error of each rate
  std::vector<double> gaps;      // |rate_{k+1} - rate_k|
  double c_hat = 0.0;            // 2 rate(N_last) - rate(N_prev)
  double c_err = 0.0;
  bool partial = false;  // ladder cut short
};

inline ConstantRateLimit constant_rate_limit(const SpectralMeasure& measure, double f,
                                             const std::vector<std::size_t>& ladder = {16, 32, 64, 128},
                                             const QmcOptions& opt = {}) {
  ConstantRateLimit out;
  out.f = f;
  std::size_t top = 0;
  for (std::size_t n : ladder) top = std::max(top, n);
  std::optional<CovarianceModel> model;
  if (!measure.is_purely_atomic()) model = CovarianceModel::from_measure(measure, top);
  for (std::size_t n : ladder) {
    BandProbability b;
    try {
      b = model ? band_probability_qmc(*model, n, f, opt) : band_probability_atomic(measure, n, f, opt);
    } catch (const NumericalError& e) {
      out.partial = true;
      detail::warn(std::string("constant_rate_limit: partial ladder: ") + e.what());
      break;
    }
    if (!std::isfinite(b.log_p)) {
      out.partial = true;
      break;
    }
    const double nd = static_cast<double>(n);
    out.N.push_back(n);
    out.rate.push_back(b.log_p / nd);
    out.rate_err.push_back(b.log_err / nd);
  }
  if (out.rate.empty()) throw NumericalError("constant_rate_limit: ladder infeasible");
  for (std::size_t i = 1; i < out.rate.size(); ++i) out.gaps.push_back(std::abs(out.rate[i] - out.rate[i - 1]));
  const std::size_t k = out.rate.size();
  if (k >= 2 && out.N[k - 1] == 2 * out.N[k - 2]) {
    out.c_hat = 2.0 * out.rate[k - 1] - out.rate[k - 2];
    out.c_err = std::hypot(2.0 * out.rate_err[k - 1], out.rate_err[k - 2]);
  } else {
    out.c_hat = out.rate.back();
    out.c_err = out.rate_err.back();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Purely atomic examples
// ---------------------------------------------------------------------------

enum class DiracCase { delta0, delta_pi, delta_half_pi, four_atoms };

inline const char* to_string(DiracCase c) {
  switch (c) {
    case DiracCase::delta0:
      return "delta0";
    case DiracCase::delta_pi:
      return "delta-pi";
    case DiracCase::delta_half_pi:
      return "delta-half-pi";
    case DiracCase::four_atoms:
      return "four-atoms";
  }
  return "?";
}

inline SpectralMeasure dirac_measure(DiracCase c) {
  const double pi = detail::kPi;
  switch (c) {
    case DiracCase::delta0:
      return SpectralMeasure::atomic({{0.0, 1.0}}, "delta0");
    case DiracCase::delta_pi:
      return SpectralMeasure::atomic({{-pi, 1.0}}, "delta-pi");
    case DiracCase::delta_half_pi:
      return SpectralMeasure::atomic({{-0.5 * pi, 1.0}, {0.5 * pi, 1.0}}, "delta-half-pi");
    case DiracCase::four_atoms:
      return SpectralMeasure::atomic({{0.0, 1.0}, {-pi, 1.0}, {-0.5 * pi, 1.0}, {0.5 * pi, 1.0}}, "four-atoms");
  }
  throw DomainError("unknown atomic example");
}

/// Orders of magnitude (exponent of f, exponent of N).
inline std::pair<double, double> dirac_expected_exponents(DiracCase c) {
  switch (c) {
    case DiracCase::delta0:
      return {1.0, -1.0};
    case DiracCase::delta_pi:
      return {1.0, 0.0};
    case DiracCase::delta_half_pi:
      return {2.0, 0.0};
    case DiracCase::four_atoms:
      return {4.0, -1.0};
  }
  return {0.0, 0.0};
}

struct DiracReport {
  DiracCase which = DiracCase::delta0;
  double slope_f = 0.0, slope_N = 0.0;
  double se_f = 0.0, se_N = 0.0;
  double expected_f = 0.0, expected_N = 0.0;
  bool pass = false;
  struct Point {
    std::size_t N;
    double f, log_p, log_err;
  };
  std::vector<Point> points;
};

/// Regresses ln p on (ln f, ln N) over the grid using the finite-rank
/// reduction, and compares the slopes with the expected orders at +-0.1.
inline DiracReport dirac_example_check(DiracCase c, const std::vector<std::size_t>& N_ladder = {64, 128, 256, 512},
                                       const std::vector<double>& f_ladder = {0.05, 0.1, 0.2},
                                       const QmcOptions& opt = {}) {
  const SpectralMeasure m = dirac_measure(c);
  DiracReport rep;
  rep.which = c;
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (std::size_t N : N_ladder)
    for (double f : f_ladder) {
      const auto b = band_probability_atomic(m, N, f, opt);
      rep.points.push_back({N, f, b.log_p, b.log_err});
      rows.push_back({1.0, std::log(f), std::log(static_cast<double>(N))});
      y.push_back(b.log_p);
    }
  const auto ls = detail::least_squares(rows, y);
  rep.slope_f = ls.coef[1];
  rep.slope_N = ls.coef[2];
  rep.se_f = ls.stderr_[1];
  rep.se_N = ls.stderr_[2];
  std::tie(rep.expected_f, rep.expected_N) = dirac_expected_exponents(c);
  rep.pass = std::abs(rep.slope_f - rep.expected_f) <= 0.1 && std::abs(rep.slope_N - rep.expected_N) <= 0.1;
  return rep;
}

// ---------------------------------------------------------------------------
// Perturbation constant P(M, q)
// ---------------------------------------------------------------------------

struct PmqEstimate {
  double p = 0.0;
  double err = 0.0;
  std::size_t samples = 0;
  bool upper_bound_only = false;
};

/// Counting estimate of P{C M^{1+H} q^{-1/2} sum_{k<q} (|xi_k| + |eta_k|) <= 1/3}.
inline PmqEstimate perturbation_pmq(double M, int q, double C, double H, std::size_t samples, std::uint64_t seed) {
  if (!(M > 0.0) || q < 1 || !(C > 0.0)) throw DomainError("perturbation_pmq: need M > 0, q >= 1, C > 0");
  if (samples == 0) throw DomainError("perturbation_pmq: need samples");
  const double scale = C * std::pow(M, 1.0 + H) / std::sqrt(static_cast<double>(q));
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<std::size_t> hits(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(samples, (c + 1) * kChunk);
    std::size_t h = 0;
    for (std::size_t i = c * kChunk; i < end; ++i) {
      CounterRng rng(seed, streams::kPmq, i);
      double s = 0.0;
      for (int k = 0; k < 2 * q; ++k) s += std::abs(rng.normal());
      h += scale * s <= 1.0 / 3.0 ? 1 : 0;
    }
    hits[c] = h;
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  PmqEstimate out;
  out.samples = samples;
  const double n = static_cast<double>(samples);
  if (total == 0) {
    out.upper_bound_only = true;
    out.p = -std::log(0.05) / n;
    out.err = out.p;
  } else {
    out.p = static_cast<double>(total) / n;
    out.err = std::sqrt(out.p * (1.0 - out.p) / n);
  }
  return out;
}

/// Constant C for level j: the atom pairs of that level move |S_n| by at
/// most 2 sqrt(2) sqrt(g~_k) (|xi_k| + |eta_k|) with
/// g~_k = w_k / |e^{i t_k} - 1|^2, so C M^{1+H} q^{-1/2} = 2 sqrt(2) max_k sqrt(g~_k) / f_N.
inline double pmq_constant(const PerturbationSchedule& schedule, std::size_t j, int truncation = kDefaultTruncation) {
  schedule.validate();
  const auto& lv = schedule.levels.at(j);
  const HurstParams hp(schedule.H);
  double g_max = 0.0;
  for (int k = 0; k < lv.q; ++k) {
    const double t0 = schedule.node(j, k), t1 = schedule.node(j, k + 1);
    const double w = fgn_interval_mass(hp, t0, t1, truncation);
    const double s = 2.0 * std::sin(0.5 * t0);
    g_max = std::max(g_max, w / (s * s));
  }
  const double fN = schedule.boundary(lv.N);
  return 2.0 * std::sqrt(2.0) * std::sqrt(g_max) * std::sqrt(static_cast<double>(lv.q)) /
         (std::pow(lv.M, 1.0 + schedule.H) * fN);
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct ReportRow {
  std::string theorem;
  std::size_t N = 0;
  double f = 0.0;
  double predicted = 0.0;
  double measured = 0.0;
  double err = 0.0;
  std::string verdict;
};

inline void write_rate_report(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "theorem,N,f,predicted,measured,err,verdict\n";
  os.precision(10);
  for (const auto& r : rows)
    os << r.theorem << "," << r.N << "," << r.f << "," << r.predicted << "," << r.measured << "," << r.err << ","
       << r.verdict << "\n";
}

}  // namespace smalldev
