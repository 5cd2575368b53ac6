#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "smalldev/covariance.hpp"
#include "smalldev/engines.hpp"
#include "smalldev/rates.hpp"
#include "smalldev/sampler.hpp"
#include "smalldev/spectral.hpp"
#include "smalldev/svg.hpp"

namespace smalldev {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::string name;
  std::vector<Check> checks;
  std::vector<ReportRow> rows;
  std::vector<Plot> plots;
  double wall_time_ms = 0.0;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

namespace detail {

template <class... Ts>
std::string cat(const Ts&... parts) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << parts);
  return os.str();
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

inline const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

inline QmcOptions qmc_options(std::size_t samples, std::size_t randomizations, std::uint64_t seed,
                              PointSet points = PointSet::lattice) {
  QmcOptions o;
  o.samples = samples;
  o.randomizations = randomizations;
  o.seed = seed;
  o.points = points;
  return o;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic two-sample critical value at level alpha.
inline double ks_critical(double alpha, std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

inline std::vector<double> path_maxima(const PathBatch& b) {
  std::vector<double> out(b.count);
  for (std::size_t i = 0; i < b.count; ++i) {
    double m = 0.0;
    for (std::size_t n = 1; n <= b.N; ++n) m = std::max(m, std::abs(b.S(i, n)));
    out[i] = m;
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Covariance oracles
// ---------------------------------------------------------------------------

/// Spectral quadrature against the closed-form FGN autocovariance.
inline ExperimentResult covariance_oracle_experiment(const std::vector<double>& hs = {0.3, 0.5, 0.7},
                                                     std::size_t k_max = 64) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "covariance";
  Plot plot{"FGN autocovariance: quadrature minus closed form", "lag k", "absolute error", {}, false};
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  double worst = 0.0;
  for (std::size_t h = 0; h < hs.size(); ++h) {
    const SpectralMeasure m = SpectralMeasure::fgn(hs[h]);
    Series s{detail::cat("H=", hs[h]), {}, false, colors[h % 4]};
    std::vector<double> err(k_max + 1);
    parallel_for(k_max + 1, [&](std::size_t k) {
      err[k] = std::abs(autocovariance_quadrature(m, k) - fgn_autocovariance(hs[h], static_cast<long long>(k)));
    });
    for (std::size_t k = 0; k <= k_max; ++k) {
      worst = std::max(worst, err[k]);
      s.points.push_back({static_cast<double>(k), err[k], 0.0});
    }
    plot.series.push_back(std::move(s));
  }
  const double secs = sw.seconds();
  out.checks.push_back({"max abs error <= 1e-6", worst <= 1e-6, detail::cat("max error ", worst)});
  out.checks.push_back({"runtime < 10 s", secs < 10.0, detail::cat(secs, " s")});
  out.rows.push_back({"fgn-autocov", k_max, 0.0, 0.0, worst, 1e-6, detail::verdict(worst <= 1e-6)});
  out.plots.push_back(std::move(plot));
  out.wall_time_ms = 1e3 * sw.seconds();
  return out;
}

/// Partial-sum variances of FGN against n^{2H}.
inline ExperimentResult partial_sum_variance_experiment(const std::vector<double>& hs = {0.3, 0.5, 0.7},
                                                        std::size_t n_max = 512) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "partial-sum-variance";
  double worst = 0.0;
  for (double H : hs) {
    const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(H), n_max);
    const auto V = partial_sum_variances(model, n_max);
    double e = 0.0;
    for (std::size_t n = 1; n <= n_max; ++n)
      e = std::max(e, std::abs(V[n] - std::pow(static_cast<double>(n), 2.0 * H)));
    worst = std::max(worst, e);
    out.rows.push_back({"partial-sum-variance", n_max, 0.0, 0.0, e, 1e-8, detail::verdict(e <= 1e-8)});
  }
  out.checks.push_back({"|Sigma_nn - n^2H| <= 1e-8", worst <= 1e-8, detail::cat("max error ", worst)});
  out.wall_time_ms = 1e3 * sw.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Very small deviations
// ---------------------------------------------------------------------------

/// i.i.d. steps, f = 0.05: measured ln p against N ln f - N * szego constant.
inline ExperimentResult szego_experiment(std::uint64_t seed = 1, std::size_t samples = 8192,
                                         const std::vector<std::size_t>& ladder = {8, 16, 32}, double f = 0.05) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "szego";
  const SpectralMeasure m = SpectralMeasure::white_noise();
  const auto model = CovarianceModel::from_measure(m, ladder.back());
  Plot plot{"Two-term small-f formula, i.i.d. steps, f=0.05", "N", "(measured - predicted) / N", {}, false};
  Series pts{"measured gap", {}, false, "#1f77b4"};
  Series zero{"zero", {}, true, "#999999"};
  std::vector<double> gaps;
  for (std::size_t N : ladder) {
    const auto pred = szego_rate(m, Boundary::constant(f), N);
    const auto b = band_probability_qmc(model, N, f, detail::qmc_options(samples, 16, derive_seed(seed, N)));
    const double gap = std::abs(b.log_p - pred.log_p) / static_cast<double>(N);
    gaps.push_back(gap);
    out.rows.push_back({"szego", N, f, pred.log_p, b.log_p, b.log_err, ""});
    pts.points.push_back({static_cast<double>(N), (b.log_p - pred.log_p) / static_cast<double>(N),
                          b.log_err / static_cast<double>(N)});
    zero.points.push_back({static_cast<double>(N), 0.0, 0.0});
  }
  bool decreasing = true;
  std::string trail;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (i > 0 && !(gaps[i] < gaps[i - 1])) decreasing = false;
    trail += detail::cat(i ? ", " : "", "N=", ladder[i], ": ", gaps[i]);
  }
  const bool small = gaps.back() < 0.05;
  for (auto& r : out.rows) r.verdict = detail::verdict(decreasing && small);
  const double secs = sw.seconds();
  out.checks.push_back({"|gap|/N decreases with N", decreasing, trail});
  out.checks.push_back({"|gap|/N < 0.05 at largest N", small, detail::cat(gaps.back())});
  out.checks.push_back({"runtime < 60 s", secs < 60.0, detail::cat(secs, " s")});
  plot.series = {zero, pts};
  out.plots.push_back(std::move(plot));
  out.wall_time_ms = 1e3 * sw.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Transfer operator
// ---------------------------------------------------------------------------

/// Mean overshoot of a standard Gaussian random walk over a level,
/// -zeta(1/2) / sqrt(2 pi).
inline constexpr double kGaussianOvershoot = 0.5825971579390107;

inline ExperimentResult transfer_experiment(std::size_t nodes = 200) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "transfer";
  auto asymptote = [](double f) { return -kKappaHalf / (f * f); };
  struct Target {
    double f, tol;
  };
  for (const Target t : {Target{6.0, 0.05}, Target{10.0, 0.02}}) {
    const TransferRate r = transfer_rate(t.f, nodes);
    const double rel = std::abs(r.c - asymptote(t.f)) / std::abs(asymptote(t.f));
    out.checks.push_back({detail::cat("relative gap < ", t.tol, " at f=", t.f), rel < t.tol,
                          detail::cat("c=", r.c, " asymptote=", asymptote(t.f), " rel=", rel)});
    out.checks.push_back({detail::cat("node doubling <= 1e-8 at f=", t.f), r.err <= 1e-8, detail::cat(r.err)});
    out.rows.push_back({"transfer", 0, t.f, asymptote(t.f), r.c, r.err, detail::verdict(rel < t.tol)});
    // Shifting f by the mean overshoot accounts for the discrete-time walk.
    const double shifted = -kKappaHalf / ((t.f + kGaussianOvershoot) * (t.f + kGaussianOvershoot));
    out.rows.push_back({"transfer-overshoot-info", 0, t.f, shifted, r.c, r.err, "info"});
  }
  Plot plot{"Transfer operator rate c(f) for i.i.d. steps", "f", "c(f) = ln lambda_1", {}, false};
  Series measured{"ln lambda_1", {}, false, "#1f77b4"};
  Series curve{"-pi^2/(8 f^2)", {}, true, "#d62728"};
  Series shifted{"-pi^2/(8 (f+0.5826)^2)", {}, true, "#2ca02c"};
  for (double f = 2.0; f <= 8.0 + 1e-9; f += 0.5) {
    const TransferRate r = transfer_rate(f, nodes);
    measured.points.push_back({f, r.c, r.err});
    curve.points.push_back({f, asymptote(f), 0.0});
    shifted.points.push_back({f, -kKappaHalf / ((f + kGaussianOvershoot) * (f + kGaussianOvershoot)), 0.0});
  }
  plot.series = {curve, shifted, measured};
  out.plots.push_back(std::move(plot));
  const double secs = sw.seconds();
  out.checks.push_back({"runtime < 10 s", secs < 10.0, detail::cat(secs, " s")});
  out.wall_time_ms = 1e3 * secs;
  return out;
}

// ---------------------------------------------------------------------------
// Constant boundary
// ---------------------------------------------------------------------------

inline ExperimentResult constant_limit_experiment(std::uint64_t seed = 1, std::size_t samples = 8192, double f = 1.0) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "constant-limit";
  const TransferRate tr = transfer_rate(f);
  const auto lim = constant_rate_limit(SpectralMeasure::white_noise(), f, {16, 32, 64, 128},
                                       detail::qmc_options(samples, 16, seed));
  const double rel = std::abs(lim.c_hat - tr.c) / std::abs(tr.c);
  out.checks.push_back({"extrapolated rate within 2% of ln lambda_1", rel < 0.02 && !lim.partial,
                        detail::cat("c_hat=", lim.c_hat, " +- ", lim.c_err, " ln lambda_1=", tr.c, " rel=", rel)});
  const double bound = conditional_variance_bound(1.0, f);
  bool below = true;
  std::string trail;
  for (std::size_t i = 0; i < lim.N.size(); ++i) {
    below = below && lim.rate[i] <= bound + 3.0 * lim.rate_err[i];
    trail += detail::cat(i ? ", " : "", "N=", lim.N[i], ": ", lim.rate[i]);
    out.rows.push_back({"constant-limit", lim.N[i], f, tr.c, lim.rate[i], lim.rate_err[i], ""});
  }
  out.checks.push_back({"(1/N) ln p <= ln(2 Phi(f) - 1)", below, detail::cat(trail, "; bound ", bound)});
  out.rows.push_back({"constant-limit-extrapolated", lim.N.back(), f, tr.c, lim.c_hat, lim.c_err, detail::verdict(rel < 0.02)});
  for (auto& r : out.rows)
    if (r.verdict.empty()) r.verdict = detail::verdict(below);
  Plot plot{"Constant boundary f=1, i.i.d. steps", "N", "(1/N) ln p", {}, true};
  Series pts{"QMC", {}, false, "#1f77b4"};
  Series lam{"ln lambda_1", {}, true, "#d62728"};
  Series bnd{"ln(2 Phi(1) - 1)", {}, true, "#2ca02c"};
  for (std::size_t i = 0; i < lim.N.size(); ++i) {
    const double n = static_cast<double>(lim.N[i]);
    pts.points.push_back({n, lim.rate[i], lim.rate_err[i]});
    lam.points.push_back({n, tr.c, 0.0});
    bnd.points.push_back({n, bound, 0.0});
  }
  plot.series = {lam, bnd, pts};
  out.plots.push_back(std::move(plot));
  out.wall_time_ms = 1e3 * sw.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Purely atomic examples
// ---------------------------------------------------------------------------

inline ExperimentResult dirac_experiment(std::uint64_t seed = 1, std::size_t samples = 8192) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "dirac";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  for (DiracCase c : {DiracCase::delta0, DiracCase::delta_pi, DiracCase::delta_half_pi, DiracCase::four_atoms}) {
    const auto rep = dirac_example_check(c, {64, 128, 256, 512}, {0.05, 0.1, 0.2}, detail::qmc_options(samples, 16, seed));
    out.checks.push_back({detail::cat(to_string(c), " exponents within 0.1 of (", rep.expected_f, ", ",
                                      rep.expected_N, ")"),
                          rep.pass,
                          detail::cat("f slope ", rep.slope_f, " +- ", rep.se_f, ", N slope ", rep.slope_N, " +- ",
                                      rep.se_N)});
    for (const auto& p : rep.points) out.rows.push_back({to_string(c), p.N, p.f, 0.0, p.log_p, p.log_err, "info"});
    out.rows.push_back({detail::cat(to_string(c), "-f-exponent"), 0, 0.0, rep.expected_f, rep.slope_f, rep.se_f,
                        detail::verdict(std::abs(rep.slope_f - rep.expected_f) <= 0.1)});
    out.rows.push_back({detail::cat(to_string(c), "-N-exponent"), 0, 0.0, rep.expected_N, rep.slope_N, rep.se_N,
                        detail::verdict(std::abs(rep.slope_N - rep.expected_N) <= 0.1)});
    Plot plot{detail::cat(to_string(c), ": ln p against ln f (fitted slope ", rep.slope_f, ")"), "f", "ln p", {}, true};
    std::size_t k = 0;
    for (std::size_t N : {64, 128, 256, 512}) {
      if (N != 64 && N != 512) continue;
      Series s{detail::cat("N=", N), {}, false, colors[k++ % 3]};
      for (const auto& p : rep.points)
        if (p.N == N) s.points.push_back({p.f, p.log_p, p.log_err});
      plot.series.push_back(std::move(s));
    }
    out.plots.push_back(std::move(plot));
  }
  const double secs = sw.seconds();
  out.checks.push_back({"runtime < 60 s", secs < 60.0, detail::cat(secs, " s")});
  out.wall_time_ms = 1e3 * secs;
  return out;
}

// ---------------------------------------------------------------------------
// Growing boundary, H = 1/2
// ---------------------------------------------------------------------------

/// -ln p / (N f_N^{-2}) for f_N = N^{1/4}, conditional Monte Carlo.
inline ExperimentResult mogulskii_experiment(std::uint64_t seed = 1, std::size_t paths = 1000000,
                                             const std::vector<std::size_t>& ladder = {64, 256}) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "mogulskii";
  const SpectralMeasure m = SpectralMeasure::fgn(0.5);
  const auto model = CovarianceModel::from_measure(m, ladder.back());
  const Boundary boundary = Boundary::power(1.0, 0.25);
  std::vector<double> ratio, ratio_err;
  Plot plot{"Growing boundary f_N = N^(1/4), H = 1/2", "N", "-ln p / (N f_N^-2)", {}, true};
  Series pts{"conditional MC", {}, false, "#1f77b4"};
  Series target{"pi^2/8", {}, true, "#d62728"};
  for (std::size_t N : ladder) {
    const double f = boundary(N);
    const auto pred = fbm_rate(0.5, SlowlyVaryingFn::one(), boundary, N);
    const auto b = band_probability_conditional_mc(model, N, f, paths, derive_seed(seed, N));
    const double norm = static_cast<double>(N) / (f * f);
    ratio.push_back(-b.log_p / norm);
    ratio_err.push_back(b.log_err / norm);
    out.rows.push_back({"mogulskii", N, f, pred.log_p, b.log_p, b.log_err, ""});
    pts.points.push_back({static_cast<double>(N), ratio.back(), ratio_err.back()});
    target.points.push_back({static_cast<double>(N), kKappaHalf, 0.0});
  }
  bool in_band = true;
  std::string trail;
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    in_band = in_band && ratio[i] >= 0.6 * kKappaHalf && ratio[i] <= 1.6 * kKappaHalf;
    trail += detail::cat(i ? ", " : "", "N=", ladder[i], ": ", ratio[i], " +- ", ratio_err[i]);
  }
  bool toward = true;
  for (std::size_t i = 1; i < ratio.size(); ++i)
    toward = toward && std::abs(ratio[i] - kKappaHalf) < std::abs(ratio[i - 1] - kKappaHalf);
  out.checks.push_back({"ratio within [0.6, 1.6] pi^2/8", in_band, trail});
  out.checks.push_back({"ratio moves toward pi^2/8", toward, trail});
  for (auto& r : out.rows) r.verdict = detail::verdict(in_band && toward);
  plot.series = {target, pts};
  out.plots.push_back(std::move(plot));
  out.wall_time_ms = 1e3 * sw.seconds();
  return out;
}

inline ExperimentResult kappa_experiment(std::uint64_t seed = 2024, const std::vector<double>& extra_h = {}) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "kappa";
  KappaConfig cfg;
  cfg.seed = seed;
  const auto est = estimate_kappa(0.5, cfg);
  out.checks.push_back({"CI contains pi^2/8", est.covers(kKappaHalf),
                        detail::cat("kappa=", est.kappa, " CI [", est.ci_lo, ", ", est.ci_hi, "]")});
  out.checks.push_back({"CI half-width < 0.15", est.half_width() < 0.15, detail::cat(est.half_width())});
  out.rows.push_back({"kappa-0.5", 0, 0.0, kKappaHalf, est.kappa, est.se, detail::verdict(est.covers(kKappaHalf))});
  Plot plot{"Ladder rates for the shift fit", "f = d^H", "(-c)^(-H)", {}, false};
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  std::size_t k = 0;
  auto add_series = [&](const KappaEstimate& e) {
    Series s{detail::cat("H=", e.H), {}, false, colors[k++ % 3]};
    for (const auto& r : e.rungs) {
      const double y = std::pow(-r.c, -e.H);
      s.points.push_back({r.f, y, e.H * y / -r.c * r.c_err});
      out.rows.push_back({detail::cat("kappa-rung-", e.H), r.N, r.f, 0.0, r.c, r.c_err, "info"});
    }
    plot.series.push_back(std::move(s));
  };
  add_series(est);
  for (double H : extra_h) {
    const auto e = estimate_kappa(H, cfg);
    out.rows.push_back({detail::cat("kappa-", H), 0, 0.0, 0.0, e.kappa, e.se, "info"});
    add_series(e);
  }
  out.plots.push_back(std::move(plot));
  out.wall_time_ms = 1e3 * sw.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Perturbed spectral measure
// ---------------------------------------------------------------------------

inline PerturbationSchedule default_schedule() {
  return PerturbationSchedule::with_power_boundary(0.5, {{1.5, 2, 16}, {2.0, 4, 256}});
}

/// ln p / (N f_N^{-1/H}) at the last level, perturbed against plain FGN.
inline ExperimentResult counterexample_experiment(std::uint64_t seed = 1, std::size_t samples = 65536,
                                                  std::size_t fgn_samples = 16384) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "counterexample";
  const PerturbationSchedule sch = default_schedule();
  const SpectralMeasure pm = perturbed_measure(sch);
  const double H = sch.H;
  Plot plot{"Normalized log-probability, perturbed against FGN", "N", "ln p / (N f_N^(-1/H))", {}, true};
  Series sp{"perturbed", {}, false, "#d62728"};
  Series sf{"FGN", {}, false, "#1f77b4"};
  double last_gap = 0.0, last_err = 0.0;
  for (std::size_t j = 0; j < sch.levels.size(); ++j) {
    const std::size_t N = sch.levels[j].N;
    const double f = sch.boundary(N);
    const double norm = static_cast<double>(N) * std::pow(f, -1.0 / H);
    const auto pmod = CovarianceModel::from_measure(pm, N);
    const auto fmod = CovarianceModel::from_measure(SpectralMeasure::fgn(H), N);
    const auto a = band_probability_qmc(pmod, N, f, detail::qmc_options(samples, 16, derive_seed(seed, 2 * j)));
    const auto b = band_probability_qmc(fmod, N, f, detail::qmc_options(fgn_samples, 16, derive_seed(seed, 2 * j + 1)));
    const double ra = a.log_p / norm, rb = b.log_p / norm;
    last_gap = ra - rb;
    last_err = std::hypot(a.log_err, b.log_err) / norm;
    out.rows.push_back({"counterexample-perturbed", N, f, 0.0, ra, a.log_err / norm, "info"});
    out.rows.push_back({"counterexample-fgn", N, f, 0.0, rb, b.log_err / norm, "info"});
    sp.points.push_back({static_cast<double>(N), ra, a.log_err / norm});
    sf.points.push_back({static_cast<double>(N), rb, b.log_err / norm});
    const double C = pmq_constant(sch, j);
    const auto pmq = perturbation_pmq(sch.levels[j].M, sch.levels[j].q, C, H, 200000, derive_seed(seed, 100 + j));
    out.rows.push_back({"counterexample-pmq", N, f, 0.0, pmq.p, pmq.err, "info"});
  }
  const bool ok = last_gap > 3.0 * last_err;
  out.checks.push_back({"perturbed ratio exceeds FGN by 3 combined errors", ok,
                        detail::cat("difference ", last_gap, ", combined error ", last_err, ", ",
                                    last_gap / last_err, " errors")});
  out.rows.back().verdict = "info";
  out.rows.push_back({"counterexample-gap", sch.levels.back().N, sch.boundary(sch.levels.back().N), 3.0 * last_err,
                      last_gap, last_err, detail::verdict(ok)});
  plot.series = {sf, sp};
  out.plots.push_back(std::move(plot));
  out.wall_time_ms = 1e3 * sw.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Property suites
// ---------------------------------------------------------------------------

struct PropertyOptions {
  std::size_t samples = 4096;
  std::size_t randomizations = 16;
  std::size_t sampler_paths = 20000;
  std::size_t trials = 3;
};

namespace detail {

/// Flat level plus one random symmetric atom pair.
inline SpectralMeasure random_measure(CounterRng& rng) {
  const double flat = 0.5 + rng.uniform();
  const double u = 0.2 + 2.6 * rng.uniform();
  const double w = 0.5 * rng.uniform();
  return SpectralMeasure::white_noise(flat).with_atoms({{u, w}, {-u, w}}).with_label("random");
}

}  // namespace detail

/// mu(B1 & B2) >= mu(B1) mu(B2) for bands on random index sets.
inline Check correlation_inequality_suite(std::uint64_t seed, const PropertyOptions& po = {}) {
  CounterRng rng(seed, streams::kTests, 1);
  bool ok = true;
  std::string detail;
  for (std::size_t t = 0; t < po.trials; ++t) {
    const std::size_t N = 3 + static_cast<std::size_t>(4.0 * rng.uniform());
    const auto model = CovarianceModel::from_measure(detail::random_measure(rng), N);
    const auto sigma = partial_sum_covariance(model, N).sigma;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> e1(N, inf), e2(N, inf);
    const double eps1 = 0.5 + 1.5 * rng.uniform(), eps2 = 0.5 + 1.5 * rng.uniform();
    for (std::size_t n = 0; n < N; ++n) {
      const double s = std::sqrt(sigma(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
      if (rng.uniform() < 0.5) e1[n] = eps1 * s;
      if (rng.uniform() < 0.5) e2[n] = eps2 * s;
    }
    e1[0] = std::min(e1[0], eps1);
    e2[N - 1] = std::min(e2[N - 1], eps2);
    std::vector<double> e12(N);
    for (std::size_t n = 0; n < N; ++n) e12[n] = std::min(e1[n], e2[n]);
    auto box = [&](const std::vector<double>& e, std::uint64_t salt) {
      std::vector<double> lo(N);
      for (std::size_t n = 0; n < N; ++n) lo[n] = -e[n];
      return mvn_box_qmc(sigma, lo, e, detail::qmc_options(po.samples, po.randomizations, derive_seed(seed, salt)));
    };
    const auto p1 = box(e1, 10 * t + 1), p2 = box(e2, 10 * t + 2), p12 = box(e12, 10 * t + 3);
    const double err = std::sqrt(p12.err * p12.err + std::pow(p2.p * p1.err, 2) + std::pow(p1.p * p2.err, 2));
    const bool pass = p12.p >= p1.p * p2.p - 3.0 * err;
    ok = ok && pass;
    detail += detail::cat(t ? "; " : "", "N=", N, " p12=", p12.p, " p1*p2=", p1.p * p2.p);
  }
  return {"gaussian correlation inequality", ok, detail};
}

/// Adding an independent component never increases the band probability.
inline Check anderson_suite(std::uint64_t seed, const PropertyOptions& po = {}) {
  CounterRng rng(seed, streams::kTests, 2);
  bool ok = true;
  std::string detail;
  for (std::size_t t = 0; t < po.trials; ++t) {
    const std::size_t N = 4 + static_cast<std::size_t>(5.0 * rng.uniform());
    const double H = 0.3 + 0.5 * rng.uniform();
    const double f = 0.5 + 1.5 * rng.uniform();
    const SpectralMeasure base = SpectralMeasure::fgn(H);
    const double u = 0.2 + 2.6 * rng.uniform(), w = 0.1 + 0.4 * rng.uniform();
    const SpectralMeasure bigger = base.with_flat(0.2 * rng.uniform() + 0.05).with_atoms({{u, w}, {-u, w}});
    const auto a = band_probability_qmc(CovarianceModel::from_measure(base, N), N, f,
                                        detail::qmc_options(po.samples, po.randomizations, derive_seed(seed, 20 + t)));
    const auto b = band_probability_qmc(CovarianceModel::from_measure(bigger, N), N, f,
                                        detail::qmc_options(po.samples, po.randomizations, derive_seed(seed, 40 + t)));
    const bool pass = b.log_p <= a.log_p + 3.0 * std::hypot(a.log_err, b.log_err);
    ok = ok && pass;
    detail += detail::cat(t ? "; " : "", "N=", N, " ln p(mu')=", a.log_p, " ln p(mu)=", b.log_p);
  }
  return {"anderson monotonicity", ok, detail};
}

/// ln p(f2) >= (ln p(f1) + ln p(f3)) / 2 on an equally spaced grid.
inline Check log_concavity_suite(std::uint64_t seed, const PropertyOptions& po = {}) {
  CounterRng rng(seed, streams::kTests, 3);
  bool ok = true;
  std::string detail;
  const SpectralMeasure measures[] = {SpectralMeasure::white_noise(), SpectralMeasure::fgn(0.3),
                                      SpectralMeasure::fgn(0.7)};
  constexpr std::size_t N = 16;
  for (std::size_t t = 0; t < po.trials; ++t) {
    const auto model = CovarianceModel::from_measure(measures[t % 3], N);
    const double f1 = 0.3 + 0.7 * rng.uniform(), h = 0.1 + 0.4 * rng.uniform();
    BandProbability p[3];
    for (int i = 0; i < 3; ++i)
      p[i] = band_probability_qmc(model, N, f1 + i * h,
                                  detail::qmc_options(po.samples, po.randomizations, derive_seed(seed, 60 + 3 * t + i)));
    const double err = std::sqrt(p[1].log_err * p[1].log_err + 0.25 * p[0].log_err * p[0].log_err +
                                 0.25 * p[2].log_err * p[2].log_err);
    const double slack = p[1].log_p - 0.5 * (p[0].log_p + p[2].log_p);
    ok = ok && slack >= -3.0 * err;
    detail += detail::cat(t ? "; " : "", measures[t % 3].label(), " slack=", slack);
  }
  return {"log-concavity in f", ok, detail};
}

/// regularized lower bound <= ln p <= volumetric upper bound.
inline Check sandwich_suite(std::uint64_t seed, const PropertyOptions& po = {}) {
  bool ok = true;
  std::string detail;
  const SpectralMeasure measures[] = {SpectralMeasure::white_noise(), SpectralMeasure::fgn(0.3),
                                      SpectralMeasure::fgn(0.7)};
  std::size_t count = 0, failures = 0;
  for (const auto& m : measures) {
    const auto model = CovarianceModel::from_measure(m, 64);
    for (std::size_t N : {8, 32, 64})
      for (double f : {0.25, 1.0}) {
        const auto b = band_probability_qmc(
            model, N, f, detail::qmc_options(po.samples, po.randomizations, derive_seed(seed, 100 + count)));
        const double lo = regularized_lower_bound_best(model, N, f).value;
        const double hi = volumetric_upper_bound(model, N, f);
        const double slack = 3.0 * b.log_err;
        const bool pass = lo <= b.log_p + slack && b.log_p <= hi + slack;
        ++count;
        if (!pass) {
          ++failures;
          detail += detail::cat(m.label(), " N=", N, " f=", f, " lo=", lo, " ln p=", b.log_p, " hi=", hi, "; ");
        }
        ok = ok && pass;
      }
  }
  detail += detail::cat(count - failures, "/", count, " instances inside");
  return {"volumetric/regularized sandwich", ok, detail};
}

/// Kolmogorov-Smirnov on max |S_n| from the circulant and Cholesky samplers.
inline Check sampler_agreement_suite(std::uint64_t seed, const PropertyOptions& po = {}) {
  constexpr std::size_t N = 64;
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.7), N);
  const auto a = detail::path_maxima(sample_circulant(model, N, po.sampler_paths, seed));
  const auto b = detail::path_maxima(sample_cholesky(model, N, po.sampler_paths, seed));
  const double d = detail::ks_statistic(a, b);
  const double crit = detail::ks_critical(1e-3, a.size(), b.size());
  return {"circulant vs cholesky (KS, alpha=1e-3)", d <= crit, detail::cat("D=", d, " critical=", crit)};
}

inline ExperimentResult property_experiment(const std::vector<std::uint64_t>& seeds = {1, 2, 3, 4, 5},
                                            const PropertyOptions& po = {}) {
  detail::Stopwatch sw;
  ExperimentResult out;
  out.name = "properties";
  using Suite = std::function<Check(std::uint64_t, const PropertyOptions&)>;
  const Suite suites[] = {correlation_inequality_suite, anderson_suite, log_concavity_suite, sandwich_suite,
                          sampler_agreement_suite};
  for (const Suite& suite : suites) {
    Check combined;
    combined.pass = true;
    for (std::uint64_t s : seeds) {
      const Check c = suite(s, po);
      combined.name = c.name;
      combined.pass = combined.pass && c.pass;
      if (!c.pass) combined.detail += detail::cat("seed ", s, ": ", c.detail, " | ");
    }
    if (combined.pass) combined.detail = detail::cat("all ", seeds.size(), " seeds pass");
    out.checks.push_back(std::move(combined));
  }
  const double secs = sw.seconds();
  out.checks.push_back({"runtime < 300 s", secs < 300.0, detail::cat(secs, " s")});
  out.wall_time_ms = 1e3 * secs;
  return out;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"mogulskii", "szego", "dirac", "transfer", "counterexample", "kappa"};
  return names;
}

inline ExperimentResult run_preset(const std::string& name, std::uint64_t seed) {
  if (name == "mogulskii") return mogulskii_experiment(seed);
  if (name == "szego") return szego_experiment(seed);
  if (name == "dirac") return dirac_experiment(seed);
  if (name == "transfer") return transfer_experiment();
  if (name == "counterexample") return counterexample_experiment(seed);
  if (name == "kappa") return kappa_experiment(seed);
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace smalldev
