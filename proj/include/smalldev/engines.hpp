#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smalldev/covariance.hpp"
#include "smalldev/detail/log.hpp"
#include "smalldev/detail/numeric.hpp"
#include "smalldev/error.hpp"
#include "smalldev/parallel.hpp"
#include "smalldev/rng.hpp"
#include "smalldev/sampler.hpp"
#include "smalldev/spectral.hpp"

namespace smalldev {

/// Estimate of P{max_{n<=N} |S_n| <= f}.
struct BandProbability {
  double log_p = -std::numeric_limits<double>::infinity();
  double p = 0.0;
  double err = 0.0;      // absolute standard error of p (or quadrature gap)
  double log_err = 0.0;  // standard error of log_p, about err / p
  std::string method;
  std::size_t N = 0;
  double f = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  bool upper_bound_only = false;  // zero hits: log_p is a 95% upper bound
  bool low_count = false;         // fewer than 25 hits
  bool out_of_range = false;      // counting estimate below e^-40
  double wall_time_ms = 0.0;
};

enum class PointSet { lattice, pseudo };

struct QmcOptions {
  std::size_t samples = 8192;  // points per randomization
  std::size_t randomizations = 16;
  std::uint64_t seed = 1;
  PointSet points = PointSet::lattice;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

/// Randomly shifted Kronecker lattice with generators frac(sqrt(prime)),
/// folded by the tent map; or plain pseudo-random points.
class PointStream {
 public:
  PointStream(std::size_t dim, const QmcOptions& opt, std::size_t replicate) : dim_(dim), opt_(opt), rep_(replicate) {
    if (opt.points == PointSet::lattice) {
      const auto primes = first_primes(dim);
      alpha_.resize(dim);
      shift_.resize(dim);
      CounterRng rng(opt.seed, streams::kQmcShift, replicate);
      for (std::size_t i = 0; i < dim; ++i) {
        const double s = std::sqrt(static_cast<double>(primes[i]));
        alpha_[i] = s - std::floor(s);
        shift_[i] = rng.uniform();
      }
    }
  }

  /// Coordinates of point k of this replicate.
  void point(std::size_t k, double* x) const {
    if (opt_.points == PointSet::lattice) {
      const double kd = static_cast<double>(k + 1);
      for (std::size_t i = 0; i < dim_; ++i) {
        double v = kd * alpha_[i] + shift_[i];
        v -= std::floor(v);
        v = 1.0 - std::abs(2.0 * v - 1.0);
        x[i] = std::clamp(v, 1e-16, 1.0 - 1e-16);
      }
    } else {
      CounterRng rng(opt_.seed, streams::kConditionalMc, rep_ * opt_.samples + k);
      for (std::size_t i = 0; i < dim_; ++i) x[i] = rng.uniform();
    }
  }

 private:
  std::size_t dim_;
  QmcOptions opt_;
  std::size_t rep_;
  std::vector<double> alpha_, shift_;
};

/// Runs `log_weight(points, k)` over every (replicate, point) and combines
/// replicate means into an estimate. Blocks are merged in a fixed order,
/// so the result does not depend on the thread count.
template <class LogWeight>
BandProbability replicate_estimate(std::size_t dim, const QmcOptions& opt, LogWeight&& log_weight) {
  if (opt.randomizations < 2) throw DomainError("need at least 2 randomizations for an error estimate");
  if (opt.samples == 0) throw DomainError("need at least one sample per randomization");
  constexpr std::size_t kBlock = 512;
  const std::size_t blocks = (opt.samples + kBlock - 1) / kBlock;
  std::vector<LogSumExp> acc(opt.randomizations * blocks);
  std::vector<PointStream> pts;
  for (std::size_t r = 0; r < opt.randomizations; ++r) pts.emplace_back(dim, opt, r);
  parallel_for(acc.size(), [&](std::size_t job) {
    const std::size_t r = job / blocks, b = job % blocks;
    std::vector<double> x(dim);
    LogSumExp lse;
    const std::size_t end = std::min(opt.samples, (b + 1) * kBlock);
    for (std::size_t k = b * kBlock; k < end; ++k) {
      pts[r].point(k, x.data());
      lse.add(log_weight(x.data()));
    }
    acc[job] = lse;
  });
  std::vector<double> rep_log(opt.randomizations);
  for (std::size_t r = 0; r < opt.randomizations; ++r) {
    LogSumExp lse;
    for (std::size_t b = 0; b < blocks; ++b) lse.merge(acc[r * blocks + b]);
    rep_log[r] = lse.log_mean();
  }
  BandProbability out;
  const double top = *std::max_element(rep_log.begin(), rep_log.end());
  const double R = static_cast<double>(opt.randomizations);
  if (top == -std::numeric_limits<double>::infinity()) {
    out.log_p = top;
    return out;
  }
  double mean = 0.0;
  for (double l : rep_log) mean += std::exp(l - top);
  mean /= R;
  double var = 0.0;
  for (double l : rep_log) {
    const double d = std::exp(l - top) - mean;
    var += d * d;
  }
  var /= (R - 1.0);
  const double se_scaled = std::sqrt(var / R);
  out.log_p = top + std::log(mean);
  out.p = std::exp(out.log_p);
  out.log_err = se_scaled / mean;
  out.err = out.p * out.log_err;
  out.samples = opt.samples * opt.randomizations;
  out.seed = opt.seed;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sequential conditioning in S-coordinates
// ---------------------------------------------------------------------------

/// P{lower <= X <= upper} for X ~ N(0, sigma), integrating the coordinates
/// in their given order. Bounds may be infinite.
inline BandProbability mvn_box_qmc(const Eigen::MatrixXd& sigma, const std::vector<double>& lower,
                                   const std::vector<double>& upper, const QmcOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = sigma.rows();
  if (sigma.cols() != n || lower.size() != static_cast<std::size_t>(n) || upper.size() != static_cast<std::size_t>(n))
    throw DomainError("mvn_box_qmc: dimension mismatch");
  // Cholesky with an explicit pivot check.
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = sigma(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 1e-10 * sigma(j, j))) {
      std::ostringstream os;
      os << "degenerate covariance: use analytic reduction (conditional variance " << d << " at coordinate " << j + 1
         << ")";
      throw DegenerateCovariance(os.str());
    }
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = sigma(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  const auto dim = static_cast<std::size_t>(n);
  auto log_weight = [&](const double* x) {
    thread_local std::vector<double> y;
    y.assign(dim, 0.0);
    double lw = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double mu = 0.0;
      for (std::size_t k = 0; k < i; ++k) mu += L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * y[k];
      const double s = L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
      const auto draw = detail::truncated_normal_draw((lower[i] - mu) / s, (upper[i] - mu) / s, x[i]);
      if (!(draw.mass > 0.0)) return -std::numeric_limits<double>::infinity();
      lw += std::log(draw.mass);
      y[i] = draw.z;
    }
    return lw;
  };
  BandProbability out = detail::replicate_estimate(dim, opt, log_weight);
  out.method = opt.points == PointSet::lattice ? "qmc" : "conditional-mc";
  out.N = dim;
  out.wall_time_ms = detail::elapsed_ms(t0);
  return out;
}

/// Band probability from an explicit partial-sum covariance.
inline BandProbability band_probability_qmc(const PartialSumCovariance& sigma, double f, const QmcOptions& opt = {}) {
  if (!(f > 0.0)) throw DomainError("band half-width must be positive");
  std::vector<double> lo(sigma.N, -f), hi(sigma.N, f);
  BandProbability out = mvn_box_qmc(sigma.sigma, lo, hi, opt);
  out.f = f;
  return out;
}

/// Band probability for a stationary model, conditioning on the steps
/// xi_1, xi_2, ... through the Durbin-Levinson predictor. This is the same
/// estimator as the S-coordinate version, since both filtrations coincide.
inline BandProbability band_probability_qmc(const CovarianceModel& model, std::size_t N, double f,
                                            const QmcOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(f > 0.0)) throw DomainError("band half-width must be positive");
  const bool white = model.is_white();
  Levinson lev;
  if (white) {
    lev.v.assign(N, model.r(0));
  } else {
    lev = levinson(model, N, true);
  }
  std::vector<double> sd(N);
  for (std::size_t k = 0; k < N; ++k) {
    if (!(lev.v[k] > 1e-10 * model.r(0))) {
      std::ostringstream os;
      os << "degenerate covariance: use analytic reduction (innovation variance " << lev.v[k] << " at step " << k + 1
         << ")";
      throw DegenerateCovariance(os.str());
    }
    sd[k] = std::sqrt(lev.v[k]);
  }
  auto log_weight = [&](const double* x) {
    thread_local std::vector<double> xi;
    xi.assign(N, 0.0);
    double S = 0.0, lw = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      double mu = 0.0;
      if (!white && k > 0) {
        const auto& phi = lev.phi[k];
        for (std::size_t j = 0; j < k; ++j) mu += phi[j] * xi[k - 1 - j];
      }
      const double a = (-f - S - mu) / sd[k], b = (f - S - mu) / sd[k];
      const auto draw = detail::truncated_normal_draw(a, b, x[k]);
      if (!(draw.mass > 0.0)) return -std::numeric_limits<double>::infinity();
      lw += std::log(draw.mass);
      xi[k] = mu + sd[k] * draw.z;
      S += xi[k];
    }
    return lw;
  };
  BandProbability out = detail::replicate_estimate(N, opt, log_weight);
  out.method = opt.points == PointSet::lattice ? "qmc" : "conditional-mc";
  out.N = N;
  out.f = f;
  out.wall_time_ms = detail::elapsed_ms(t0);
  return out;
}

/// Sequential-conditioning estimator driven by pseudo-random points: every
/// path carries the exact conditional weight instead of a 0/1 hit, which
/// keeps the relative error bounded where counting would see no hits.
inline BandProbability band_probability_conditional_mc(const CovarianceModel& model, std::size_t N, double f,
                                                       std::size_t paths, std::uint64_t seed,
                                                       std::size_t replicates = 16) {
  QmcOptions opt;
  opt.points = PointSet::pseudo;
  opt.randomizations = replicates;
  opt.samples = (paths + replicates - 1) / replicates;
  opt.seed = seed;
  return band_probability_qmc(model, N, f, opt);
}

// ---------------------------------------------------------------------------
// Counting Monte Carlo
// ---------------------------------------------------------------------------

inline BandProbability band_probability_mc(const SpectralMeasure& measure, std::size_t N, double f, std::size_t samples,
                                           std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(f > 0.0)) throw DomainError("band half-width must be positive");
  if (samples == 0) throw DomainError("need at least one sample");
  const MeasureSampler sampler(measure, N, seed);
  constexpr std::size_t kChunk = 2048;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<std::size_t> hits(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk, count = std::min(kChunk, samples - first);
    std::vector<double> buf(count * N);
    sampler.fill(first, count, buf.data());
    std::size_t h = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const double* row = buf.data() + i * N;
      bool inside = true;
      for (std::size_t n = 0; n < N && inside; ++n) inside = std::abs(row[n]) <= f;
      h += inside ? 1 : 0;
    }
    hits[c] = h;
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  BandProbability out;
  out.method = "mc";
  out.N = N;
  out.f = f;
  out.seed = seed;
  out.samples = samples;
  const double n = static_cast<double>(samples);
  if (total == 0) {
    // One-sided 95% bound: (1-p)^n = 0.05.
    out.upper_bound_only = true;
    out.p = -std::log(0.05) / n;
    out.log_p = std::log(out.p);
    out.err = out.p;
    out.log_err = std::numeric_limits<double>::infinity();
    detail::warn("counting MC saw no hits; reporting a 95% upper bound");
  } else {
    out.p = static_cast<double>(total) / n;
    out.log_p = std::log(out.p);
    out.err = std::sqrt(out.p * (1.0 - out.p) / n);
    out.log_err = out.err / out.p;
    out.low_count = total < 25;
  }
  out.out_of_range = out.log_p < -40.0;
  out.wall_time_ms = detail::elapsed_ms(t0);
  return out;
}

// ---------------------------------------------------------------------------
// Finite-rank reduction for purely atomic measures
// ---------------------------------------------------------------------------

/// Writes S = A' z' with z' standard normal in R^r, r = rank, then changes
/// variables to y = B z' for r well-conditioned rows B of A'. The event is
/// y in [-f,f]^r together with |C y| <= f for the remaining rows, and the
/// probability is the integral of the N(0, B B^T) density over that set.
inline BandProbability band_probability_atomic(const SpectralMeasure& measure, std::size_t N, double f,
                                               const QmcOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if (measure.has_density()) throw DomainError("analytic reduction requires a purely atomic measure");
  if (!(f > 0.0)) throw DomainError("band half-width must be positive");
  const Eigen::MatrixXd A = atom_design(measure, N);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > 1e-10 * s(0)) ++r;
  const Eigen::MatrixXd Ar = svd.matrixU().leftCols(r) * s.head(r).asDiagonal();
  // Greedy volume-maximizing row selection.
  std::vector<Eigen::Index> rows;
  Eigen::MatrixXd R = Ar;
  for (Eigen::Index k = 0; k < r; ++k) {
    Eigen::Index best = 0;
    R.rowwise().squaredNorm().maxCoeff(&best);
    rows.push_back(best);
    const Eigen::RowVectorXd q = R.row(best) / R.row(best).norm();
    R -= (R * q.transpose()) * q;
  }
  Eigen::MatrixXd B(r, r);
  for (Eigen::Index k = 0; k < r; ++k) B.row(k) = Ar.row(rows[static_cast<std::size_t>(k)]);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  const Eigen::MatrixXd Binv = lu.inverse();
  const Eigen::MatrixXd C = Ar * Binv;
  const double log_norm = -0.5 * static_cast<double>(r) * std::log(detail::kTwoPi) - std::log(std::abs(lu.determinant()));

  BandProbability out;
  out.method = "atomic";
  out.N = N;
  out.f = f;
  out.seed = opt.seed;
  if (r == 1) {
    // Exact: |c_n y| <= f for all n reduces to |y| <= f / max|c_n|.
    const double sd = std::abs(B(0, 0));
    const double half = f / C.cwiseAbs().maxCoeff();
    out.p = detail::normal_interval_mass(-half / sd, half / sd);
    out.log_p = std::log(out.p);
    out.wall_time_ms = detail::elapsed_ms(t0);
    return out;
  }
  const auto dim = static_cast<std::size_t>(r);
  const double log_vol = static_cast<double>(r) * std::log(2.0 * f);
  auto log_weight = [&](const double* x) {
    Eigen::VectorXd y(r);
    for (Eigen::Index i = 0; i < r; ++i) y(i) = f * (2.0 * x[i] - 1.0);
    const Eigen::VectorXd Sy = C * y;
    if (Sy.cwiseAbs().maxCoeff() > f) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd zz = Binv * y;
    return log_vol + log_norm - 0.5 * zz.squaredNorm();
  };
  const auto est = detail::replicate_estimate(dim, opt, log_weight);
  out.log_p = est.log_p;
  out.p = est.p;
  out.err = est.err;
  out.log_err = est.log_err;
  out.samples = est.samples;
  out.wall_time_ms = detail::elapsed_ms(t0);
  return out;
}

/// Picks the engine: the analytic reduction for purely atomic measures,
/// otherwise QMC on the stationary model.
inline BandProbability band_probability(const SpectralMeasure& measure, std::size_t N, double f,
                                        const QmcOptions& opt = {}) {
  if (measure.is_purely_atomic()) return band_probability_atomic(measure, N, f, opt);
  const auto model = CovarianceModel::from_measure(measure, N);
  return band_probability_qmc(model, N, f, opt);
}

// ---------------------------------------------------------------------------
// Transfer operator (independent standard normal steps)
// ---------------------------------------------------------------------------

struct TransferRate {
  double f = 0.0;
  double c = 0.0;  // ln lambda1
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t nodes = 0;
  double err = 0.0;  // |ln lambda1(2 nodes) - ln lambda1(nodes)|
};

namespace detail {

/// Symmetrized Nystrom matrix sqrt(w_i) phi(x_i - x_j) sqrt(w_j) on [-f,f].
inline Eigen::MatrixXd nystrom_kernel(double f, std::size_t nodes, std::vector<double>* x_out = nullptr,
                                      std::vector<double>* w_out = nullptr) {
  auto [x, w] = gauss_legendre(static_cast<int>(nodes));
  for (std::size_t i = 0; i < nodes; ++i) {
    x[i] *= f;
    w[i] *= f;
  }
  const auto n = static_cast<Eigen::Index>(nodes);
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      K(i, j) = std::sqrt(w[i]) * normal_pdf(x[i] - x[j]) * std::sqrt(w[j]);
  if (x_out) *x_out = x;
  if (w_out) *w_out = w;
  return K;
}

inline std::pair<double, double> top_eigenvalues(double f, std::size_t nodes) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nystrom_kernel(f, nodes), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("transfer operator eigensolver did not converge");
  const auto& ev = es.eigenvalues();
  return {ev(ev.size() - 1), ev.size() > 1 ? ev(ev.size() - 2) : 0.0};
}

}  // namespace detail

inline TransferRate transfer_rate(double f, std::size_t nodes = 200) {
  if (!(f > 0.0)) throw DomainError("transfer_rate: f must be positive");
  if (nodes < 16) throw DomainError("transfer_rate: need at least 16 nodes");
  const auto [l1, l2] = detail::top_eigenvalues(f, nodes);
  const auto [d1, d2] = detail::top_eigenvalues(f, 2 * nodes);
  (void)d2;
  TransferRate t;
  t.f = f;
  t.nodes = nodes;
  t.lambda1 = l1;
  t.lambda2 = l2;
  t.c = std::log(l1);
  t.err = std::abs(std::log(d1) - t.c);
  return t;
}

/// Exact finite-N band probability for i.i.d. N(0,1) steps, by iterating
/// the discretized transfer operator; err is the node-doubling gap in p.
inline BandProbability band_probability_transfer(double f, std::size_t N, std::size_t nodes = 200) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(f > 0.0)) throw DomainError("band half-width must be positive");
  auto run = [&](std::size_t m) {
    std::vector<double> x, w;
    const Eigen::MatrixXd K = detail::nystrom_kernel(f, m, &x, &w);
    const auto n = static_cast<Eigen::Index>(m);
    // g_k(x_i) sqrt(w_i); g_1 = phi.
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = detail::normal_pdf(x[i]) * std::sqrt(w[i]);
    double log_scale = 0.0;
    for (std::size_t k = 1; k < N; ++k) {
      g = K * g;
      const double s = g.cwiseAbs().maxCoeff();
      g /= s;
      log_scale += std::log(s);
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += std::sqrt(w[i]) * g(i);
    return log_scale + std::log(total);
  };
  BandProbability out;
  out.method = "transfer";
  out.N = N;
  out.f = f;
  out.log_p = run(nodes);
  out.p = std::exp(out.log_p);
  out.log_err = std::abs(run(2 * nodes) - out.log_p);
  out.err = out.p * out.log_err;
  out.wall_time_ms = detail::elapsed_ms(t0);
  return out;
}

}  // namespace smalldev
