#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smalldev/boundary.hpp"
#include "smalldev/detail/numeric.hpp"
#include "smalldev/error.hpp"

namespace smalldev {

// ---------------------------------------------------------------------------
// Hurst parameter
// ---------------------------------------------------------------------------

/// Hurst index H in (0,1) together with the spectral constant
/// m_H = Gamma(2H+1) sin(pi H) / (2 pi) of fractional Brownian motion.
struct HurstParams {
  double H = 0.5;
  double m_H = 1.0 / detail::kTwoPi;

  HurstParams() = default;
  explicit HurstParams(double h) : H(h) {
    if (!(h > 0.0 && h < 1.0)) {
      std::ostringstream os;
      os << "Hurst parameter must lie in (0,1), got " << h;
      throw DomainError(os.str());
    }
    m_H = std::tgamma(2.0 * h + 1.0) * std::sin(detail::kPi * h) / detail::kTwoPi;
  }
};

// ---------------------------------------------------------------------------
// Slowly varying functions
// ---------------------------------------------------------------------------

class SlowlyVaryingFn {
 public:
  enum class Family { one, log_power, custom };

  SlowlyVaryingFn() = default;

  static SlowlyVaryingFn one() { return {}; }

  /// l(x) = |ln x|^a with a in [-2, 2].
  static SlowlyVaryingFn log_power(double a) {
    if (!(a >= -2.0 && a <= 2.0)) throw DomainError("log-power slowly varying exponent must lie in [-2,2]");
    SlowlyVaryingFn s;
    s.family_ = Family::log_power;
    s.a_ = a;
    return s;
  }

  static SlowlyVaryingFn custom(std::function<double(double)> fn, std::string name = "custom") {
    SlowlyVaryingFn s;
    s.family_ = Family::custom;
    s.fn_ = std::make_shared<const std::function<double(double)>>(std::move(fn));
    s.name_ = std::move(name);
    return s;
  }

  double operator()(double x) const {
    switch (family_) {
      case Family::one:
        return 1.0;
      case Family::log_power:
        return std::pow(std::abs(std::log(x)), a_);
      case Family::custom:
        return (*fn_)(x);
    }
    return 1.0;
  }

  /// sqrt(l(r^{-1/H})), the function whose adjoint enters the rates.
  double tilde(double r, double H) const {
    if (family_ == Family::one) return 1.0;
    return std::sqrt((*this)(std::pow(r, -1.0 / H)));
  }

  Family family() const { return family_; }
  double exponent() const { return a_; }
  const std::string& name() const { return name_; }

 private:
  Family family_ = Family::one;
  double a_ = 0.0;
  std::shared_ptr<const std::function<double(double)>> fn_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Fractional Gaussian noise
// ---------------------------------------------------------------------------

inline constexpr int kDefaultTruncation = 256;

/// FGN spectral density: the 2*pi-periodization of m_H |1-e^{-iu}|^2 |u|^{-2H-1}.
/// The tail |k| > K is replaced by its midpoint-rule integral.
inline double fgn_spectral_density(const HurstParams& hp, double u, int truncation = kDefaultTruncation) {
  using detail::kPi;
  using detail::kTwoPi;
  if (truncation < 8) throw DomainError("fgn_spectral_density: truncation must be at least 8");
  if (!(u >= -kPi && u < kPi)) throw DomainError("fgn_spectral_density: frequency outside [-pi, pi)");
  const double H = hp.H;
  const double s = 2.0 * H + 1.0;
  if (u == 0.0) {
    if (H > 0.5) throw DomainError("fgn_spectral_density: singular point u=0 for H>1/2");
    return H == 0.5 ? hp.m_H : 0.0;
  }
  const double x = std::abs(u);
  double sum = std::pow(x, -s);
  for (int k = 1; k <= truncation; ++k) {
    sum += std::pow(kTwoPi * k + x, -s) + std::pow(kTwoPi * k - x, -s);
  }
  const double edge = kTwoPi * (truncation + 0.5);
  sum += (std::pow(edge + x, -2.0 * H) + std::pow(edge - x, -2.0 * H)) / (2.0 * H * kTwoPi);
  const double sin_half = std::sin(0.5 * x);
  return hp.m_H * 4.0 * sin_half * sin_half * sum;
}

/// Closed-form FGN autocovariance 0.5(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}),
/// evaluated by a binomial series for large lags to avoid cancellation.
inline double fgn_autocovariance(double H, long long k) {
  k = k < 0 ? -k : k;
  if (k == 0) return 1.0;
  const double two_h = 2.0 * H;
  if (k == 1) return 0.5 * (std::pow(2.0, two_h) - 2.0);
  const double kd = static_cast<double>(k);
  if (k < 10) {
    return 0.5 * (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) + std::pow(kd - 1.0, two_h));
  }
  // (1+x)^{2H} + (1-x)^{2H} - 2 = 2 sum_{j>=1} binom(2H, 2j) x^{2j}, x = 1/k.
  const double x2 = 1.0 / (kd * kd);
  double coef = 1.0, term_pow = 1.0, series = 0.0;
  for (int j = 1; j <= 40; ++j) {
    coef *= (two_h - (2 * j - 2)) * (two_h - (2 * j - 1)) / ((2.0 * j - 1.0) * (2.0 * j));
    term_pow *= x2;
    const double t = coef * term_pow;
    series += t;
    if (std::abs(t) < 1e-18 * std::abs(series)) break;
  }
  return std::pow(kd, two_h) * series;
}

/// Integral of g(u) p_FGN(u) over [a,b], 0 <= a < b <= pi. A leading piece
/// starting at zero uses u = c s^{1/(2-2H)}, which turns the |u|^{1-2H}
/// behaviour into a smooth integrand. Extra breakpoints split oscillatory g.
template <class G>
detail::QuadratureResult fgn_weighted_integral(const HurstParams& hp, int truncation, G&& g, double a, double b,
                                               double abs_tol, double max_piece = detail::kPi) {
  if (!(a >= 0.0 && b <= detail::kPi + 1e-15 && a <= b)) throw DomainError("fgn_weighted_integral: bad interval");
  if (a == b) return {};
  auto p = [&](double u) { return fgn_spectral_density(hp, std::min(u, std::nextafter(detail::kPi, 0.0)), truncation); };
  std::vector<double> breaks;
  double start = a;
  detail::QuadratureResult out;
  const std::size_t n_pieces =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / std::max(max_piece, 1e-12))));
  const double width = (b - a) / static_cast<double>(n_pieces);
  const double tol = abs_tol / static_cast<double>(n_pieces + 1);
  if (a == 0.0) {
    const double c = std::min(b, width);
    const double gamma = 1.0 / (2.0 - 2.0 * hp.H);
    auto sub = [&](double s) {
      if (s <= 0.0) return 0.0;
      const double u = c * std::pow(s, gamma);
      if (!(u > 0.0)) return 0.0;
      return g(u) * p(u) * c * gamma * std::pow(s, gamma - 1.0);
    };
    const auto r = detail::integrate(sub, 0.0, 1.0, tol);
    out.value += r.value;
    out.error += r.error;
    start = c;
  }
  for (std::size_t i = 0; i < n_pieces; ++i) {
    const double lo = std::max(start, a + width * static_cast<double>(i));
    const double hi = (i + 1 == n_pieces) ? b : a + width * static_cast<double>(i + 1);
    if (hi <= lo) continue;
    const auto r = detail::integrate([&](double u) { return g(u) * p(u); }, lo, hi, tol);
    out.value += r.value;
    out.error += r.error;
  }
  return out;
}

/// nu_H mass of [a,b] for 0 <= a < b <= pi (one side of the spectrum).
inline double fgn_interval_mass(const HurstParams& hp, double a, double b, int truncation = kDefaultTruncation,
                                double abs_tol = 1e-13) {
  return fgn_weighted_integral(hp, truncation, [](double) { return 1.0; }, a, b, abs_tol).value;
}

// ---------------------------------------------------------------------------
// Spectral measures
// ---------------------------------------------------------------------------

struct Atom {
  double u = 0.0;  // frequency in [-pi, pi)
  double w = 0.0;  // weight > 0
};

/// Band lo <= |u| <= hi on which the density component vanishes.
struct Zone {
  double lo = 0.0;
  double hi = 0.0;
};

/// Symmetric finite measure on [-pi, pi): density
///   fgn_scale * p_FGN(u) + flat_level + custom(u), set to zero on zones,
/// plus a finite list of atoms. Immutable once built; builders return copies.
class SpectralMeasure {
 public:
  SpectralMeasure() = default;

  static SpectralMeasure fgn(double H, int truncation = kDefaultTruncation) {
    SpectralMeasure m;
    m.hurst_ = HurstParams(H);
    m.fgn_scale_ = 1.0;
    m.truncation_ = truncation;
    std::ostringstream os;
    os << "fgn(H=" << H << ")";
    m.label_ = os.str();
    return m;
  }

  /// i.i.d. N(0, variance): flat density variance / (2 pi).
  static SpectralMeasure white_noise(double variance = 1.0) {
    if (!(variance > 0.0)) throw DomainError("white noise variance must be positive");
    SpectralMeasure m;
    m.flat_level_ = variance / detail::kTwoPi;
    m.label_ = "white-noise";
    return m;
  }

  static SpectralMeasure atomic(std::vector<Atom> atoms, std::string label = "atomic") {
    SpectralMeasure m;
    m.label_ = std::move(label);
    m.atoms_ = normalize_atoms(std::move(atoms));
    m.validate();
    return m;
  }

  /// Arbitrary symmetric density; not serializable.
  static SpectralMeasure custom(std::function<double(double)> density, std::string label = "custom") {
    SpectralMeasure m;
    m.custom_ = std::make_shared<const std::function<double(double)>>(std::move(density));
    m.label_ = std::move(label);
    return m;
  }

  SpectralMeasure with_flat(double level) const {
    if (!(level >= 0.0)) throw DomainError("added flat density must be nonnegative");
    SpectralMeasure m = *this;
    m.flat_level_ += level;
    return m;
  }

  SpectralMeasure with_atoms(const std::vector<Atom>& extra) const {
    SpectralMeasure m = *this;
    std::vector<Atom> all = atoms_;
    all.insert(all.end(), extra.begin(), extra.end());
    m.atoms_ = normalize_atoms(std::move(all));
    m.validate();
    return m;
  }

  SpectralMeasure with_zones(const std::vector<Zone>& extra) const {
    SpectralMeasure m = *this;
    m.zones_.insert(m.zones_.end(), extra.begin(), extra.end());
    std::sort(m.zones_.begin(), m.zones_.end(), [](const Zone& a, const Zone& b) { return a.lo < b.lo; });
    m.validate();
    return m;
  }

  SpectralMeasure with_fgn_scale(double scale) const {
    if (!hurst_) throw DomainError("measure has no FGN component to scale");
    SpectralMeasure m = *this;
    m.fgn_scale_ = scale;
    return m;
  }

  SpectralMeasure with_label(std::string label) const {
    SpectralMeasure m = *this;
    m.label_ = std::move(label);
    return m;
  }

  SpectralMeasure with_ell(SlowlyVaryingFn ell) const {
    SpectralMeasure m = *this;
    m.ell_ = std::move(ell);
    return m;
  }

  /// Same measure with the atoms removed.
  SpectralMeasure without_atoms() const {
    SpectralMeasure m = *this;
    m.atoms_.clear();
    return m;
  }

  /// The atomic part alone.
  SpectralMeasure atoms_only() const {
    SpectralMeasure m;
    m.label_ = label_ + " [atoms]";
    m.atoms_ = atoms_;
    m.ell_ = ell_;
    return m;
  }

  /// Restriction to frequencies lo <= |u| <= hi. The edge flags decide
  /// whether atoms sitting exactly on lo or hi are kept.
  SpectralMeasure restricted(double lo, double hi, bool keep_lo_atoms = true, bool keep_hi_atoms = true) const {
    SpectralMeasure m = *this;
    std::vector<Zone> cut;
    if (lo > 0.0) cut.push_back({0.0, lo});
    if (hi < detail::kPi) cut.push_back({hi, detail::kPi});
    std::vector<Zone> all = zones_;
    all.insert(all.end(), cut.begin(), cut.end());
    m.zones_ = merge_zones(std::move(all));
    std::vector<Atom> kept;
    for (const Atom& a : atoms_) {
      const double x = std::abs(a.u);
      if ((x > lo || (x == lo && keep_lo_atoms)) && (x < hi || (x == hi && keep_hi_atoms))) kept.push_back(a);
    }
    m.atoms_ = std::move(kept);
    return m;
  }

  double density(double u) const {
    const double x = std::abs(u);
    for (const Zone& z : zones_)
      if (x >= z.lo && x <= z.hi) return 0.0;
    double v = flat_level_;
    if (hurst_ && fgn_scale_ != 0.0) v += fgn_scale_ * fgn_spectral_density(*hurst_, u, truncation_);
    if (custom_) v += (*custom_)(u);
    return v;
  }

  bool has_density() const { return flat_level_ > 0.0 || (hurst_ && fgn_scale_ != 0.0) || custom_ != nullptr; }
  bool has_fgn() const { return hurst_.has_value() && fgn_scale_ != 0.0; }
  bool is_purely_atomic() const { return !has_density(); }
  bool is_white_noise() const { return atoms_.empty() && zones_.empty() && !has_fgn() && !custom_ && flat_level_ > 0.0; }
  bool serializable() const { return custom_ == nullptr; }

  const std::string& label() const { return label_; }
  const std::optional<HurstParams>& hurst() const { return hurst_; }
  double fgn_scale() const { return fgn_scale_; }
  double flat_level() const { return flat_level_; }
  int truncation() const { return truncation_; }
  const std::vector<Zone>& zones() const { return zones_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const SlowlyVaryingFn& ell() const { return ell_; }
  const std::function<double(double)>* custom_density() const { return custom_.get(); }

  double atom_mass() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.w;
    return s;
  }

  /// Integral of the density over [-pi, pi).
  double density_mass() const {
    double s = 0.0;
    double zone_len = 0.0;
    for (const Zone& z : zones_) zone_len += z.hi - z.lo;
    s += flat_level_ * 2.0 * (detail::kPi - zone_len);
    if (has_fgn()) {
      double zone_mass = 0.0;
      for (const Zone& z : zones_) zone_mass += fgn_interval_mass(*hurst_, z.lo, z.hi, truncation_);
      s += fgn_scale_ * (1.0 - 2.0 * zone_mass);
    }
    if (custom_) {
      std::vector<double> breaks{0.0};
      for (const Zone& z : zones_) {
        breaks.push_back(z.lo);
        breaks.push_back(z.hi);
      }
      breaks.push_back(detail::kPi);
      for (std::size_t i = 0; i + 1 < breaks.size(); i += 2) {
        if (breaks[i + 1] > breaks[i])
          s += 2.0 * detail::integrate(*custom_, breaks[i], breaks[i + 1], 1e-10).value;
      }
    }
    return s;
  }

  double total_mass() const { return density_mass() + atom_mass(); }

  /// Checks symmetry, positivity and zone layout. Throws DomainError.
  void validate() const {
    using detail::kPi;
    for (const Atom& a : atoms_) {
      if (!(a.u >= -kPi && a.u < kPi)) {
        std::ostringstream os;
        os << "atom frequency " << a.u << " outside [-pi, pi)";
        throw DomainError(os.str());
      }
      if (!(a.w > 0.0) || !std::isfinite(a.w)) {
        std::ostringstream os;
        os << "atom weight must be positive and finite, got " << a.w << " at u=" << a.u;
        throw DomainError(os.str());
      }
      if (a.u == 0.0 || a.u == -kPi) continue;
      const bool mirrored = std::any_of(atoms_.begin(), atoms_.end(), [&](const Atom& b) {
        return std::abs(b.u + a.u) <= 1e-12 && std::abs(b.w - a.w) <= 1e-9 * a.w;
      });
      if (!mirrored) {
        std::ostringstream os;
        os << "asymmetric measure: atom at u=" << a.u << " has no mirror of equal weight";
        throw DomainError(os.str());
      }
    }
    if (flat_level_ < 0.0) throw DomainError("flat density level must be nonnegative");
    double prev = -1.0;
    for (const Zone& z : zones_) {
      if (!(z.lo >= 0.0 && z.lo < z.hi && z.hi <= kPi + 1e-15)) {
        std::ostringstream os;
        os << "invalid zone [" << z.lo << ", " << z.hi << "]";
        throw DomainError(os.str());
      }
      if (z.lo < prev) throw DomainError("zones overlap");
      prev = z.hi;
    }
  }

 private:
  static std::vector<Atom> normalize_atoms(std::vector<Atom> atoms) {
    for (Atom& a : atoms)
      if (a.u == detail::kPi) a.u = -detail::kPi;  // same point of the circle
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.u < b.u; });
    std::vector<Atom> merged;
    for (const Atom& a : atoms) {
      if (!merged.empty() && merged.back().u == a.u)
        merged.back().w += a.w;
      else
        merged.push_back(a);
    }
    return merged;
  }

  static std::vector<Zone> merge_zones(std::vector<Zone> zones) {
    std::sort(zones.begin(), zones.end(), [](const Zone& a, const Zone& b) { return a.lo < b.lo; });
    std::vector<Zone> out;
    for (const Zone& z : zones) {
      if (!out.empty() && z.lo <= out.back().hi)
        out.back().hi = std::max(out.back().hi, z.hi);
      else
        out.push_back(z);
    }
    return out;
  }

  std::string label_ = "empty";
  std::optional<HurstParams> hurst_;
  double fgn_scale_ = 0.0;
  double flat_level_ = 0.0;
  int truncation_ = kDefaultTruncation;
  std::vector<Zone> zones_;
  std::vector<Atom> atoms_;
  SlowlyVaryingFn ell_;
  std::shared_ptr<const std::function<double(double)>> custom_;
};

// ---------------------------------------------------------------------------
// Adjoint slowly varying function and the scaling function d
// ---------------------------------------------------------------------------

struct AdjointOptions {
  double r_min = 2.0;
  double damping = 0.5;
  int max_iterations = 200;
  double tolerance = 1e-10;
};

struct AdjointResult {
  double L = 1.0;
  double residual = 0.0;  // |L * l~(r L) - 1|
  int iterations = 0;
};

/// Solves L * l~(r L) = 1 by the damped fixed point L <- (1-d) L + d / l~(r L).
inline AdjointResult adjoint_slowly_varying(const SlowlyVaryingFn& ell, double H, double r,
                                            const AdjointOptions& opt = {}) {
  if (!(r >= opt.r_min)) {
    std::ostringstream os;
    os << "adjoint_slowly_varying: r=" << r << " below r_min=" << opt.r_min;
    throw DomainError(os.str());
  }
  if (ell.family() == SlowlyVaryingFn::Family::one) return {1.0, 0.0, 0};
  double L = 1.0;
  double residual = std::abs(L * ell.tilde(r * L, H) - 1.0);
  int it = 0;
  while (residual > opt.tolerance && it < opt.max_iterations) {
    const double lt = ell.tilde(r * L, H);
    if (!(lt > 0.0) || !std::isfinite(lt)) break;
    L = (1.0 - opt.damping) * L + opt.damping / lt;
    ++it;
    residual = std::abs(L * ell.tilde(r * L, H) - 1.0);
    if (!std::isfinite(residual)) break;
  }
  if (!(residual <= opt.tolerance)) {
    std::ostringstream os;
    os << "adjoint iteration diverged: residual " << residual << " after " << it << " iterations";
    throw NumericalError(os.str());
  }
  return {L, residual, it};
}

/// d(r) = (r L)^{1/H}.
inline double scaling_d(double H, double L_value, double r) {
  if (!(r > 0.0)) throw DomainError("scaling_d: r must be positive");
  return std::pow(r * L_value, 1.0 / H);
}

// ---------------------------------------------------------------------------
// Perturbations of the FGN spectral measure
// ---------------------------------------------------------------------------

struct PerturbationLevel {
  double M = 2.0;
  int q = 4;
  std::size_t N = 16;
};

/// Finite prefix of the zone construction: level j discretizes nu_H on
/// 1/(M_j d_j) <= |u| <= M_j / d_j with d_j = f_{N_j}^{1/H}.
struct PerturbationSchedule {
  double H = 0.5;
  std::vector<PerturbationLevel> levels;
  Boundary boundary = Boundary::power(1.0, 0.25);

  /// f_N = N^{H beta}, beta in (0,1).
  static PerturbationSchedule with_power_boundary(double H, std::vector<PerturbationLevel> levels,
                                                  double beta = 0.5) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("boundary exponent beta must lie in (0,1)");
    PerturbationSchedule s;
    s.H = H;
    s.levels = std::move(levels);
    s.boundary = Boundary::power(1.0, H * beta);
    return s;
  }

  double d(std::size_t j) const { return std::pow(boundary(levels.at(j).N), 1.0 / H); }

  Zone zone(std::size_t j) const {
    const auto& lv = levels.at(j);
    return {1.0 / (lv.M * d(j)), lv.M / d(j)};
  }

  /// t_{j,k}, 0 <= k <= q_j.
  double node(std::size_t j, int k) const {
    const auto& lv = levels.at(j);
    return 1.0 / (lv.M * d(j)) + (static_cast<double>(k) / lv.q) * (lv.M - 1.0 / lv.M) / d(j);
  }

  void validate() const {
    HurstParams hp(H);
    (void)hp;
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const auto& lv = levels[j];
      if (!(lv.M > 1.0) || lv.q < 1 || lv.N < 1) {
        throw DomainError("invalid perturbation schedule (Mq): need M > 1, q >= 1, N >= 1 at every level");
      }
      if (zone(j).hi > detail::kPi) throw DomainError("invalid perturbation schedule: zone exceeds pi");
      if (j == 0) continue;
      const auto& prev = levels[j - 1];
      if (!(lv.M > prev.M)) throw DomainError("invalid perturbation schedule (Mq): M_j must increase strictly");
      if (lv.q < prev.q) throw DomainError("invalid perturbation schedule (Mq): q_j must not decrease");
      if (!(lv.M * lv.M / lv.q < prev.M * prev.M / prev.q))
        throw DomainError("invalid perturbation schedule (Mq): M_j^2/q_j must decrease");
      if (!(lv.N > prev.N)) throw DomainError("invalid perturbation schedule (nonover): N_j must increase");
      if (!(d(j) > lv.M * prev.M * d(j - 1))) {
        std::ostringstream os;
        os << "invalid perturbation schedule (nonover): zones " << j - 1 << " and " << j << " overlap";
        throw DomainError(os.str());
      }
    }
  }
};

/// nu_H with each schedule zone replaced by q_j atom pairs at +-t_{j,k}
/// carrying the nu_H mass of [t_{j,k}, t_{j,k+1}].
inline SpectralMeasure perturbed_measure(const PerturbationSchedule& schedule, int truncation = kDefaultTruncation) {
  schedule.validate();
  SpectralMeasure base = SpectralMeasure::fgn(schedule.H, truncation);
  if (schedule.levels.empty()) return base;
  HurstParams hp(schedule.H);
  std::vector<Zone> zones;
  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < schedule.levels.size(); ++j) {
    zones.push_back(schedule.zone(j));
    for (int k = 0; k < schedule.levels[j].q; ++k) {
      const double t0 = schedule.node(j, k), t1 = schedule.node(j, k + 1);
      const double w = fgn_interval_mass(hp, t0, t1, truncation);
      atoms.push_back({t0, w});
      atoms.push_back({-t0, w});
    }
  }
  std::ostringstream os;
  os << "perturbed-fgn(H=" << schedule.H << ", levels=" << schedule.levels.size() << ")";
  return base.with_zones(zones).with_atoms(atoms).with_label(os.str());
}

/// g~[h, pi] / ((m_H / 2H) h^{-2H}) where g~(du) = G(du) / |e^{iu} - 1|^2.
/// An atom at -pi counts as sitting at the right end point.
inline double tail_mass_ratio(const SpectralMeasure& measure, double H, double h) {
  using detail::kPi;
  if (!(h > 0.0 && h < kPi)) throw DomainError("tail_mass_ratio: need 0 < h < pi");
  const HurstParams hp(H);
  const double reference = hp.m_H / (2.0 * H) * std::pow(h, -2.0 * H);
  auto transfer = [](double u) {
    const double s = std::sin(0.5 * u);
    return 4.0 * s * s;
  };
  double mass = 0.0;
  if (measure.has_density()) {
    // u = e^v over [ln h, ln pi]; breakpoints at zone edges.
    std::vector<double> breaks{std::log(h)};
    for (const Zone& z : measure.zones()) {
      if (z.lo > h && z.lo < kPi) breaks.push_back(std::log(z.lo));
      if (z.hi > h && z.hi < kPi) breaks.push_back(std::log(z.hi));
    }
    breaks.push_back(std::log(kPi));
    std::sort(breaks.begin(), breaks.end());
    auto integrand = [&](double v) {
      const double u = std::exp(v);
      if (u >= kPi) return 0.0;
      return measure.density(u) / transfer(u) * u;
    };
    mass += detail::integrate_pieces(integrand, breaks, 1e-10 * reference).value;
  }
  for (const Atom& a : measure.atoms()) {
    const double x = a.u == -kPi ? kPi : a.u;
    if (x >= h) mass += a.w / transfer(x);
  }
  return mass / reference;
}

}  // namespace smalldev
