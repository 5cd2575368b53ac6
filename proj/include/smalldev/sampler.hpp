#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "smalldev/covariance.hpp"
#include "smalldev/detail/log.hpp"
#include "smalldev/detail/numeric.hpp"
#include "smalldev/error.hpp"
#include "smalldev/parallel.hpp"
#include "smalldev/rng.hpp"
#include "smalldev/spectral.hpp"

namespace smalldev {

enum class GeneratorKind { circulant, cholesky, atoms, mixed };

inline const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::circulant:
      return "circulant";
    case GeneratorKind::cholesky:
      return "cholesky";
    case GeneratorKind::atoms:
      return "atoms";
    case GeneratorKind::mixed:
      return "mixed";
  }
  return "?";
}

/// count partial-sum paths S_1..S_N stored row by row.
struct PathBatch {
  std::size_t count = 0;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  GeneratorKind generator = GeneratorKind::circulant;
  std::vector<double> data;

  const double* path(std::size_t i) const { return data.data() + i * N; }
  /// S_n of path i, 1 <= n <= N.
  double S(std::size_t i, std::size_t n) const { return data[i * N + n - 1]; }
};

// ---------------------------------------------------------------------------
// Atomic representation
// ---------------------------------------------------------------------------

/// N x d matrix A with S_n = (A z)_n, z standard normal in R^d, for a purely
/// atomic measure. A pair of atoms at +-t with weight w each contributes
///   sqrt(2w) sum_{j<=n} cos(jt)  and  sqrt(2w) sum_{j<=n} sin(jt),
/// an atom at 0 contributes n sqrt(w), and an atom at -pi contributes
/// sqrt(w) sum_{j<=n} (-1)^j.
inline Eigen::MatrixXd atom_design(const SpectralMeasure& measure, std::size_t N) {
  std::vector<Eigen::VectorXd> cols;
  const auto n = static_cast<Eigen::Index>(N);
  for (const Atom& a : measure.atoms()) {
    if (a.u == 0.0) {
      Eigen::VectorXd c(n);
      for (Eigen::Index i = 0; i < n; ++i) c(i) = static_cast<double>(i + 1) * std::sqrt(a.w);
      cols.push_back(c);
    } else if (a.u == -detail::kPi) {
      Eigen::VectorXd c(n);
      for (Eigen::Index i = 0; i < n; ++i) c(i) = ((i + 1) % 2 == 1) ? -std::sqrt(a.w) : 0.0;
      cols.push_back(c);
    } else if (a.u > 0.0) {
      const double t = a.u, s = std::sqrt(2.0 * a.w), half = std::sin(0.5 * t);
      Eigen::VectorXd c(n), d(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double m = static_cast<double>(i + 1);
        const double amp = std::sin(0.5 * m * t) / half;
        c(i) = s * amp * std::cos(0.5 * (m + 1.0) * t);
        d(i) = s * amp * std::sin(0.5 * (m + 1.0) * t);
      }
      cols.push_back(c);
      cols.push_back(d);
    }
  }
  Eigen::MatrixXd A(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) A.col(static_cast<Eigen::Index>(j)) = cols[j];
  return A;
}

// ---------------------------------------------------------------------------
// Path generators
// ---------------------------------------------------------------------------

/// Precomputed factorization from which individual paths are produced as a
/// pure function of (seed, path index).
class PathGenerator {
 public:
  /// Circulant embedding of size m = 2^k >= 2N; needs r(0..m/2).
  static PathGenerator circulant(const CovarianceModel& model, std::size_t N, std::uint64_t seed) {
    PathGenerator g(GeneratorKind::circulant, N, seed);
    std::size_t m = 1;
    while (m < 2 * N) m <<= 1;
    model.require(m / 2 + 1);
    std::vector<std::complex<double>> c(m), lam;
    for (std::size_t j = 0; j <= m / 2; ++j) c[j] = model.r(j);
    for (std::size_t j = m / 2 + 1; j < m; ++j) c[j] = model.r(m - j);
    Eigen::FFT<double> fft;
    fft.fwd(lam, c);
    g.sqrt_eig_.resize(m);
    const double floor = -1e-8 * model.r(0);
    double worst = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double v = lam[j].real();
      if (v < floor) {
        std::ostringstream os;
        os << "embedding failed, use cholesky: circulant eigenvalue " << v << " at index " << j;
        throw NumericalError(os.str());
      }
      if (v < 0.0) {
        worst = std::min(worst, v);
        v = 0.0;
      }
      g.sqrt_eig_[j] = std::sqrt(v / static_cast<double>(m));
    }
    if (worst < 0.0) {
      std::ostringstream os;
      os << "circulant embedding: clipped negative eigenvalues down to " << worst;
      detail::warn(os.str());
    }
    return g;
  }

  /// Pivoted LDL^T of the Toeplitz matrix; pivots down to -1e-10 r(0) are
  /// treated as zero, so rank-deficient covariances are allowed.
  static PathGenerator cholesky(const CovarianceModel& model, std::size_t N, std::uint64_t seed) {
    if (N > 4096) throw DomainError("cholesky sampler limited to N <= 4096");
    PathGenerator g(GeneratorKind::cholesky, N, seed);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(model.toeplitz(N));
    if (ldlt.info() != Eigen::Success) throw NumericalError("singular covariance (Kolmogorov criterion may fail)");
    Eigen::VectorXd D = ldlt.vectorD();
    for (Eigen::Index i = 0; i < D.size(); ++i) {
      if (D(i) < -1e-10 * model.r(0))
        throw NumericalError("singular covariance (Kolmogorov criterion may fail): negative pivot");
      D(i) = std::sqrt(std::max(0.0, D(i)));
    }
    const auto n = static_cast<Eigen::Index>(N);
    Eigen::MatrixXd L = Eigen::MatrixXd(ldlt.matrixL());
    Eigen::MatrixXd F = L * D.asDiagonal();
    // Undo the pivoting: K = P^T L D L^T P.
    Eigen::MatrixXd Fp = ldlt.transpositionsP().transpose() * F;
    // Partial sums are S = T xi with T lower-triangular ones.
    g.factor_.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += Fp(i, j);
        g.factor_(i, j) = acc;
      }
    }
    return g;
  }

  static PathGenerator atoms(const SpectralMeasure& measure, std::size_t N, std::uint64_t seed) {
    if (measure.has_density()) throw DomainError("atom sampler requires purely atomic measure");
    PathGenerator g(GeneratorKind::atoms, N, seed);
    g.factor_ = atom_design(measure, N);
    return g;
  }

  GeneratorKind kind() const { return kind_; }
  std::size_t N() const { return N_; }

  /// Writes paths first..first+count-1 (each N doubles) to out.
  void fill(std::size_t first, std::size_t count, double* out) const {
    switch (kind_) {
      case GeneratorKind::circulant:
        fill_circulant(first, count, out);
        return;
      case GeneratorKind::cholesky:
        fill_linear(streams::kCholesky, first, count, out);
        return;
      case GeneratorKind::atoms:
        fill_linear(streams::kAtoms, first, count, out);
        return;
      case GeneratorKind::mixed:
        break;
    }
    throw DomainError("mixed generators are composed by sample_paths");
  }

 private:
  PathGenerator(GeneratorKind kind, std::size_t N, std::uint64_t seed) : kind_(kind), N_(N), seed_(seed) {}

  void fill_circulant(std::size_t first, std::size_t count, double* out) const {
    const std::size_t m = sqrt_eig_.size();
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> w(m), y;
    std::size_t i = first;
    const std::size_t end = first + count;
    while (i < end) {
      const std::size_t pair = i / 2;
      CounterRng rng(seed_, streams::kCirculant, pair);
      for (std::size_t j = 0; j < m; ++j) {
        const double re = rng.normal(), im = rng.normal();
        w[j] = sqrt_eig_[j] * std::complex<double>(re, im);
      }
      fft.fwd(y, w);
      for (int part = static_cast<int>(i % 2); part < 2 && i < end; ++part, ++i) {
        double* row = out + (i - first) * N_;
        double acc = 0.0;
        for (std::size_t n = 0; n < N_; ++n) {
          acc += part == 0 ? y[n].real() : y[n].imag();
          row[n] = acc;
        }
      }
    }
  }

  void fill_linear(std::uint32_t stream, std::size_t first, std::size_t count, double* out) const {
    const Eigen::Index d = factor_.cols();
    Eigen::VectorXd z(d);
    for (std::size_t i = 0; i < count; ++i) {
      CounterRng rng(seed_, stream, first + i);
      for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
      Eigen::Map<Eigen::VectorXd> row(out + i * N_, static_cast<Eigen::Index>(N_));
      row.noalias() = factor_ * z;
    }
  }

  GeneratorKind kind_;
  std::size_t N_;
  std::uint64_t seed_;
  std::vector<double> sqrt_eig_;
  Eigen::MatrixXd factor_;
};

namespace detail {

inline PathBatch run_generator(const PathGenerator& gen, std::size_t count, std::uint64_t seed) {
  PathBatch batch;
  batch.count = count;
  batch.N = gen.N();
  batch.seed = seed;
  batch.generator = gen.kind();
  batch.data.assign(count * gen.N(), 0.0);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    gen.fill(first, std::min(kChunk, count - first), batch.data.data() + first * gen.N());
  });
  return batch;
}

}  // namespace detail

inline PathBatch sample_circulant(const CovarianceModel& model, std::size_t N, std::size_t count, std::uint64_t seed) {
  return detail::run_generator(PathGenerator::circulant(model, N, seed), count, seed);
}

inline PathBatch sample_cholesky(const CovarianceModel& model, std::size_t N, std::size_t count, std::uint64_t seed) {
  return detail::run_generator(PathGenerator::cholesky(model, N, seed), count, seed);
}

inline PathBatch sample_atoms(const SpectralMeasure& measure, std::size_t N, std::size_t count, std::uint64_t seed) {
  return detail::run_generator(PathGenerator::atoms(measure, N, seed), count, seed);
}

/// Samplers able to produce paths of an arbitrary measure: the density part
/// by circulant embedding (Cholesky when the embedding fails) and the atoms
/// on their own stream, added together.
class MeasureSampler {
 public:
  MeasureSampler(const SpectralMeasure& measure, std::size_t N, std::uint64_t seed) : N_(N) {
    if (measure.has_density()) {
      const SpectralMeasure dens = measure.without_atoms();
      std::size_t m = 1;
      while (m < 2 * N) m <<= 1;
      const auto model = CovarianceModel::from_measure(dens, m / 2);
      try {
        parts_.push_back(PathGenerator::circulant(model, N, seed));
      } catch (const NumericalError&) {
        parts_.push_back(PathGenerator::cholesky(model, N, seed));
      }
    }
    if (!measure.atoms().empty()) parts_.push_back(PathGenerator::atoms(measure.atoms_only(), N, seed));
    if (parts_.empty()) throw DomainError("measure has no mass");
  }

  GeneratorKind kind() const { return parts_.size() > 1 ? GeneratorKind::mixed : parts_.front().kind(); }
  std::size_t N() const { return N_; }

  void fill(std::size_t first, std::size_t count, double* out) const {
    parts_.front().fill(first, count, out);
    if (parts_.size() == 1) return;
    std::vector<double> extra(count * N_);
    for (std::size_t p = 1; p < parts_.size(); ++p) {
      parts_[p].fill(first, count, extra.data());
      for (std::size_t i = 0; i < extra.size(); ++i) out[i] += extra[i];
    }
  }

 private:
  std::size_t N_;
  std::vector<PathGenerator> parts_;
};

inline PathBatch sample_paths(const SpectralMeasure& measure, std::size_t N, std::size_t count, std::uint64_t seed) {
  const MeasureSampler sampler(measure, N, seed);
  PathBatch batch;
  batch.count = count;
  batch.N = N;
  batch.seed = seed;
  batch.generator = sampler.kind();
  batch.data.assign(count * N, 0.0);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    sampler.fill(first, std::min(kChunk, count - first), batch.data.data() + first * N);
  });
  return batch;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

namespace detail {
inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}
inline void put_f64(std::ostream& os, double x) {
  std::uint64_t v;
  std::memcpy(&v, &x, 8);
  put_u64(os, v);
}
inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw DomainError("truncated SDLB1 stream");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
}  // namespace detail

/// Binary batch: "SDLB1", rows and cols as little-endian u64, then the
/// paths as little-endian f64, row after row.
inline void write_sdlb1(std::ostream& os, const PathBatch& b) {
  os.write("SDLB1", 5);
  detail::put_u64(os, b.count);
  detail::put_u64(os, b.N);
  for (double x : b.data) detail::put_f64(os, x);
}

inline PathBatch read_sdlb1(std::istream& is) {
  char magic[5];
  if (!is.read(magic, 5) || std::string(magic, 5) != "SDLB1") throw DomainError("not an SDLB1 stream");
  PathBatch b;
  b.count = detail::get_u64(is);
  b.N = detail::get_u64(is);
  b.data.resize(b.count * b.N);
  for (double& x : b.data) {
    const std::uint64_t v = detail::get_u64(is);
    std::memcpy(&x, &v, 8);
  }
  return b;
}

inline void write_paths_csv(std::ostream& os, const PathBatch& b) {
  os << "path";
  for (std::size_t n = 1; n <= b.N; ++n) os << ",S" << n;
  os << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < b.count; ++i) {
    os << i;
    for (std::size_t n = 1; n <= b.N; ++n) os << "," << b.S(i, n);
    os << "\n";
  }
}

}  // namespace smalldev
