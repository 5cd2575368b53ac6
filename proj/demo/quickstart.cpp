// Tour of the library: build a measure, compute covariances, estimate a
// band probability three ways, and compare with the analytic bounds.

#include <iomanip>
#include <iostream>

#include "smalldev/smalldev.hpp"

using namespace smalldev;

int main() {
  std::cout << std::setprecision(6);

  // Fractional Gaussian noise with H = 0.7 and its first autocovariances.
  const SpectralMeasure fgn = SpectralMeasure::fgn(0.7);
  const std::size_t N = 32;
  const auto model = CovarianceModel::from_measure(fgn, N);
  std::cout << "r(0..3):";
  for (std::size_t k = 0; k < 4; ++k) std::cout << ' ' << model.r(k);
  std::cout << "\nVar S_32 = " << partial_sum_variances(model, N)[N] << " (32^1.4 = " << std::pow(32.0, 1.4) << ")\n";

  // P{max |S_n| <= f} by QMC and by counting Monte Carlo.
  const double f = 2.0;
  QmcOptions opt;
  opt.seed = 42;
  const auto qmc = band_probability_qmc(model, N, f, opt);
  const auto mc = band_probability_mc(fgn, N, f, 200000, 42);
  std::cout << "QMC ln p = " << qmc.log_p << " +- " << qmc.log_err << '\n';
  std::cout << "MC  ln p = " << mc.log_p << " +- " << mc.log_err << '\n';
  std::cout << "bounds: [" << regularized_lower_bound_best(model, N, f).value << ", "
            << volumetric_upper_bound(model, N, f) << "]\n";

  // i.i.d. steps: the transfer operator gives the exact rate for a constant band.
  const TransferRate t = transfer_rate(1.0);
  std::cout << "i.i.d., f=1: c = ln lambda_1 = " << t.c << '\n';

  // A purely atomic measure goes through the finite-rank reduction.
  const auto atoms = dirac_measure(DiracCase::delta_half_pi);
  const auto a = band_probability(atoms, 256, 0.1);
  std::cout << "atoms at +-pi/2, N=256, f=0.1: ln p = " << a.log_p << " +- " << a.log_err << '\n';

  // A few sample paths through the circulant embedding.
  const PathBatch paths = sample_paths(fgn, 8, 3, 7);
  for (std::size_t i = 0; i < paths.count; ++i) {
    std::cout << "path " << i << ':';
    for (std::size_t n = 1; n <= paths.N; ++n) std::cout << ' ' << std::setw(9) << paths.S(i, n);
    std::cout << '\n';
  }
  return 0;
}
