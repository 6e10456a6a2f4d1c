#pragma once

#include "molldeconv/reconstruct.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace molldeconv {

/// Relative perturbation statistics of g -> R g under injected noise, norms being plain L^2
/// sums over omega. With several realizations c1 and c2 are means and kappa = c2 / c1.
struct StabilityReport {
  double c1 = 0.0;
  double c2 = 0.0;
  double kappa = 0.0;
  std::string norm = "l2-masked";
  std::uint64_t seed = 0;
  Index realizations = 0;
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  std::vector<double> kappas;
};

/// One noise realization worked out in full.
struct KappaSample {
  double c1;
  double c2;
  double kappa;
  SampledField clean;      // R g
  SampledField perturbed;  // R (g + delta)
};

/// Fixed data g and perturbation delta for repeated kappa evaluations (calibration loops).
/// Both spectra are computed once.
class KappaProbe {
 public:
  KappaProbe(const Reconstructor& reconstructor, const SampledField& g, const SampledField& delta,
             const RegionMask& omega);

  KappaSample evaluate(double alpha, const BetaField& beta) const;
  double kappa(double alpha, const BetaField& beta) const { return evaluate(alpha, beta).kappa; }
  const RegionMask& omega() const { return omega_; }
  const Reconstructor& reconstructor() const { return reconstructor_; }
  const SampledField& data() const { return g_; }

 private:
  Reconstructor reconstructor_;
  SampledField g_;
  SpectralField g_hat_;
  SpectralField perturbed_hat_;
  bool real_;
  RegionMask omega_;
  double c1_;
};

/// Masked L^2 norm of field values over omega.
double masked_norm(const ComplexArray& values, const RegionMask& omega);

/// Noise realization r uses gaussian_noise(grid, noise_sigma, substream(seed, r)).
StabilityReport estimate_kappa(const SampledField& g, const ReconstructionParams& params, double noise_sigma,
                               std::uint64_t seed, Index realizations, const RegionMask& omega);
StabilityReport estimate_kappa(const Reconstructor& reconstructor, const SampledField& g, double alpha,
                               const BetaField& beta, double noise_sigma, std::uint64_t seed, Index realizations,
                               const RegionMask& omega);
/// Single realization with a caller-supplied delta.
KappaSample estimate_kappa_with_noise(const SampledField& g, const SampledField& delta,
                                      const ReconstructionParams& params, const RegionMask& omega);

struct NormEstimate {
  double estimate = 0.0;
  Index iterations = 0;
  double tolerance = 0.0;
  double last_change = 0.0;
  bool converged = false;
};

/// Largest singular value of v -> M R M v on the nodes of omega (M = restriction to omega), by
/// thick-restart Lanczos on its normal operator (a Krylov-accelerated power iteration). Converged
/// once the residual of the leading Ritz pair is at most tol times its Ritz value; iterations
/// counts applications of the normal operator. The start vector comes from Rng(seed).
NormEstimate operator_norm(const ReconstructionParams& params, const RegionMask& omega, double tol = 1e-10,
                           Index max_iter = 5000, std::uint64_t seed = 1);
NormEstimate operator_norm(const Reconstructor& reconstructor, double alpha, const BetaField& beta,
                           const RegionMask& omega, double tol = 1e-10, Index max_iter = 5000,
                           std::uint64_t seed = 1);

struct ScalingReport {
  std::vector<double> B;
  std::vector<NormEstimate> norms;
  /// Least-squares slope of log(norm) against log(1/B).
  double slope = 0.0;
  /// n + b.
  double bound = 0.0;
  bool within_bound = false;
};

/// Operator norm for constant beta with alpha * beta = B (alpha = 1) along B_values, and the
/// fitted growth exponent. Needs a kernel with bound constants, >= 3 points and >= 2 decades.
ScalingReport stability_scaling_experiment(const KernelSpec& kernel, const MollifierSpec& mollifier,
                                           const RegionMask& omega, const std::vector<double>& B_values,
                                           double slack = 0.3);

/// Geometric bisection of a monotone kappa(t) on [lo, hi] down to |kappa / target - 1| <= tol.
struct KappaMatch {
  double value;
  double kappa;
  Index evaluations;
};
KappaMatch match_kappa(const std::function<double(double)>& kappa_of, double lo, double hi, double target,
                       double tol = 0.02, Index max_steps = 80);

struct CalibrationOptions {
  std::vector<double> beta_in_candidates{0.25, 0.5, 0.8, 1.0, 1.5, 2.0};
  std::pair<double, double> beta_out_range{0.5, 50.0};
  double noise_sigma = 1e-2;
  std::uint64_t seed = 0;
  double tolerance = 0.02;
};

struct CalibrationResult {
  double beta_in;
  double beta_out;
  double kappa;
  /// One line per beta_in candidate tried.
  std::vector<std::string> log;
};

/// Smallest candidate beta_in for which some beta_out in range matches target_kappa. A full roi
/// reduces to matching one constant beta over beta_out_range.
CalibrationResult calibrate_beta(const SampledField& g, const KernelSpec& kernel, const MollifierSpec& mollifier,
                                 double alpha, const RegionMask& roi, double target_kappa,
                                 const CalibrationOptions& options = {});
CalibrationResult calibrate_beta(const KappaProbe& probe, double alpha, const RegionMask& roi, double target_kappa,
                                 const CalibrationOptions& options = {});

}  // namespace molldeconv
