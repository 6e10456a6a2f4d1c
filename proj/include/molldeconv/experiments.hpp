#pragma once

#include "molldeconv/phantoms.hpp"
#include "molldeconv/stability.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace molldeconv {

using Json = nlohmann::json;

/// Named output field of an experiment.
struct NamedField {
  std::string name;
  SampledField field;
};

/// Report plus the fields it refers to. Reports hold no timings, so equal configs give equal reports.
struct ExperimentResult {
  Json report;
  std::vector<NamedField> fields;
};

// ---------------------------------------------------------------------------------------------
// Convergence rates

struct SpectralNoiseSpec {
  double E = 0.0;
  double sigma_exp = -4.5;
  std::uint64_t seed = 0;
};

struct RatePoint {
  double alpha;
  double sup_error;
  double l2_error;
  double relative_l2;
  bool fitted;
};

struct RateReport {
  std::vector<RatePoint> points;
  /// Least-squares slope of log(sup error) against log(alpha) over the fitted points.
  double slope = 0.0;
  /// Certified mollifier exponent d.
  double expected = 0.0;
  /// RMS residual of the log-log fit.
  double residual = 0.0;
  std::vector<std::string> notices;
};

struct RateOptions {
  std::optional<SpectralNoiseSpec> noise;
  /// Errors are measured on this region only (defaults to the whole grid).
  std::optional<RegionMask> error_region;
  /// Points whose sup error falls below floor * sup|f| are reported but left out of the fit.
  double floor = 1e-11;
};

/// g = gamma * f (+ spectral noise), reconstructed at every alpha; sup and L^2 errors against f.
/// Needs >= 3 alphas spanning >= 1.5 decades and >= 3 points above the floor.
RateReport convergence_rate_study(const SampledField& f, const KernelSpec& kernel, const MollifierSpec& mollifier,
                                  const BetaField& beta, const std::vector<double>& alphas,
                                  const RateOptions& options = {});

/// Nodes farther than band samples (along each axis) from a jump of f.
RegionMask away_from_jumps(const SampledField& f, Index band = 2, double jump = 1e-9);

struct RateStudyConfig {
  int dims = 1;
  Index samples = 1024;
  /// Domain is [-extent/2, extent/2)^n; f(x) = exp(-pi |x|^2).
  double extent = 16.0;
  std::string kernel = "sobolev:b=1";
  std::string mollifier = "gaussian";
  double beta = 1.0;
  std::vector<double> alphas{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  std::optional<SpectralNoiseSpec> noise;
};

ExperimentResult run_rate_study(const RateStudyConfig& config);

// ---------------------------------------------------------------------------------------------
// 1D pulse reconstruction

struct Experiment1DConfig {
  Index samples = 1024;
  PulseTrain train{.count = 5};
  double kernel_amplitude = 0.1;
  double kernel_width = 0.05;
  double mollifier_scale = 1.0;
  double alpha_constant = 1e-3;
  /// Constant beta; calibrated to kappa_target when absent.
  std::optional<double> beta_constant;
  double kappa_target = 7.6;
  std::pair<double, double> beta_search{1e-3, 1.0};
  double plateau = 1.0;
  double dip = 0.01;
  /// The dip covers the pulse train widened by this margin on both sides.
  double dip_margin = 1.0 / 64.0;
  std::pair<double, double> alpha_search{1e-4, 1.0};
  /// Noise standard deviations relative to rms(g).
  std::vector<double> noise_levels{1e-4, 5e-2};
  double tolerance = 0.02;
  std::uint64_t seed = 0;
};

ExperimentResult run_1d_experiment(const Experiment1DConfig& config);

// ---------------------------------------------------------------------------------------------
// 2D phantom reconstruction

/// Disk in normalized phantom coordinates (x right, y up, [-1, 1]^2).
struct PhantomDisk {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
};

struct Experiment2DConfig {
  Index size = 301;
  std::vector<Blob> blobs{{-0.08, 0.30, 0.035}, {0.08, 0.30, 0.035}};
  SheppLoganVariant variant = SheppLoganVariant::Modified;
  /// Blur standard deviation in pixels.
  double blur_sigma = 7.0;
  double mollifier_scale = 6.283185307179586;
  double noise_sigma = 1e-2;
  double alpha = 1.0;
  double beta_constant = 2.5;
  double beta_in = 0.8;
  double beta_out = 6.4;
  PhantomDisk roi{0.0, 0.30, 0.20};
  Index realizations = 32;
  bool baseline = true;
  /// Roi positions of the two-region scan (beta_in, beta_out); one snapshot each.
  std::vector<PhantomDisk> scan{{0.0, 0.30, 0.20}, {0.0, -0.55, 0.20}, {-0.45, 0.0, 0.20}, {0.45, 0.0, 0.20},
                                {-0.85, 0.85, 0.10}};
  std::uint64_t seed = 0;
};

/// Everything shared by the runs of one 2D configuration.
struct Experiment2DSetup {
  Experiment2DConfig config;
  SampledField truth;
  SampledField blurred;
  /// Blurred data plus noise realization 0.
  SampledField data;
  Reconstructor reconstructor;
  std::uint64_t noise_seed;
  RegionMask roi;
};

Experiment2DSetup prepare_2d(const Experiment2DConfig& config);
RegionMask phantom_disk_mask(const Grid& grid, const PhantomDisk& disk);

/// Relative L^2 error of a reconstruction over a region.
double region_error(const SampledField& reconstruction, const SampledField& truth, const RegionMask& region);

struct RunSummary {
  BetaField beta;
  SampledField reconstruction;
  StabilityReport stability;
  double roi_error;
  double error;
};

RunSummary run_2d_case(const Experiment2DSetup& setup, const BetaField& beta);

struct BaselineResult {
  RegionMask support;
  double beta;
  double kappa;
  double roi_error;
  SampledField reconstruction;
};

/// Data and noise restricted to the equal-area square of a disk roi (the bounding rectangle of
/// other shapes), reconstructed with the constant beta that matches kappa_target on that support.
/// A full roi means no restriction: the global constant-beta run.
BaselineResult small_support_baseline(const Experiment2DSetup& setup, const RegionMask& roi, double kappa_target,
                                      std::pair<double, double> beta_search = {0.1, 100.0});

struct RoiSnapshot {
  PhantomDisk roi;
  double kappa;
  SampledField reconstruction;
};

/// Two-region reconstruction and kappa (realization 0) for each roi position.
std::vector<RoiSnapshot> roi_scan(const Experiment2DSetup& setup, const std::vector<PhantomDisk>& positions,
                                  double beta_in, double beta_out);

ExperimentResult run_2d_experiment(const Experiment2DConfig& config);

// ---------------------------------------------------------------------------------------------
// JSON configs. Unknown keys are rejected; missing keys keep their defaults.

void from_json(const Json& j, SpectralNoiseSpec& noise);
void to_json(Json& j, const SpectralNoiseSpec& noise);
void from_json(const Json& j, PulseTrain& train);
void to_json(Json& j, const PulseTrain& train);
void from_json(const Json& j, Blob& blob);
void to_json(Json& j, const Blob& blob);
void from_json(const Json& j, PhantomDisk& disk);
void to_json(Json& j, const PhantomDisk& disk);
void from_json(const Json& j, RateStudyConfig& config);
void to_json(Json& j, const RateStudyConfig& config);
void from_json(const Json& j, Experiment1DConfig& config);
void to_json(Json& j, const Experiment1DConfig& config);
void from_json(const Json& j, Experiment2DConfig& config);
void to_json(Json& j, const Experiment2DConfig& config);

}  // namespace molldeconv
