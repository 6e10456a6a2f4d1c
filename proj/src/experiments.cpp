#include "molldeconv/experiments.hpp"

#include "molldeconv/error.hpp"
#include "molldeconv/io.hpp"
#include "molldeconv/random.hpp"
#include "molldeconv/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

namespace molldeconv {

namespace {

constexpr double kPi = std::numbers::pi;

double sup_norm(const ComplexArray& values, const RegionMask& region) {
  return region.membership().select(values.abs(), 0.0).maxCoeff();
}

SampledField masked(const SampledField& field, const RegionMask& region) {
  return {field.grid(), region.membership().select(field.values(), Complex(0.0, 0.0))};
}

std::string level_label(double level) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", level);
  return buffer;
}

Json stability_json(const StabilityReport& s) {
  return {{"kappa", s.kappas.front()}, {"kappa_mean", s.kappa}, {"kappa_min", s.kappa_min},
          {"kappa_max", s.kappa_max},  {"kappas", s.kappas},     {"c1", s.c1},
          {"c2", s.c2},                {"norm", s.norm},         {"realizations", s.realizations}};
}

Json disk_json(const PhantomDisk& d) { return {{"x", d.x}, {"y", d.y}, {"radius", d.radius}}; }

}  // namespace

// ---------------------------------------------------------------------------------------------
// Convergence rates

RateReport convergence_rate_study(const SampledField& f, const KernelSpec& kernel, const MollifierSpec& mollifier,
                                  const BetaField& beta, const std::vector<double>& alphas,
                                  const RateOptions& options) {
  const Grid& grid = f.grid();
  if (alphas.size() < 3) throw InvalidArgument("rate study needs at least 3 alpha values");
  for (double a : alphas)
    if (!(a > 0.0)) throw InvalidArgument("alpha values must be positive");
  const auto [amin, amax] = std::minmax_element(alphas.begin(), alphas.end());
  if (std::log10(*amax / *amin) < 1.5 - 1e-9) throw InvalidArgument("alpha sweep must span at least 1.5 decades");
  if (!kernel.supports(grid.dims())) throw InvalidArgument("kernel " + kernel.name() + " does not fit the grid");
  const RegionMask region = options.error_region.value_or(RegionMask::full(grid));
  if (!(region.grid() == grid) || region.empty()) throw InvalidArgument("rate study error region is invalid");

  RateReport report;
  report.expected = mollifier.d();
  SampledField g = convolve(f, kernel);
  if (options.noise) {
    const SpectralNoiseSpec& noise = *options.noise;
    g = SampledField(grid, g.values() + spectral_noise(grid, noise.E, noise.sigma_exp, noise.seed).values());
    const double b = kernel.bounds() ? kernel.bounds()->b : NAN;
    const double limit = -grid.dims() - b - mollifier.d();
    if (!(noise.sigma_exp < limit)) {
      std::ostringstream msg;
      msg << "noise exponent " << noise.sigma_exp << " is not below -n-b-d = " << limit
          << "; the rate is not guaranteed";
      report.notices.push_back(msg.str());
    }
  }

  const Reconstructor reconstructor(grid, kernel, mollifier);
  const double f_sup = sup_norm(f.values(), region);
  const double f_l2 = masked_norm(f.values(), region) * std::sqrt(grid.cell_volume());
  for (double alpha : alphas) {
    const ComplexArray error = reconstructor.apply(g, alpha, beta).values() - f.values();
    const double sup = sup_norm(error, region);
    const double l2 = masked_norm(error, region) * std::sqrt(grid.cell_volume());
    const bool fitted = sup >= options.floor * f_sup;
    if (!fitted) {
      std::ostringstream msg;
      msg << "alpha " << alpha << ": error " << sup << " is at the numerical floor, left out of the fit";
      report.notices.push_back(msg.str());
    }
    report.points.push_back({alpha, sup, l2, l2 / f_l2, fitted});
  }

  std::vector<double> x;
  std::vector<double> y;
  for (const RatePoint& p : report.points) {
    if (!p.fitted) continue;
    x.push_back(std::log(p.alpha));
    y.push_back(std::log(p.sup_error));
  }
  if (x.size() < 3) throw InvalidArgument("fewer than 3 rate points above the error floor");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Index>(x.size()));
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Index>(y.size()));
  const Eigen::VectorXd xc = xv.array() - xv.mean();
  const Eigen::VectorXd yc = yv.array() - yv.mean();
  report.slope = xc.dot(yc) / xc.squaredNorm();
  report.residual = std::sqrt((yc - report.slope * xc).squaredNorm() / static_cast<double>(x.size()));
  return report;
}

RegionMask away_from_jumps(const SampledField& f, Index band, double jump) {
  const Grid& grid = f.grid();
  const RealArray v = f.real();
  BoolArray near = BoolArray::Constant(grid.size(), false);
  for (int axis = 0; axis < grid.dims(); ++axis) {
    const Index n = grid.samples(axis);
    for (Index k = 0; k < grid.size(); ++k) {
      auto [i0, i1] = grid.unravel(k);
      Index& i = axis == 0 ? i0 : i1;
      if (i + 1 >= n) continue;
      const Index base = i;
      ++i;
      if (std::abs(v[grid.ravel(i0, i1)] - v[k]) <= jump) continue;
      for (Index d = -band; d <= band + 1; ++d) {
        i = std::clamp<Index>(base + d, 0, n - 1);
        near[grid.ravel(i0, i1)] = true;
      }
    }
  }
  return RegionMask::bitmap(grid, !near);
}

ExperimentResult run_rate_study(const RateStudyConfig& config) {
  if (config.dims != 1 && config.dims != 2) throw InvalidArgument("rate study dims must be 1 or 2");
  if (config.samples < 8 || !(config.extent > 0.0)) throw InvalidArgument("rate study grid is invalid");
  const double h = config.extent / static_cast<double>(config.samples);
  const double o = -0.5 * config.extent;
  const Grid grid = config.dims == 1 ? Grid(config.samples, h, o)
                                     : Grid({config.samples, config.samples}, {h, h}, {o, o});
  RealArray bump(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    const double r = norm(grid.node(k));
    bump[k] = std::exp(-kPi * r * r);
  }
  const SampledField f = SampledField::from_real(grid, bump);
  const KernelSpec kernel = parse_kernel(config.kernel, config.dims);
  const MollifierSpec mollifier = parse_mollifier(config.mollifier, config.dims);
  const BetaField beta = constant_beta(grid, config.beta);
  const RateReport rates =
      convergence_rate_study(f, kernel, mollifier, beta, config.alphas, RateOptions{config.noise, std::nullopt});

  Json points = Json::array();
  for (const RatePoint& p : rates.points)
    points.push_back({{"alpha", p.alpha},
                      {"sup_error", p.sup_error},
                      {"l2_error", p.l2_error},
                      {"relative_l2", p.relative_l2},
                      {"fitted", p.fitted}});
  ExperimentResult result;
  result.report = {{"experiment", "rates"},
                   {"config", config},
                   {"kernel", kernel.name()},
                   {"mollifier", mollifier.name()},
                   {"points", points},
                   {"slope", rates.slope},
                   {"expected", rates.expected},
                   {"residual", rates.residual},
                   {"notices", rates.notices}};
  result.fields.push_back({"truth", f});
  return result;
}

// ---------------------------------------------------------------------------------------------
// 1D pulse reconstruction

ExperimentResult run_1d_experiment(const Experiment1DConfig& config) {
  if (config.noise_levels.empty()) throw InvalidArgument("1D experiment needs at least one noise level");
  for (double level : config.noise_levels)
    if (!(level > 0.0)) throw InvalidArgument("noise levels must be positive");
  const Grid grid(config.samples, 1.0 / static_cast<double>(config.samples));
  const SampledField f = pulses_phantom_1d(grid, config.train);
  const KernelSpec kernel = gaussian_kernel_1d(config.kernel_amplitude, config.kernel_width);
  const MollifierSpec mollifier = gaussian_mollifier(1, config.mollifier_scale);
  const Reconstructor reconstructor(grid, kernel, mollifier);
  const SampledField g = convolve(f, kernel);
  const double rms = std::sqrt(g.values().abs2().mean());
  const SampledField unit_noise = gaussian_noise(grid, 1.0, substream(config.seed, "noise"));
  const RegionMask everywhere = RegionMask::full(grid);
  const RegionMask pulses = pulse_train_region(grid, config.train);
  const RegionMask dip_region = pulse_train_region(grid, config.train, config.dip_margin);

  auto probe_for = [&](double level) {
    const SampledField delta(grid, unit_noise.values() * (level * rms));
    return KappaProbe(reconstructor, g, delta, everywhere);
  };
  const KappaProbe calibration = probe_for(config.noise_levels.front());

  Json calibration_json = Json::object();
  double beta_constant = 0.0;
  if (config.beta_constant) {
    beta_constant = *config.beta_constant;
  } else {
    const KappaMatch m = match_kappa(
        [&](double b) { return calibration.kappa(config.alpha_constant, constant_beta(grid, b)); },
        config.beta_search.first, config.beta_search.second, config.kappa_target, config.tolerance);
    beta_constant = m.value;
    calibration_json["beta_constant"] = {{"value", m.value}, {"kappa", m.kappa}, {"evaluations", m.evaluations}};
  }
  const BetaField constant = constant_beta(grid, beta_constant);
  const double kappa_constant = calibration.kappa(config.alpha_constant, constant);

  const BetaField variable = two_region_beta(grid, dip_region, config.dip, config.plateau);
  const KappaMatch alpha_match =
      match_kappa([&](double a) { return calibration.kappa(a, variable); }, config.alpha_search.first,
                  config.alpha_search.second, kappa_constant, config.tolerance);
  calibration_json["alpha_variable"] = {
      {"value", alpha_match.value}, {"kappa", alpha_match.kappa}, {"evaluations", alpha_match.evaluations}};

  ExperimentResult result;
  result.fields.push_back({"truth", f});
  result.fields.push_back({"blurred", g});
  result.fields.push_back({"beta_variable", SampledField::from_real(grid, variable.values())});

  Json runs = Json::array();
  for (double level : config.noise_levels) {
    const KappaProbe probe = probe_for(level);
    const KappaSample c = probe.evaluate(config.alpha_constant, constant);
    const KappaSample v = probe.evaluate(alpha_match.value, variable);
    const std::string label = level_label(level);
    result.fields.push_back({"data_" + label, SampledField(grid, g.values() + unit_noise.values() * (level * rms))});
    result.fields.push_back({"constant_" + label, c.perturbed});
    result.fields.push_back({"variable_" + label, v.perturbed});
    runs.push_back({{"noise_level", level},
                    {"noise_sigma", level * rms},
                    {"constant",
                     {{"alpha", config.alpha_constant},
                      {"beta", beta_constant},
                      {"kappa", c.kappa},
                      {"c1", c.c1},
                      {"c2", c.c2},
                      {"roi_error", region_error(c.perturbed, f, pulses)},
                      {"error", region_error(c.perturbed, f, everywhere)}}},
                    {"variable",
                     {{"alpha", alpha_match.value},
                      {"beta_dip", config.dip},
                      {"beta_plateau", config.plateau},
                      {"kappa", v.kappa},
                      {"c1", v.c1},
                      {"c2", v.c2},
                      {"roi_error", region_error(v.perturbed, f, pulses)},
                      {"error", region_error(v.perturbed, f, everywhere)}}},
                    {"kappa_relative_gap", std::abs(v.kappa - c.kappa) / c.kappa}});
  }

  const auto [start, length] = pulse_train_span(grid, config.train);
  result.report = {{"experiment", "pulses-1d"},
                   {"config", config},
                   {"kernel", kernel.name()},
                   {"mollifier", mollifier.name()},
                   {"pulses", {{"count", pulse_count(grid, config.train)}, {"start", start}, {"length", length}}},
                   {"roi_nodes", pulses.count()},
                   {"dip_nodes", dip_region.count()},
                   {"data_rms", rms},
                   {"calibration", calibration_json},
                   {"runs", runs}};
  return result;
}

// ---------------------------------------------------------------------------------------------
// 2D phantom reconstruction

RegionMask phantom_disk_mask(const Grid& grid, const PhantomDisk& disk) {
  if (grid.dims() != 2 || grid.samples(0) != grid.samples(1))
    throw InvalidArgument("phantom coordinates need a square 2D grid");
  if (!(disk.radius > 0.0)) throw InvalidArgument("roi radius must be positive");
  const Index n = grid.samples(0);
  const double scale = 0.5 * static_cast<double>(n) * grid.spacing(0);
  const Coord center = phantom_to_grid(n, disk.x, disk.y);
  return RegionMask::disk(grid,
                          {grid.origin(0) + center[0] * grid.spacing(0), grid.origin(1) + center[1] * grid.spacing(1)},
                          disk.radius * scale);
}

double region_error(const SampledField& reconstruction, const SampledField& truth, const RegionMask& region) {
  const double base = masked_norm(truth.values(), region);
  if (base == 0.0) throw InvalidArgument("ground truth vanishes on the error region");
  return masked_norm(reconstruction.values() - truth.values(), region) / base;
}

Experiment2DSetup prepare_2d(const Experiment2DConfig& config) {
  if (!(config.noise_sigma > 0.0)) throw InvalidArgument("noise sigma must be positive");
  if (!(config.alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (config.realizations < 1) throw InvalidArgument("at least one noise realization is needed");
  SampledField truth = shepp_logan(config.size, {config.variant, config.blobs});
  const Grid grid = truth.grid();
  const KernelSpec kernel = gaussian_kernel_2d(config.blur_sigma);
  const MollifierSpec mollifier = gaussian_mollifier(2, config.mollifier_scale);
  SampledField blurred = convolve(truth, kernel);
  const std::uint64_t noise_seed = substream(config.seed, "noise");
  SampledField data(grid, blurred.values() + gaussian_noise(grid, config.noise_sigma, substream(noise_seed, 0)).values());
  RegionMask roi = phantom_disk_mask(grid, config.roi);
  return {config,
          std::move(truth),
          std::move(blurred),
          std::move(data),
          Reconstructor(grid, kernel, mollifier),
          noise_seed,
          std::move(roi)};
}

RunSummary run_2d_case(const Experiment2DSetup& setup, const BetaField& beta) {
  const Experiment2DConfig& c = setup.config;
  const RegionMask everywhere = RegionMask::full(setup.truth.grid());
  StabilityReport stability = estimate_kappa(setup.reconstructor, setup.blurred, c.alpha, beta, c.noise_sigma,
                                             setup.noise_seed, c.realizations, everywhere);
  SampledField reconstruction = setup.reconstructor.apply(setup.data, c.alpha, beta);
  const double roi_error = region_error(reconstruction, setup.truth, setup.roi);
  const double error = region_error(reconstruction, setup.truth, everywhere);
  return {beta, std::move(reconstruction), std::move(stability), roi_error, error};
}

namespace {

RegionMask bounding_support(const RegionMask& roi) {
  const Grid& grid = roi.grid();
  if (const Disk* disk = std::get_if<Disk>(&roi.shape())) {
    const double side = std::sqrt(kPi) * disk->radius;
    return RegionMask::rectangle(grid, {disk->center[0] - 0.5 * side, disk->center[1] - 0.5 * side}, {side, side});
  }
  if (const Rect* rect = std::get_if<Rect>(&roi.shape())) return RegionMask::rectangle(grid, rect->corner, rect->extents);
  Coord lo{INFINITY, INFINITY};
  Coord hi{-INFINITY, -INFINITY};
  for (Index k = 0; k < grid.size(); ++k) {
    if (!roi.contains(k)) continue;
    const Coord x = grid.node(k);
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  }
  return RegionMask::rectangle(grid, lo, {hi[0] - lo[0], hi[1] - lo[1]});
}

}  // namespace

BaselineResult small_support_baseline(const Experiment2DSetup& setup, const RegionMask& roi, double kappa_target,
                                      std::pair<double, double> beta_search) {
  const Experiment2DConfig& c = setup.config;
  const Grid& grid = setup.truth.grid();
  if (!(roi.grid() == grid) || roi.empty()) throw InvalidArgument("baseline roi is empty or on another grid");
  const SampledField delta(grid, setup.data.values() - setup.blurred.values());

  if (roi.is_full()) {
    const BetaField beta = constant_beta(grid, c.beta_constant);
    const KappaSample s = KappaProbe(setup.reconstructor, setup.blurred, delta, roi).evaluate(c.alpha, beta);
    return {roi, c.beta_constant, s.kappa, region_error(s.perturbed, setup.truth, roi), s.perturbed};
  }

  const RegionMask support = bounding_support(roi);
  if (support.empty()) throw InvalidArgument("baseline support is empty");
  const KappaProbe probe(setup.reconstructor, masked(setup.blurred, support), masked(delta, support), support);
  const KappaMatch m =
      match_kappa([&](double b) { return probe.kappa(c.alpha, constant_beta(grid, b)); }, beta_search.first,
                  beta_search.second, kappa_target);
  const KappaSample s = probe.evaluate(c.alpha, constant_beta(grid, m.value));
  return {support, m.value, s.kappa, region_error(s.perturbed, setup.truth, roi), s.perturbed};
}

std::vector<RoiSnapshot> roi_scan(const Experiment2DSetup& setup, const std::vector<PhantomDisk>& positions,
                                  double beta_in, double beta_out) {
  const Grid& grid = setup.truth.grid();
  const SampledField delta(grid, setup.data.values() - setup.blurred.values());
  const KappaProbe probe(setup.reconstructor, setup.blurred, delta, RegionMask::full(grid));
  std::vector<RoiSnapshot> out;
  for (const PhantomDisk& position : positions) {
    const BetaField beta = two_region_beta(grid, phantom_disk_mask(grid, position), beta_in, beta_out);
    KappaSample s = probe.evaluate(setup.config.alpha, beta);
    out.push_back({position, s.kappa, std::move(s.perturbed)});
  }
  return out;
}

ExperimentResult run_2d_experiment(const Experiment2DConfig& config) {
  const Experiment2DSetup setup = prepare_2d(config);
  const Grid& grid = setup.truth.grid();
  const RunSummary constant = run_2d_case(setup, constant_beta(grid, config.beta_constant));
  const RunSummary variable =
      run_2d_case(setup, two_region_beta(grid, setup.roi, config.beta_in, config.beta_out));
  const SampledField degenerate = setup.reconstructor.apply(
      setup.data, config.alpha, two_region_beta(grid, setup.roi, config.beta_constant, config.beta_constant));

  const Coord center = phantom_to_grid(config.size, config.roi.x, config.roi.y);
  const double single_gap =
      std::abs(variable.stability.kappas.front() - constant.stability.kappas.front()) / constant.stability.kappas.front();
  const double mean_gap = std::abs(variable.stability.kappa - constant.stability.kappa) / constant.stability.kappa;

  ExperimentResult result;
  result.fields = {{"truth", setup.truth},
                   {"blurred", setup.blurred},
                   {"data", setup.data},
                   {"constant", constant.reconstruction},
                   {"variable", variable.reconstruction},
                   {"beta_variable", SampledField::from_real(grid, variable.beta.values())}};
  result.report = {
      {"experiment", "phantom-2d"},
      {"config", config},
      {"kernel", setup.reconstructor.kernel().name()},
      {"mollifier", setup.reconstructor.mollifier().name()},
      {"roi_pixels", {{"row", center[0]}, {"col", center[1]}, {"radius", config.roi.radius * 0.5 * config.size},
                      {"nodes", setup.roi.count()}}},
      {"constant",
       {{"beta", config.beta_constant}, {"stability", stability_json(constant.stability)},
        {"roi_error", constant.roi_error}, {"error", constant.error}}},
      {"variable",
       {{"beta_in", config.beta_in}, {"beta_out", config.beta_out}, {"stability", stability_json(variable.stability)},
        {"roi_error", variable.roi_error}, {"error", variable.error}}},
      {"kappa_relative_gap", single_gap},
      {"kappa_mean_relative_gap", mean_gap},
      {"degenerate_max_difference", (degenerate.values() - constant.reconstruction.values()).abs().maxCoeff()}};

  if (!config.scan.empty()) {
    Json scan = Json::array();
    const auto snapshots = roi_scan(setup, config.scan, config.beta_in, config.beta_out);
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
      scan.push_back({{"roi", disk_json(snapshots[i].roi)}, {"kappa", snapshots[i].kappa}});
      result.fields.push_back({"scan_" + std::to_string(i), snapshots[i].reconstruction});
    }
    result.report["roi_scan"] = scan;
  }

  if (config.baseline) {
    const BaselineResult b = small_support_baseline(setup, setup.roi, constant.stability.kappas.front());
    result.fields.push_back({"baseline", b.reconstruction});
    result.report["baseline"] = {
        {"beta", b.beta}, {"kappa", b.kappa}, {"roi_error", b.roi_error}, {"support_nodes", b.support.count()}};
  }
  return result;
}

// ---------------------------------------------------------------------------------------------
// JSON configs

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw InvalidArgument(std::string(what) + ": unknown key '" + item.key() + "'");
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
void read(const Json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T value{};
  read(j, key, value);
  out = value;
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

void from_json(const Json& j, SpectralNoiseSpec& s) {
  check_keys(j, {"E", "sigma_exp", "seed"}, "noise");
  read(j, "E", s.E);
  read(j, "sigma_exp", s.sigma_exp);
  read(j, "seed", s.seed);
}

void to_json(Json& j, const SpectralNoiseSpec& s) { j = {{"E", s.E}, {"sigma_exp", s.sigma_exp}, {"seed", s.seed}}; }

void from_json(const Json& j, PulseTrain& t) {
  check_keys(j, {"width", "gap", "count"}, "train");
  read(j, "width", t.width);
  read(j, "gap", t.gap);
  read(j, "count", t.count);
}

void to_json(Json& j, const PulseTrain& t) { j = {{"width", t.width}, {"gap", t.gap}, {"count", t.count}}; }

void from_json(const Json& j, Blob& b) {
  check_keys(j, {"x", "y", "radius", "intensity"}, "blob");
  read(j, "x", b.center_x);
  read(j, "y", b.center_y);
  read(j, "radius", b.radius);
  read(j, "intensity", b.intensity);
}

void to_json(Json& j, const Blob& b) {
  j = {{"x", b.center_x}, {"y", b.center_y}, {"radius", b.radius}, {"intensity", b.intensity}};
}

void from_json(const Json& j, PhantomDisk& d) {
  check_keys(j, {"x", "y", "radius"}, "roi");
  read(j, "x", d.x);
  read(j, "y", d.y);
  read(j, "radius", d.radius);
}

void to_json(Json& j, const PhantomDisk& d) { j = disk_json(d); }

void from_json(const Json& j, RateStudyConfig& c) {
  check_keys(j, {"dims", "samples", "extent", "kernel", "mollifier", "beta", "alphas", "noise"}, "rates config");
  read(j, "dims", c.dims);
  read(j, "samples", c.samples);
  read(j, "extent", c.extent);
  read(j, "kernel", c.kernel);
  read(j, "mollifier", c.mollifier);
  read(j, "beta", c.beta);
  read(j, "alphas", c.alphas);
  read(j, "noise", c.noise);
}

void to_json(Json& j, const RateStudyConfig& c) {
  j = {{"dims", c.dims},   {"samples", c.samples}, {"extent", c.extent}, {"kernel", c.kernel},
       {"mollifier", c.mollifier}, {"beta", c.beta}, {"alphas", c.alphas}, {"noise", optional_json(c.noise)}};
}

void from_json(const Json& j, Experiment1DConfig& c) {
  check_keys(j,
             {"samples", "train", "kernel_amplitude", "kernel_width", "mollifier_scale", "alpha_constant",
              "beta_constant", "kappa_target", "beta_search", "plateau", "dip", "dip_margin", "alpha_search",
              "noise_levels", "tolerance", "seed"},
             "1D config");
  read(j, "samples", c.samples);
  read(j, "train", c.train);
  read(j, "kernel_amplitude", c.kernel_amplitude);
  read(j, "kernel_width", c.kernel_width);
  read(j, "mollifier_scale", c.mollifier_scale);
  read(j, "alpha_constant", c.alpha_constant);
  read(j, "beta_constant", c.beta_constant);
  read(j, "kappa_target", c.kappa_target);
  read(j, "beta_search", c.beta_search);
  read(j, "plateau", c.plateau);
  read(j, "dip", c.dip);
  read(j, "dip_margin", c.dip_margin);
  read(j, "alpha_search", c.alpha_search);
  read(j, "noise_levels", c.noise_levels);
  read(j, "tolerance", c.tolerance);
  read(j, "seed", c.seed);
}

void to_json(Json& j, const Experiment1DConfig& c) {
  j = {{"samples", c.samples},
       {"train", c.train},
       {"kernel_amplitude", c.kernel_amplitude},
       {"kernel_width", c.kernel_width},
       {"mollifier_scale", c.mollifier_scale},
       {"alpha_constant", c.alpha_constant},
       {"beta_constant", optional_json(c.beta_constant)},
       {"kappa_target", c.kappa_target},
       {"beta_search", c.beta_search},
       {"plateau", c.plateau},
       {"dip", c.dip},
       {"dip_margin", c.dip_margin},
       {"alpha_search", c.alpha_search},
       {"noise_levels", c.noise_levels},
       {"tolerance", c.tolerance},
       {"seed", c.seed}};
}

void from_json(const Json& j, Experiment2DConfig& c) {
  check_keys(j,
             {"size", "blobs", "variant", "blur_sigma", "mollifier_scale", "noise_sigma", "alpha", "beta_constant",
              "beta_in", "beta_out", "roi", "realizations", "baseline", "scan", "seed"},
             "2D config");
  read(j, "size", c.size);
  read(j, "blobs", c.blobs);
  if (j.contains("variant")) {
    const std::string v = j.at("variant").get<std::string>();
    if (v == "modified") c.variant = SheppLoganVariant::Modified;
    else if (v == "original") c.variant = SheppLoganVariant::Original;
    else throw InvalidArgument("variant must be 'modified' or 'original'");
  }
  read(j, "blur_sigma", c.blur_sigma);
  read(j, "mollifier_scale", c.mollifier_scale);
  read(j, "noise_sigma", c.noise_sigma);
  read(j, "alpha", c.alpha);
  read(j, "beta_constant", c.beta_constant);
  read(j, "beta_in", c.beta_in);
  read(j, "beta_out", c.beta_out);
  read(j, "roi", c.roi);
  read(j, "realizations", c.realizations);
  read(j, "baseline", c.baseline);
  read(j, "scan", c.scan);
  read(j, "seed", c.seed);
}

void to_json(Json& j, const Experiment2DConfig& c) {
  j = {{"size", c.size},
       {"blobs", c.blobs},
       {"variant", c.variant == SheppLoganVariant::Modified ? "modified" : "original"},
       {"blur_sigma", c.blur_sigma},
       {"mollifier_scale", c.mollifier_scale},
       {"noise_sigma", c.noise_sigma},
       {"alpha", c.alpha},
       {"beta_constant", c.beta_constant},
       {"beta_in", c.beta_in},
       {"beta_out", c.beta_out},
       {"roi", c.roi},
       {"realizations", c.realizations},
       {"baseline", c.baseline},
       {"scan", c.scan},
       {"seed", c.seed}};
}

}  // namespace molldeconv
