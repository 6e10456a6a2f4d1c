#include "cli.hpp"

#include "molldeconv/error.hpp"
#include "molldeconv/experiments.hpp"
#include "molldeconv/io.hpp"
#include "molldeconv/random.hpp"
#include "molldeconv/service.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <sstream>

namespace molldeconv::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line flags that override entries of the parameter JSON, addressed by JSON pointer.
class Overrides {
 public:
  explicit Overrides(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& flag, const std::string& pointer, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* option = app_->add_option(flag, *value, help);
    apply_.push_back([option, value, pointer](Json& params) {
      if (option->count() > 0) params[Json::json_pointer(pointer)] = *value;
    });
    return option;
  }

  void apply(Json& params) const {
    for (const auto& f : apply_) f(params);
  }

 private:
  CLI::App* app_;
  std::vector<std::function<void(Json&)>> apply_;
};

/// Defaults, then the config file, then flags given on the command line.
Json resolve(Json params, const std::string& config_path, const Overrides& overrides) {
  if (!config_path.empty()) {
    const Json file = read_json(config_path);
    if (!file.is_object()) throw InvalidArgument(config_path + ": config must be a JSON object");
    for (const auto& item : file.items()) {
      if (!params.contains(item.key())) throw InvalidArgument(config_path + ": unknown key '" + item.key() + "'");
      params[item.key()] = item.value();
    }
  }
  overrides.apply(params);
  return params;
}

/// Canonical form of a typed config: parsed strictly, serialized with every key.
template <class Config>
Json resolve_typed(const std::string& config_path, const Overrides& overrides) {
  Json params = Json(Config{});
  if (!config_path.empty()) {
    const Json file = read_json(config_path);
    Config from_file = params.get<Config>();
    from_json(file, from_file);
    params = Json(from_file);
  }
  overrides.apply(params);
  return Json(params.get<Config>());
}

template <class T>
T get(const Json& params, const char* key) {
  try {
    return params.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("parameter '") + key + "': " + e.what());
  }
}

std::string required_path(const Json& params, const char* key) {
  const std::string path = get<std::string>(params, key);
  if (path.empty()) throw UsageError(std::string("--") + key + " is required");
  return path;
}

Json grid_json(const Grid& g) {
  Json samples = Json::array();
  Json spacing = Json::array();
  Json origin = Json::array();
  for (int a = 0; a < g.dims(); ++a) {
    samples.push_back(g.samples(a));
    spacing.push_back(g.spacing(a));
    origin.push_back(g.origin(a));
  }
  return {{"dims", g.dims()}, {"samples", samples}, {"spacing", spacing}, {"origin", origin}};
}

Json stability_json(const StabilityReport& s) {
  return {{"kappa", s.kappa}, {"c1", s.c1},         {"c2", s.c2},         {"kappas", s.kappas},
          {"norm", s.norm},   {"seed", s.seed},     {"realizations", s.realizations},
          {"kappa_min", s.kappa_min}, {"kappa_max", s.kappa_max}};
}

Json norm_json(const NormEstimate& n) {
  return {{"estimate", n.estimate}, {"iterations", n.iterations}, {"tolerance", n.tolerance},
          {"last_change", n.last_change}, {"converged", n.converged}};
}

/// beta from "beta", or a two-region field when "roi" is set.
BetaField beta_from(const Json& params, const Grid& grid) {
  const double beta = get<double>(params, "beta");
  if (params.at("roi").is_null()) return constant_beta(grid, beta);
  const RegionMask roi = parse_roi(get<std::string>(params, "roi"), grid);
  if (params.at("beta_in").is_null()) throw UsageError("--roi needs --beta-in");
  const double beta_out = params.at("beta_out").is_null() ? beta : get<double>(params, "beta_out");
  return two_region_beta(grid, roi, get<double>(params, "beta_in"), beta_out);
}

/// Output directory, written files and timings of one run.
class Run {
 public:
  Run(std::string command, const std::string& out, Json params)
      : command_(std::move(command)), dir_(out), params_(std::move(params)), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
  }

  const Json& params() const { return params_; }

  void field(const std::string& name, const SampledField& f) {
    if (f.grid().dims() == 1 && f.is_real()) {
      write_text_1d(dir_ / (name + ".txt"), f);
      outputs_.push_back(name + ".txt");
      return;
    }
    write_raw(dir_ / (name + ".f64"), f);
    outputs_.push_back(name + ".f64");
    if (f.grid().dims() == 2) {
      write_png16(dir_ / (name + ".png"), f);
      outputs_.push_back(name + ".png");
    }
  }

  void text(const std::string& name, const std::string& content) {
    std::ofstream(dir_ / name) << content;
    outputs_.push_back(name);
  }

  /// Writes report.json (no timings, so equal inputs give equal bytes) and manifest.json.
  int finish(Json result, Json summary, std::map<std::string, std::uint64_t> seeds, std::ostream& out) {
    Json report = {{"command", command_}, {"params", params_}, {"config_hash", config_hash(params_)}};
    for (const auto& item : result.items()) report[item.key()] = item.value();
    write_json(dir_ / "report.json", report);
    outputs_.push_back("report.json");

    RunManifest manifest;
    manifest.command = command_;
    manifest.config_hash = config_hash(params_);
    manifest.seeds = std::move(seeds);
    manifest.outputs = outputs_;
    manifest.summary = std::move(summary);
    manifest.timings_ms["total"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    write_json(dir_ / "manifest.json", to_json(manifest));

    out << manifest.summary.dump(2) << "\n" << "wrote " << outputs_.size() + 1 << " files to " << dir_.string() << "\n";
    return 0;
  }

 private:
  std::string command_;
  fs::path dir_;
  Json params_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

struct Common {
  std::string config;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& common, Overrides& overrides, const std::string& seed_pointer = "/seed") {
  cmd->add_option("--config", common.config, "JSON config file");
  cmd->add_option("--out", common.out, "Output directory")->capture_default_str();
  overrides.add<std::uint64_t>("--seed", seed_pointer, "Run seed");
}

// ---------------------------------------------------------------------------------------------
// Commands

int phantom(const Json& params, const std::string& out, std::ostream& os) {
  Run run("phantom", out, params);
  const std::string kind = get<std::string>(params, "kind");
  SampledField f = [&] {
    if (kind == "shepp-logan") {
      SheppLoganOptions options;
      const std::string variant = get<std::string>(params, "variant");
      if (variant == "original") options.variant = SheppLoganVariant::Original;
      else if (variant != "modified") throw InvalidArgument("variant must be 'modified' or 'original'");
      options.blobs = get<std::vector<Blob>>(params, "blobs");
      return shepp_logan(get<Index>(params, "size"), options);
    }
    if (kind == "pulses") {
      const Index n = get<Index>(params, "samples");
      if (n < 2) throw InvalidArgument("samples must be at least 2");
      return pulses_phantom_1d(Grid(n, 1.0 / static_cast<double>(n)), get<PulseTrain>(params, "train"));
    }
    throw InvalidArgument("kind must be 'shepp-logan' or 'pulses'");
  }();
  run.field("truth", f);
  const RealArray v = f.real();
  const Json summary = {{"grid", grid_json(f.grid())}, {"min", v.minCoeff()}, {"max", v.maxCoeff()}};
  return run.finish(summary, summary, {}, os);
}

int blur(const Json& params, const std::string& out, std::ostream& os) {
  Run run("blur", out, params);
  const SampledField f = read_field(required_path(params, "input"));
  const KernelSpec kernel = parse_kernel(get<std::string>(params, "kernel"), f.grid().dims());
  const SampledField g = convolve(f, kernel);
  run.field("blurred", g);
  const double sigma = get<double>(params, "noise_sigma");
  if (sigma < 0.0) throw InvalidArgument("noise sigma must be non-negative");
  const std::uint64_t seed = get<std::uint64_t>(params, "seed");
  const std::uint64_t noise_seed = substream(seed, "noise");
  Json summary = {{"grid", grid_json(f.grid())},
                  {"kernel", kernel.name()},
                  {"blurred_rms", std::sqrt(g.values().abs2().mean())}};
  if (sigma > 0.0) {
    run.field("data", add_noise(g, sigma, substream(noise_seed, std::uint64_t{0})));
    summary["noise_sigma"] = sigma;
  }
  return run.finish(summary, summary, {{"seed", seed}, {"noise", noise_seed}}, os);
}

int deconvolve(const Json& params, const std::string& out, std::ostream& os) {
  Run run("deconvolve", out, params);
  const SampledField g = read_field(required_path(params, "input"));
  const Grid& grid = g.grid();
  const ReconstructionParams rp{get<double>(params, "alpha"), beta_from(params, grid),
                                parse_kernel(get<std::string>(params, "kernel"), grid.dims()),
                                parse_mollifier(get<std::string>(params, "mollifier"), grid.dims())};
  const SampledField rec = reconstruct_fast(g, rp);
  run.field("reconstruction", rec);
  const std::uint64_t seed = get<std::uint64_t>(params, "seed");
  Json summary = {{"grid", grid_json(grid)},
                  {"kernel", rp.kernel.name()},
                  {"mollifier", rp.mollifier.name()},
                  {"levels", rp.beta.level_count()},
                  {"max_abs", rec.values().abs().maxCoeff()}};
  if (!params.at("noise_sigma").is_null()) {
    summary["stability"] = stability_json(estimate_kappa(g, rp, get<double>(params, "noise_sigma"),
                                                         substream(seed, "noise"), get<Index>(params, "realizations"),
                                                         RegionMask::full(grid)));
  }
  return run.finish(summary, summary, {{"seed", seed}, {"noise", substream(seed, "noise")}}, os);
}

int rates(Json params, const std::string& out, std::ostream& os) {
  const RateStudyConfig config = params.get<RateStudyConfig>();
  Run run("rates", out, params);
  const ExperimentResult result = run_rate_study(config);
  std::ostringstream table;
  table << std::setprecision(17) << "# alpha sup_error l2_error relative_l2 fitted\n";
  for (const Json& p : result.report["points"])
    table << p["alpha"].get<double>() << ' ' << p["sup_error"].get<double>() << ' ' << p["l2_error"].get<double>()
          << ' ' << p["relative_l2"].get<double>() << ' ' << (p["fitted"].get<bool>() ? 1 : 0) << '\n';
  run.text("rates.txt", table.str());
  const Json summary = {{"slope", result.report["slope"]},
                        {"expected", result.report["expected"]},
                        {"residual", result.report["residual"]},
                        {"notices", result.report["notices"]}};
  std::map<std::string, std::uint64_t> seeds;
  if (config.noise) seeds["noise"] = config.noise->seed;
  return run.finish(result.report, summary, seeds, os);
}

int stability(const Json& params, const std::string& out, std::ostream& os) {
  const std::string mode = get<std::string>(params, "mode");
  Run run("stability --mode " + mode, out, params);
  const std::uint64_t seed = get<std::uint64_t>(params, "seed");
  const auto kernel_spec = [&](const char* fallback) {
    return params.at("kernel").is_null() ? std::string(fallback) : get<std::string>(params, "kernel");
  };
  const std::string mollifier_spec = get<std::string>(params, "mollifier");

  if (mode == "scaling") {
    const Index n = get<Index>(params, "samples");
    const double h = get<double>(params, "spacing");
    const Grid grid(n, h, -0.5 * static_cast<double>(n) * h);
    const KernelSpec kernel = parse_kernel(kernel_spec("sobolev:b=1"), 1);
    const ScalingReport r = stability_scaling_experiment(kernel, parse_mollifier(mollifier_spec, 1),
                                                         RegionMask::full(grid), get<std::vector<double>>(params, "B"),
                                                         get<double>(params, "slack"));
    Json norms = Json::array();
    for (const NormEstimate& e : r.norms) norms.push_back(norm_json(e));
    const Json summary = {{"kernel", kernel.name()}, {"B", r.B},         {"norms", norms},
                          {"slope", r.slope},        {"bound", r.bound}, {"within_bound", r.within_bound}};
    return run.finish(summary, summary, {}, os);
  }

  const SampledField g = read_field(required_path(params, "input"));
  const Grid& grid = g.grid();
  const ReconstructionParams rp{get<double>(params, "alpha"), beta_from(params, grid),
                                parse_kernel(kernel_spec("gaussian"), grid.dims()),
                                parse_mollifier(mollifier_spec, grid.dims())};
  if (mode == "kappa") {
    const Json summary = {{"stability", stability_json(estimate_kappa(g, rp, get<double>(params, "noise_sigma"),
                                                                      substream(seed, "noise"),
                                                                      get<Index>(params, "realizations"),
                                                                      RegionMask::full(grid)))}};
    return run.finish(summary, summary, {{"seed", seed}, {"noise", substream(seed, "noise")}}, os);
  }
  if (mode == "norm") {
    const NormEstimate e = operator_norm(rp, RegionMask::full(grid), get<double>(params, "tolerance"),
                                         get<Index>(params, "max_iter"), substream(seed, "norm"));
    const Json summary = {{"norm", norm_json(e)}};
    return run.finish(summary, summary, {{"seed", seed}, {"norm", substream(seed, "norm")}}, os);
  }
  throw UsageError("--mode must be kappa, norm or scaling");
}

int calibrate(const Json& params, const std::string& out, std::ostream& os) {
  Run run("calibrate", out, params);
  const SampledField data = read_field(required_path(params, "input"));
  const Grid& grid = data.grid();
  const SampledField g = params.at("clean").is_null() ? data : read_field(get<std::string>(params, "clean"));
  if (!(g.grid() == grid)) throw InvalidArgument("--clean lives on another grid than --input");
  if (params.at("roi").is_null()) throw UsageError("--roi is required");
  const RegionMask roi = parse_roi(get<std::string>(params, "roi"), grid);
  const double alpha = get<double>(params, "alpha");
  const std::uint64_t seed = get<std::uint64_t>(params, "seed");

  CalibrationOptions options;
  options.noise_sigma = get<double>(params, "noise_sigma");
  options.seed = substream(seed, "noise");
  options.tolerance = get<double>(params, "tolerance");
  const auto range = get<std::vector<double>>(params, "beta_out_range");
  if (range.size() != 2) throw InvalidArgument("beta_out_range needs two values");
  options.beta_out_range = {range[0], range[1]};
  if (!params.at("beta_in").is_null()) options.beta_in_candidates = {get<double>(params, "beta_in")};

  const Reconstructor reconstructor(grid, parse_kernel(get<std::string>(params, "kernel"), grid.dims()),
                                    parse_mollifier(get<std::string>(params, "mollifier"), grid.dims()));
  const SampledField delta =
      gaussian_noise(grid, options.noise_sigma, substream(options.seed, std::uint64_t{0}));
  const KappaProbe probe(reconstructor, g, delta, RegionMask::full(grid));
  const double target = params.at("kappa_target").is_null()
                            ? probe.kappa(alpha, constant_beta(grid, get<double>(params, "beta")))
                            : get<double>(params, "kappa_target");
  const CalibrationResult r = calibrate_beta(probe, alpha, roi, target, options);
  const BetaField beta = roi.is_full() ? constant_beta(grid, r.beta_out)
                                       : two_region_beta(grid, roi, r.beta_in, r.beta_out);
  run.field("reconstruction", reconstructor.apply(data, alpha, beta));
  const Json summary = {{"beta_in", r.beta_in},       {"beta_out", r.beta_out}, {"kappa_achieved", r.kappa},
                        {"kappa_target", target},     {"log", r.log}};
  return run.finish(summary, summary, {{"seed", seed}, {"noise", options.seed}}, os);
}

int reproduce_1d(const Json& params, const std::string& out, std::ostream& os) {
  const Experiment1DConfig config = params.get<Experiment1DConfig>();
  Run run("reproduce --paper-1d", out, params);
  const ExperimentResult result = run_1d_experiment(config);
  for (const NamedField& f : result.fields) run.field(f.name, f.field);
  Json summary = Json::array();
  for (const Json& r : result.report["runs"])
    summary.push_back({{"noise_level", r["noise_level"]},
                       {"kappa_constant", r["constant"]["kappa"]},
                       {"kappa_variable", r["variable"]["kappa"]},
                       {"roi_error_constant", r["constant"]["roi_error"]},
                       {"roi_error_variable", r["variable"]["roi_error"]}});
  return run.finish(result.report, {{"runs", summary}},
                    {{"seed", config.seed}, {"noise", substream(config.seed, "noise")}}, os);
}

int reproduce_2d(const Json& params, const std::string& out, std::ostream& os) {
  const Experiment2DConfig config = params.get<Experiment2DConfig>();
  Run run("reproduce --paper-2d", out, params);
  const ExperimentResult result = run_2d_experiment(config);
  for (const NamedField& f : result.fields) run.field(f.name, f.field);
  const Json& r = result.report;
  Json summary = {{"kappa_constant", r["constant"]["stability"]["kappa"]},
                  {"kappa_variable", r["variable"]["stability"]["kappa"]},
                  {"kappa_mean_constant", r["constant"]["stability"]["kappa_mean"]},
                  {"kappa_mean_variable", r["variable"]["stability"]["kappa_mean"]},
                  {"roi_error_constant", r["constant"]["roi_error"]},
                  {"roi_error_variable", r["variable"]["roi_error"]}};
  if (r.contains("baseline")) summary["roi_error_baseline"] = r["baseline"]["roi_error"];
  return run.finish(r, summary, {{"seed", config.seed}, {"noise", substream(config.seed, "noise")}}, os);
}

}  // namespace

int exit_code(const std::exception& e) {
  if (dynamic_cast<const NumericalContractError*>(&e)) return 2;
  return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable-resolution deconvolution with mollifiers", "molldeconv"};
  app.require_subcommand(1);
  std::function<int()> action;

  // phantom
  Common phantom_common;
  CLI::App* phantom_cmd = app.add_subcommand("phantom", "Write a ground-truth phantom");
  Overrides phantom_flags(phantom_cmd);
  add_common(phantom_cmd, phantom_common, phantom_flags);
  phantom_flags.add<std::string>("--kind", "/kind", "shepp-logan or pulses");
  phantom_flags.add<Index>("--size", "/size", "Shepp-Logan side length");
  phantom_flags.add<Index>("--samples", "/samples", "Pulse-train samples");
  phantom_cmd->callback([&] {
    const Json defaults = {{"kind", "shepp-logan"}, {"size", 301},      {"variant", "modified"}, {"blobs", Json::array()},
                           {"samples", 1024},       {"train", PulseTrain{}}, {"seed", 0}};
    action = [&, defaults] { return phantom(resolve(defaults, phantom_common.config, phantom_flags), phantom_common.out, out); };
  });

  // blur
  Common blur_common;
  CLI::App* blur_cmd = app.add_subcommand("blur", "Convolve a field with a kernel and add noise");
  Overrides blur_flags(blur_cmd);
  add_common(blur_cmd, blur_common, blur_flags);
  blur_flags.add<std::string>("--input", "/input", "Field file (.txt 1D or .f64)");
  blur_flags.add<std::string>("--kernel", "/kernel", "Kernel spec");
  blur_flags.add<double>("--noise-sigma", "/noise_sigma", "Noise standard deviation (0 for none)");
  blur_cmd->callback([&] {
    const Json defaults = {{"input", ""}, {"kernel", "gaussian"}, {"noise_sigma", 0.0}, {"seed", 0}};
    action = [&, defaults] { return blur(resolve(defaults, blur_common.config, blur_flags), blur_common.out, out); };
  });

  // Flags shared by deconvolve, stability and calibrate.
  const auto reconstruction_flags = [](Overrides& o) {
    o.add<std::string>("--input", "/input", "Data file (.txt 1D or .f64)");
    o.add<std::string>("--kernel", "/kernel", "Kernel spec");
    o.add<std::string>("--mollifier", "/mollifier", "Mollifier spec");
    o.add<double>("--alpha", "/alpha", "Regularization parameter");
    o.add<std::string>("--roi", "/roi", "disk:cx,cy,r or rect:x,y,w,h in grid coordinates");
    o.add<double>("--beta-in", "/beta_in", "Beta inside the roi");
    o.add<double>("--noise-sigma", "/noise_sigma", "Probe noise standard deviation");
  };

  // deconvolve
  Common deconvolve_common;
  CLI::App* deconvolve_cmd = app.add_subcommand("deconvolve", "Reconstruct from data with a resolution map");
  Overrides deconvolve_flags(deconvolve_cmd);
  add_common(deconvolve_cmd, deconvolve_common, deconvolve_flags);
  reconstruction_flags(deconvolve_flags);
  deconvolve_flags.add<double>("--beta", "/beta", "Constant beta, or beta outside the roi");
  deconvolve_flags.add<double>("--beta-out", "/beta_out", "Beta outside the roi");
  deconvolve_flags.add<Index>("--realizations", "/realizations", "Noise realizations for kappa");
  deconvolve_cmd->callback([&] {
    const Json defaults = {{"input", ""},         {"kernel", "gaussian"}, {"mollifier", "gaussian"},
                           {"alpha", 1.0},        {"beta", 1.0},          {"roi", nullptr},
                           {"beta_in", nullptr},  {"beta_out", nullptr},  {"noise_sigma", nullptr},
                           {"realizations", 1},   {"seed", 0}};
    action = [&, defaults] {
      return deconvolve(resolve(defaults, deconvolve_common.config, deconvolve_flags), deconvolve_common.out, out);
    };
  });

  // rates
  Common rates_common;
  CLI::App* rates_cmd = app.add_subcommand("rates", "Convergence-rate study on a Gaussian bump");
  Overrides rates_flags(rates_cmd);
  add_common(rates_cmd, rates_common, rates_flags, "/noise/seed");
  rates_flags.add<int>("--dims", "/dims", "1 or 2");
  rates_flags.add<Index>("--samples", "/samples", "Samples per axis");
  rates_flags.add<std::string>("--kernel", "/kernel", "Kernel spec");
  rates_flags.add<std::string>("--mollifier", "/mollifier", "Mollifier spec");
  rates_flags.add<double>("--beta", "/beta", "Constant beta");
  rates_flags.add<std::vector<double>>("--alphas", "/alphas", "Alpha sweep");
  rates_flags.add<double>("--noise-e", "/noise/E", "Spectral noise amplitude");
  rates_flags.add<double>("--noise-exp", "/noise/sigma_exp", "Spectral noise exponent");
  rates_cmd->callback([&] {
    action = [&] {
      Json params = resolve_typed<RateStudyConfig>(rates_common.config, rates_flags);
      return rates(params, rates_common.out, out);
    };
  });

  // stability
  Common stability_common;
  CLI::App* stability_cmd = app.add_subcommand("stability", "Kappa, operator norm or norm scaling");
  Overrides stability_flags(stability_cmd);
  add_common(stability_cmd, stability_common, stability_flags);
  stability_flags.add<std::string>("--mode", "/mode", "kappa, norm or scaling");
  reconstruction_flags(stability_flags);
  stability_flags.add<double>("--beta", "/beta", "Constant beta, or beta outside the roi");
  stability_flags.add<double>("--beta-out", "/beta_out", "Beta outside the roi");
  stability_flags.add<Index>("--realizations", "/realizations", "Noise realizations");
  stability_flags.add<Index>("--samples", "/samples", "Grid samples for scaling");
  stability_flags.add<std::vector<double>>("--B", "/B", "alpha * beta values for scaling");
  stability_cmd->callback([&] {
    const Json defaults = {{"mode", "kappa"},        {"input", ""},          {"kernel", nullptr},
                           {"mollifier", "gaussian"}, {"alpha", 1.0},         {"beta", 1.0},
                           {"roi", nullptr},          {"beta_in", nullptr},   {"beta_out", nullptr},
                           {"noise_sigma", 1e-2},     {"realizations", 1},    {"tolerance", 1e-10},
                           {"max_iter", 5000},        {"samples", 1024},      {"spacing", 1.0 / 64.0},
                           {"B", {1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01}},    {"slack", 0.3},
                           {"seed", 0}};
    action = [&, defaults] {
      return stability(resolve(defaults, stability_common.config, stability_flags), stability_common.out, out);
    };
  });

  // calibrate
  Common calibrate_common;
  CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "Find beta_in, beta_out that meet a kappa budget");
  Overrides calibrate_flags(calibrate_cmd);
  add_common(calibrate_cmd, calibrate_common, calibrate_flags);
  reconstruction_flags(calibrate_flags);
  calibrate_flags.add<std::string>("--clean", "/clean", "Noise-free data for the kappa probe");
  calibrate_flags.add<double>("--beta", "/beta", "Constant beta whose kappa is the default target");
  calibrate_flags.add<double>("--kappa-target", "/kappa_target", "Stability budget");
  calibrate_cmd->callback([&] {
    const Json defaults = {{"input", ""},           {"clean", nullptr},      {"kernel", "gaussian"},
                           {"mollifier", "gaussian"}, {"alpha", 1.0},        {"roi", nullptr},
                           {"beta", 1.0},           {"beta_in", nullptr},    {"beta_out_range", {0.5, 50.0}},
                           {"kappa_target", nullptr}, {"noise_sigma", 1e-2}, {"tolerance", 0.02},
                           {"seed", 0}};
    action = [&, defaults] {
      return calibrate(resolve(defaults, calibrate_common.config, calibrate_flags), calibrate_common.out, out);
    };
  });

  // reproduce
  Common reproduce_common;
  bool one_d = false;
  bool two_d = false;
  CLI::App* reproduce_cmd = app.add_subcommand("reproduce", "Run a reference experiment end to end");
  Overrides reproduce_flags(reproduce_cmd);
  add_common(reproduce_cmd, reproduce_common, reproduce_flags);
  reproduce_cmd->add_flag("--paper-1d", one_d, "1D pulse train, constant vs single-dip beta");
  reproduce_cmd->add_flag("--paper-2d", two_d, "2D phantom, constant vs two-region beta");
  reproduce_flags.add<Index>("--size", "/size", "2D phantom side length");
  reproduce_flags.add<double>("--alpha", "/alpha", "2D alpha");
  reproduce_flags.add<double>("--beta", "/beta_constant", "Constant beta");
  reproduce_flags.add<double>("--beta-in", "/beta_in", "2D beta inside the roi");
  reproduce_flags.add<double>("--beta-out", "/beta_out", "2D beta outside the roi");
  reproduce_flags.add<double>("--noise-sigma", "/noise_sigma", "2D noise standard deviation");
  reproduce_flags.add<Index>("--realizations", "/realizations", "2D kappa realizations");
  reproduce_flags.add<double>("--kappa-target", "/kappa_target", "1D stability budget");
  reproduce_cmd->callback([&] {
    if (one_d == two_d) throw CLI::ValidationError("reproduce", "give exactly one of --paper-1d, --paper-2d");
    action = [&] {
      if (one_d) return reproduce_1d(resolve_typed<Experiment1DConfig>(reproduce_common.config, reproduce_flags),
                                     reproduce_common.out, out);
      return reproduce_2d(resolve_typed<Experiment2DConfig>(reproduce_common.config, reproduce_flags),
                          reproduce_common.out, out);
    };
  });

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Start the HTTP API");
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Port")->capture_default_str();
  serve_cmd->callback([&] {
    action = [&] {
      Service service;
      out << "serving on http://" << host << ":" << port << std::endl;
      if (!service.serve(host, port)) throw UsageError("cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  }
}

}  // namespace molldeconv::cli
