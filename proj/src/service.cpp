#include "molldeconv/service.hpp"

#include "molldeconv/error.hpp"
#include "molldeconv/io.hpp"
#include "molldeconv/random.hpp"
#include "molldeconv/transform.hpp"

#include <httplib.h>

#include <chrono>
#include <mutex>
#include <sstream>

namespace molldeconv {

namespace {

struct HttpError : std::runtime_error {
  HttpError(int status, const std::string& message) : std::runtime_error(message), status(status) {}
  int status;
};

HttpError bad_request(const std::string& message) { return {400, message}; }

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw bad_request("request body must be a JSON object");
  if (!j.contains(key)) throw bad_request(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number()) throw bad_request(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

std::uint64_t seed_or(const Json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_unsigned()) throw bad_request(std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

bool flag_or(const Json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw bad_request(std::string("field '") + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::string text(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) throw bad_request(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_array()) throw bad_request(std::string("field '") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const Json& x : v) {
    if (!x.is_number()) throw bad_request(std::string("field '") + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

RegionMask region_of(const Json& j, const Grid& grid) {
  return make_roi(text(j, "shape"), numbers(j, "params"), grid);
}

HttpResponse json_response(int status, const Json& body) { return {status, body.dump()}; }

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}, {"status", status}});
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

Json image_json(const SampledField& field) {
  const RealArray v = field.real();
  const Grid& g = field.grid();
  return {{"png", base64_encode(encode_png16(field))},
          {"height", g.dims() == 1 ? 1 : g.samples(0)},
          {"width", g.dims() == 1 ? g.samples(0) : g.samples(1)},
          {"min", v.minCoeff()},
          {"max", v.maxCoeff()}};
}

Grid grid_from_json(const Json& j) {
  const std::vector<double> n = numbers(j, "samples");
  const std::vector<double> h = j.contains("spacing") ? numbers(j, "spacing") : std::vector<double>(n.size(), 1.0);
  const std::vector<double> o = j.contains("origin") ? numbers(j, "origin") : std::vector<double>(n.size(), 0.0);
  if (n.empty() || n.size() > 2 || h.size() != n.size() || o.size() != n.size())
    throw bad_request("field needs 1 or 2 samples, spacing and origin entries");
  for (double x : n)
    if (!(x >= 1.0) || x != std::floor(x)) throw bad_request("field samples must be positive integers");
  if (n.size() == 1) return Grid(static_cast<Index>(n[0]), h[0], o[0]);
  return Grid({static_cast<Index>(n[0]), static_cast<Index>(n[1])}, {h[0], h[1]}, {o[0], o[1]});
}

SampledField field_from_json(const Json& j, const Grid& grid) {
  const std::vector<double> values = numbers(j, "values");
  if (static_cast<Index>(values.size()) != grid.size()) throw bad_request("field values do not match its samples");
  return SampledField::from_real(grid, Eigen::Map<const RealArray>(values.data(), grid.size()));
}

std::string content_hash(const SampledField& f) {
  const ComplexArray& v = f.values();
  const auto* p = reinterpret_cast<const unsigned char*>(v.data());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()) * sizeof(Complex); ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

}  // namespace

struct Service::Entry {
  Dataset dataset;
  Reconstructor reconstructor;
  SpectralField data_hat;
  bool real;
  std::string hash;

  explicit Entry(Dataset d)
      : dataset(std::move(d)),
        reconstructor(dataset.data.grid(), dataset.kernel, dataset.mollifier),
        data_hat(forward_transform(dataset.data)),
        real(dataset.data.is_real()),
        hash(content_hash(dataset.data)) {}

  const SampledField& probe_data() const { return dataset.clean ? *dataset.clean : dataset.data; }
};

Dataset phantom_dataset(const std::string& id, const Experiment2DConfig& config) {
  Experiment2DSetup setup = prepare_2d(config);
  std::ostringstream description;
  description << "Shepp-Logan phantom " << config.size << "x" << config.size << ", Gaussian blur sigma "
              << config.blur_sigma << " px, noise sigma " << config.noise_sigma << ", seed " << config.seed;
  return {id,
          description.str(),
          std::move(setup.data),
          std::move(setup.blurred),
          std::move(setup.truth),
          setup.reconstructor.kernel(),
          setup.reconstructor.mollifier(),
          config.noise_sigma};
}

Service::Service(bool with_demo) : server_(std::make_unique<httplib::Server>()) {
  if (with_demo) add_dataset(phantom_dataset("demo", {}));

  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server_->Get("/api/.*", forward);
  server_->Post("/api/.*", forward);
  server_->Options("/api/.*", forward);
}

Service::~Service() = default;

void Service::add_dataset(Dataset dataset) {
  if (dataset.id.empty()) throw InvalidArgument("dataset id must not be empty");
  auto entry = std::make_shared<const Entry>(std::move(dataset));
  std::unique_lock lock(mutex_);
  if (datasets_.count(entry->dataset.id)) throw InvalidArgument("dataset '" + entry->dataset.id + "' exists");
  datasets_.emplace(entry->dataset.id, std::move(entry));
}

std::shared_ptr<const Service::Entry> Service::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = datasets_.find(id);
  if (it == datasets_.end()) throw HttpError(404, "unknown dataset '" + id + "'");
  return it->second;
}

HttpResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  const auto parse = [&] {
    try {
      return Json::parse(body);
    } catch (const Json::parse_error& e) {
      throw bad_request(std::string("malformed JSON: ") + e.what());
    }
  };
  const auto allow = [&](std::string_view expected) {
    if (method != expected) throw HttpError(405, std::string(method) + " is not allowed on " + std::string(path));
  };
  try {
    if (method == "OPTIONS") return {204, "", "text/plain"};
    if (path == "/api/health") {
      allow("GET");
      std::shared_lock lock(mutex_);
      return json_response(200, {{"status", "ok"}, {"datasets", datasets_.size()}, {"versions", component_versions()}});
    }
    if (path == "/api/datasets") {
      if (method == "GET") return list_datasets();
      allow("POST");
      return create_dataset(parse());
    }
    if (path.starts_with("/api/datasets/")) {
      allow("GET");
      return describe_dataset(std::string(path.substr(std::string_view("/api/datasets/").size())));
    }
    if (path == "/api/reconstruct") {
      allow("POST");
      return reconstruct(parse());
    }
    if (path == "/api/calibrate") {
      allow("POST");
      return calibrate(parse());
    }
    return error_response(404, "no endpoint " + std::string(path));
  } catch (const HttpError& e) {
    return error_response(e.status, e.what());
  } catch (const InvalidArgument& e) {
    return error_response(422, e.what());
  } catch (const CalibrationError& e) {
    return error_response(422, e.what());
  } catch (const NumericalContractError& e) {
    return error_response(500, e.what());
  } catch (const Json::exception& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpResponse Service::list_datasets() const {
  std::shared_lock lock(mutex_);
  Json out = Json::array();
  for (const auto& [id, entry] : datasets_) {
    const Grid& g = entry->dataset.data.grid();
    Json samples = Json::array();
    for (int a = 0; a < g.dims(); ++a) samples.push_back(g.samples(a));
    out.push_back({{"id", id}, {"dims", g.dims()}, {"samples", samples}, {"description", entry->dataset.description}});
  }
  return json_response(200, out);
}

HttpResponse Service::describe_dataset(const std::string& id) const {
  const auto entry = find(id);
  const Dataset& d = entry->dataset;
  const Grid& g = d.data.grid();
  Json samples = Json::array();
  Json spacing = Json::array();
  Json origin = Json::array();
  for (int a = 0; a < g.dims(); ++a) {
    samples.push_back(g.samples(a));
    spacing.push_back(g.spacing(a));
    origin.push_back(g.origin(a));
  }
  Json out = {{"id", d.id},
              {"description", d.description},
              {"dims", g.dims()},
              {"samples", samples},
              {"spacing", spacing},
              {"origin", origin},
              {"kernel", d.kernel.name()},
              {"mollifier", d.mollifier.name()},
              {"noise_sigma", d.noise_sigma},
              {"hash", entry->hash},
              {"data", image_json(d.data)}};
  if (d.truth) out["truth"] = image_json(*d.truth);
  return json_response(200, out);
}

HttpResponse Service::create_dataset(const Json& body) {
  if (!body.is_object()) throw bad_request("request body must be a JSON object");
  std::optional<Dataset> built;
  if (body.contains("phantom")) {
    Experiment2DConfig config;
    from_json(body.at("phantom"), config);
    built = phantom_dataset("", config);
  } else {
    const Grid grid = grid_from_json(require(body, "field"));
    SampledField data = field_from_json(body.at("field"), grid);
    std::optional<SampledField> clean;
    std::optional<SampledField> truth;
    if (body.contains("clean")) clean = field_from_json(body.at("clean"), grid);
    if (body.contains("truth")) truth = field_from_json(body.at("truth"), grid);
    const double sigma = number_or(body, "noise_sigma", 1e-2);
    if (!(sigma > 0.0)) throw InvalidArgument("noise_sigma must be positive");
    built = Dataset{"",
                    "uploaded field",
                    std::move(data),
                    std::move(clean),
                    std::move(truth),
                    parse_kernel(text(body, "kernel"), grid.dims()),
                    parse_mollifier(body.contains("mollifier") ? text(body, "mollifier") : "gaussian", grid.dims()),
                    sigma};
  }
  Dataset& d = *built;
  if (body.contains("description")) d.description = text(body, "description");

  const bool named = body.contains("id");
  d.id = named ? text(body, "id") : "ds-" + config_hash(body).substr(0, 12);
  if (d.id.empty() || d.id.find('/') != std::string::npos) throw bad_request("dataset id must be non-empty without '/'");
  auto entry = std::make_shared<const Entry>(std::move(d));

  std::unique_lock lock(mutex_);
  const auto it = datasets_.find(entry->dataset.id);
  if (it != datasets_.end()) {
    if (named || it->second->hash != entry->hash) throw HttpError(409, "dataset '" + entry->dataset.id + "' exists");
    return json_response(200, {{"id", entry->dataset.id}, {"created", false}, {"hash", entry->hash}});
  }
  const std::string id = entry->dataset.id;
  const std::string hash = entry->hash;
  datasets_.emplace(id, std::move(entry));
  return json_response(201, {{"id", id}, {"created", true}, {"hash", hash}});
}

HttpResponse Service::reconstruct(const Json& body) const {
  const auto t0 = std::chrono::steady_clock::now();
  const auto entry = find(text(body, "dataset"));
  const Grid& grid = entry->dataset.data.grid();
  const double alpha = number(body, "alpha");
  const double default_beta = number(body, "default_beta");
  std::vector<std::pair<RegionMask, double>> regions;
  if (body.contains("regions")) {
    if (!body.at("regions").is_array()) throw bad_request("field 'regions' must be an array");
    for (const Json& r : body.at("regions")) regions.emplace_back(region_of(r, grid), number(r, "beta"));
  }
  const BetaField beta = piecewise_beta(grid, default_beta, regions);
  const std::uint64_t seed = seed_or(body, "seed", 0);

  Json timings = Json::object();
  auto t = std::chrono::steady_clock::now();
  const SampledField rec = entry->reconstructor.apply_spectrum(entry->data_hat, entry->real, alpha, beta);
  timings["reconstruct"] = ms_since(t);
  t = std::chrono::steady_clock::now();
  Json out = {{"dataset", entry->dataset.id}, {"levels", beta.level_count()}, {"seed", seed}, {"image", image_json(rec)}};
  timings["encode"] = ms_since(t);

  if (flag_or(body, "estimate_kappa", false)) {
    const double sigma = number_or(body, "noise_sigma", entry->dataset.noise_sigma);
    const double realizations = number_or(body, "realizations", 1.0);
    if (!(realizations >= 1.0) || realizations != std::floor(realizations))
      throw InvalidArgument("realizations must be a positive integer");
    t = std::chrono::steady_clock::now();
    const StabilityReport s = estimate_kappa(entry->reconstructor, entry->probe_data(), alpha, beta, sigma,
                                             substream(seed, "noise"), static_cast<Index>(realizations),
                                             RegionMask::full(grid));
    timings["kappa"] = ms_since(t);
    out["kappa"] = s.kappa;
    out["c1"] = s.c1;
    out["c2"] = s.c2;
    out["noise_sigma"] = sigma;
    out["realizations"] = s.realizations;
  }
  if (entry->dataset.truth && !regions.empty()) {
    BoolArray roi = BoolArray::Constant(grid.size(), false);
    for (const auto& [region, value] : regions) roi = roi || region.membership();
    out["roi_error"] = region_error(rec, *entry->dataset.truth, RegionMask::bitmap(grid, roi));
  }
  if (flag_or(body, "include_values", false)) {
    const RealArray v = rec.real();
    out["values"] = std::vector<double>(v.data(), v.data() + v.size());
  }
  timings["total"] = ms_since(t0);
  out["timings_ms"] = timings;
  return json_response(200, out);
}

HttpResponse Service::calibrate(const Json& body) const {
  const auto t0 = std::chrono::steady_clock::now();
  const auto entry = find(text(body, "dataset"));
  const Grid& grid = entry->dataset.data.grid();
  const double alpha = number(body, "alpha");
  const RegionMask roi = region_of(require(body, "roi"), grid);
  if (roi.empty()) throw InvalidArgument("roi is empty");
  const double target = number(body, "kappa_target");
  const std::uint64_t seed = seed_or(body, "seed", 0);

  CalibrationOptions options;
  options.noise_sigma = number_or(body, "noise_sigma", entry->dataset.noise_sigma);
  options.seed = substream(seed, "noise");
  if (body.contains("beta_in")) options.beta_in_candidates = {number(body, "beta_in")};
  if (body.contains("beta_in_candidates")) options.beta_in_candidates = numbers(body, "beta_in_candidates");
  if (body.contains("beta_out_range")) {
    const auto range = numbers(body, "beta_out_range");
    if (range.size() != 2) throw bad_request("beta_out_range needs two numbers");
    options.beta_out_range = {range[0], range[1]};
  }
  options.tolerance = number_or(body, "tolerance", options.tolerance);
  if (!(options.noise_sigma > 0.0)) throw InvalidArgument("noise_sigma must be positive");

  const SampledField delta =
      gaussian_noise(grid, options.noise_sigma, substream(options.seed, std::uint64_t{0}));
  const KappaProbe probe(entry->reconstructor, entry->probe_data(), delta, RegionMask::full(grid));
  const CalibrationResult r = calibrate_beta(probe, alpha, roi, target, options);
  return json_response(200, {{"dataset", entry->dataset.id},
                             {"beta_in", r.beta_in},
                             {"beta_out", r.beta_out},
                             {"kappa_achieved", r.kappa},
                             {"kappa_target", target},
                             {"seed", seed},
                             {"log", r.log},
                             {"timings_ms", {{"total", ms_since(t0)}}}});
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Service::listen() { return server_->listen_after_bind(); }

bool Service::serve(const std::string& host, int port) { return bind(host, port) >= 0 && listen(); }

void Service::stop() { server_->stop(); }

}  // namespace molldeconv
