#pragma once

#include "molldeconv/experiments.hpp"

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace molldeconv {

/// Immutable input of interactive reconstructions.
struct Dataset {
  std::string id;
  std::string description;
  SampledField data;
  /// Noise-free data; kappa probes perturb this when present and data otherwise.
  std::optional<SampledField> clean;
  /// Ground truth for roi errors.
  std::optional<SampledField> truth;
  KernelSpec kernel;
  MollifierSpec mollifier;
  /// Default kappa probe noise level.
  double noise_sigma = 1e-2;
};

/// Phantom pipeline of a 2D config (phantom, blur, noise) as a dataset.
Dataset phantom_dataset(const std::string& id, const Experiment2DConfig& config);

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// JSON API over a set of datasets. Datasets and their cached spectra never change once added,
/// so requests run concurrently; only dataset creation takes the write lock.
///
///   GET  /api/health
///   GET  /api/datasets                 [{id, dims, samples, description}]
///   GET  /api/datasets/<id>            metadata plus PNG previews
///   POST /api/datasets                 {id?, phantom: <2D config>} or {id?, field, kernel, mollifier, ...}
///   POST /api/reconstruct              {dataset, alpha, default_beta, regions, estimate_kappa, noise_sigma, seed}
///   POST /api/calibrate                {dataset, alpha, roi, kappa_target, ...}
///
/// Errors: 400 malformed request, 404 unknown dataset or path, 405 wrong method, 409 dataset id
/// taken, 422 parameter contract violated or budget unreachable, 500 numerical contract breached.
class Service {
 public:
  /// with_demo adds the "demo" dataset: the default 301x301 phantom pipeline.
  explicit Service(bool with_demo = true);
  ~Service();

  /// Throws InvalidArgument when the id is taken.
  void add_dataset(Dataset dataset);

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Binds without serving; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop() is called.
  bool listen();
  /// bind then listen. Returns false when binding fails.
  bool serve(const std::string& host, int port);
  void stop();

 private:
  struct Entry;

  std::shared_ptr<const Entry> find(const std::string& id) const;
  HttpResponse list_datasets() const;
  HttpResponse describe_dataset(const std::string& id) const;
  HttpResponse create_dataset(const Json& body);
  HttpResponse reconstruct(const Json& body) const;
  HttpResponse calibrate(const Json& body) const;

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const Entry>> datasets_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace molldeconv
