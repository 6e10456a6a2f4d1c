#include "helpers.hpp"

#include "molldeconv/error.hpp"
#include "molldeconv/experiments.hpp"
#include "molldeconv/io.hpp"

#include <doctest.h>

using namespace molldeconv;
using namespace testing;

namespace {

struct BumpSetup {
  Grid grid;
  SampledField f;
};

BumpSetup bump_1d(Index n = 1024, double extent = 16.0) {
  const Grid grid(n, extent / static_cast<double>(n), -0.5 * extent);
  RealArray v(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    const double x = grid.node(k)[0];
    v[k] = std::exp(-kPi * x * x);
  }
  return {grid, SampledField::from_real(grid, v)};
}

const std::vector<double> kAlphas{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};

Experiment2DConfig small_2d() {
  Experiment2DConfig c;
  c.size = 101;
  c.blur_sigma = 3.0;
  c.realizations = 2;
  c.baseline = false;
  return c;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("noiseless 1D rate study recovers the Gaussian mollifier exponent") {
  const auto [grid, f] = bump_1d();
  const RateReport r = convergence_rate_study(f, sobolev_kernel(1.0), gaussian_mollifier(1),
                                              constant_beta(grid, 1.0), kAlphas);
  CHECK(r.expected == 2.0);
  CHECK(std::abs(r.slope - 2.0) <= 0.3);
  CHECK(r.notices.empty());
  for (std::size_t i = 1; i < r.points.size(); ++i) CHECK(r.points[i].sup_error < r.points[i - 1].sup_error);
  CHECK(r.points.back().relative_l2 < 1e-3);
}

TEST_CASE("rate study error depends on alpha and beta through their product only") {
  const auto [grid, f] = bump_1d();
  const KernelSpec kernel = sobolev_kernel(1.0);
  const RateReport a = convergence_rate_study(f, kernel, gaussian_mollifier(1), constant_beta(grid, 2.0),
                                              {0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625});
  const RateReport b = convergence_rate_study(f, kernel, gaussian_mollifier(1), constant_beta(grid, 1.0),
                                              {0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125});
  for (std::size_t i = 0; i < a.points.size(); ++i)
    CHECK(a.points[i].sup_error == doctest::Approx(b.points[i].sup_error).epsilon(1e-10));

  // Doubling beta at small alpha multiplies the error by about 2^d.
  const RateReport c = convergence_rate_study(f, kernel, gaussian_mollifier(1), constant_beta(grid, 1.0),
                                              {0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625});
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const double ratio = a.points[i].sup_error / c.points[i].sup_error;
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.3));
  }
}

TEST_CASE("noisy 1D rate study below the noise threshold keeps the rate") {
  const auto [grid, f] = bump_1d();
  RateOptions options;
  options.noise = SpectralNoiseSpec{1e-6, -4.5, 11};
  const RateReport r = convergence_rate_study(f, sobolev_kernel(1.0), gaussian_mollifier(1),
                                              constant_beta(grid, 1.0), kAlphas, options);
  CHECK(r.notices.empty());
  CHECK(std::abs(r.slope - 2.0) <= 0.3);
}

TEST_CASE("noise exponent above the threshold is reported") {
  const auto [grid, f] = bump_1d();
  RateOptions options;
  options.noise = SpectralNoiseSpec{1e-6, -3.0, 11};
  const RateReport r = convergence_rate_study(f, sobolev_kernel(1.0), gaussian_mollifier(1),
                                              constant_beta(grid, 1.0), kAlphas, options);
  REQUIRE(r.notices.size() == 1);
  CHECK(r.notices[0].find("not below") != std::string::npos);
}

TEST_CASE("points under the error floor are left out of the fit") {
  const auto [grid, f] = bump_1d();
  RateOptions options;
  options.floor = 1e-3;
  const RateReport r = convergence_rate_study(f, sobolev_kernel(1.0), gaussian_mollifier(1),
                                              constant_beta(grid, 1.0), kAlphas, options);
  Index fitted = 0;
  for (const RatePoint& p : r.points) {
    CHECK(p.fitted == (p.sup_error >= 1e-3));
    fitted += p.fitted;
  }
  CHECK(fitted == 4);
  CHECK(r.notices.size() == 2);
  CHECK(std::abs(r.slope - 2.0) <= 0.3);

  options.floor = 0.05;
  CHECK_THROWS_AS(convergence_rate_study(f, sobolev_kernel(1.0), gaussian_mollifier(1),
                                         constant_beta(grid, 1.0), kAlphas, options),
                  InvalidArgument);
}

TEST_CASE("rate study rejects short sweeps") {
  const auto [grid, f] = bump_1d(64, 8.0);
  const KernelSpec kernel = sobolev_kernel(1.0);
  const BetaField beta = constant_beta(grid, 1.0);
  CHECK_THROWS_AS(convergence_rate_study(f, kernel, gaussian_mollifier(1), beta, {0.5, 0.25}), InvalidArgument);
  CHECK_THROWS_AS(convergence_rate_study(f, kernel, gaussian_mollifier(1), beta, {0.5, 0.25, 0.125, 0.0625}),
                  InvalidArgument);
  CHECK_THROWS_AS(convergence_rate_study(f, kernel, gaussian_mollifier(1), beta, {0.5, 0.0, 0.01}),
                  InvalidArgument);
  CHECK_NOTHROW(convergence_rate_study(f, kernel, gaussian_mollifier(1), beta, {0.5, 0.1, 0.5 / std::sqrt(1000.0)}));
}

TEST_CASE("2D rate study recovers the exponent") {
  RateStudyConfig config;
  config.dims = 2;
  config.samples = 128;
  const Json report = run_rate_study(config).report;
  CHECK(std::abs(report["slope"].get<double>() - 2.0) <= 0.3);

  config.noise = SpectralNoiseSpec{1e-6, -5.5, 5};
  const Json noisy = run_rate_study(config).report;
  CHECK(noisy["notices"].empty());
  CHECK(std::abs(noisy["slope"].get<double>() - 2.0) <= 0.3);
}

TEST_CASE("away_from_jumps removes a band around each jump") {
  const Grid grid(20, 1.0);
  RealArray v = RealArray::Zero(20);
  v.tail(10) = 1.0;
  const RegionMask m = away_from_jumps(SampledField::from_real(grid, v), 2);
  CHECK(m.count() == 14);
  for (Index k = 7; k <= 12; ++k) CHECK_FALSE(m.contains(k));
  CHECK(m.contains(6));
  CHECK(m.contains(13));

  const Grid g2({8, 8}, {1.0, 1.0});
  RealArray w = RealArray::Zero(64);
  w[g2.ravel(4, 4)] = 1.0;
  const RegionMask m2 = away_from_jumps(SampledField::from_real(g2, w), 1);
  CHECK_FALSE(m2.contains(g2.ravel(4, 4)));
  CHECK_FALSE(m2.contains(g2.ravel(2, 4)));
  CHECK_FALSE(m2.contains(g2.ravel(4, 6)));
  CHECK(m2.contains(g2.ravel(1, 4)));
  CHECK(m2.contains(g2.ravel(0, 0)));
}

TEST_CASE("1D experiment matches the stability budget") {
  const ExperimentResult result = run_1d_experiment({});
  const Json& r = result.report;
  for (const Json& run : r["runs"]) {
    const double kc = run["constant"]["kappa"].get<double>();
    CHECK(std::abs(kc - 7.6) <= 0.2 * 7.6);
    CHECK(run["kappa_relative_gap"].get<double>() <= 0.02);
  }
  // At low noise the dip resolves the pulses better.
  const Json& low = r["runs"][0];
  CHECK(low["noise_level"].get<double>() == 1e-4);
  CHECK(low["variable"]["roi_error"].get<double>() < low["constant"]["roi_error"].get<double>());
  CHECK(run_1d_experiment({}).report.dump() == r.dump());
  CHECK(result.fields.size() == 3 + 3 * 2);
}

TEST_CASE("1D experiment with a fixed constant beta skips calibration") {
  Experiment1DConfig c;
  c.beta_constant = 1.0;
  const Json r = run_1d_experiment(c).report;
  CHECK_FALSE(r["calibration"].contains("beta_constant"));
  CHECK(r["runs"][0]["constant"]["beta"].get<double>() == 1.0);
  CHECK(r["runs"][0]["kappa_relative_gap"].get<double>() <= 0.02);
}

TEST_CASE("2D experiment on a small phantom") {
  const Experiment2DConfig c = small_2d();
  const ExperimentResult result = run_2d_experiment(c);
  const Json& r = result.report;
  CHECK(r["degenerate_max_difference"].get<double>() <= 1e-12);
  CHECK(r["constant"]["stability"]["kappas"].size() == 2);
  CHECK(r["variable"]["stability"]["kappa"].get<double>() > 0.0);
  CHECK_FALSE(r.contains("baseline"));
  CHECK(run_2d_experiment(c).report.dump() == r.dump());
}

TEST_CASE("full-roi baseline is the global constant-beta run") {
  const Experiment2DSetup setup = prepare_2d(small_2d());
  const Grid& grid = setup.truth.grid();
  const RunSummary constant = run_2d_case(setup, constant_beta(grid, setup.config.beta_constant));
  const BaselineResult b = small_support_baseline(setup, RegionMask::full(grid), 1.0);
  CHECK(b.beta == setup.config.beta_constant);
  CHECK(max_abs(b.reconstruction.values() - constant.reconstruction.values()) <= 1e-12);
  CHECK(b.kappa == doctest::Approx(constant.stability.kappas.front()).epsilon(1e-12));
  CHECK(b.roi_error == doctest::Approx(constant.error).epsilon(1e-12));
}

TEST_CASE("baseline restricts data to the equal-area square") {
  const Experiment2DSetup setup = prepare_2d(small_2d());
  const Grid& grid = setup.truth.grid();
  const RunSummary constant = run_2d_case(setup, constant_beta(grid, setup.config.beta_constant));
  const double target = constant.stability.kappas.front();
  const BaselineResult b = small_support_baseline(setup, setup.roi, target, {0.3, 10.0});
  CHECK(std::abs(b.kappa - target) <= 0.02 * target);
  const double area = static_cast<double>(setup.roi.count());
  CHECK(static_cast<double>(b.support.count()) == doctest::Approx(area).epsilon(0.15));
  CHECK_THROWS_AS(small_support_baseline(setup, RegionMask::bitmap(grid, BoolArray::Constant(grid.size(), false)), target),
                  InvalidArgument);
}

TEST_CASE("roi scan reports kappa at every position") {
  const Experiment2DSetup setup = prepare_2d(small_2d());
  const std::vector<PhantomDisk> positions{{0.0, 0.30, 0.2}, {-0.5, -0.8, 0.1}, {0.5, 0.0, 0.15}};
  const auto snapshots = roi_scan(setup, positions, 0.8, 6.4);
  REQUIRE(snapshots.size() == positions.size());
  for (const RoiSnapshot& s : snapshots) {
    CHECK(std::isfinite(s.kappa));
    CHECK(s.kappa > 0.0);
    CHECK(s.reconstruction.grid() == setup.truth.grid());
  }
  const auto same = roi_scan(setup, {positions[0]}, 2.5, 2.5);
  const RunSummary constant = run_2d_case(setup, constant_beta(setup.truth.grid(), 2.5));
  CHECK(same[0].kappa == doctest::Approx(constant.stability.kappas.front()).epsilon(1e-12));
}

TEST_CASE("phantom disk masks use phantom coordinates") {
  const Grid grid({101, 101}, {1.0, 1.0});
  const RegionMask m = phantom_disk_mask(grid, {0.0, 0.0, 0.2});
  CHECK(m.contains(grid.ravel(50, 50)));
  CHECK(m.contains(grid.ravel(50, 59)));
  CHECK_FALSE(m.contains(grid.ravel(50, 62)));
  const RegionMask up = phantom_disk_mask(grid, {0.0, 0.5, 0.1});
  CHECK(up.contains(grid.ravel(25, 50)));
  CHECK_FALSE(up.contains(grid.ravel(75, 50)));
  CHECK_THROWS_AS(phantom_disk_mask(Grid(16, 1.0), {0.0, 0.0, 0.1}), InvalidArgument);
  CHECK_THROWS_AS(phantom_disk_mask(grid, {0.0, 0.0, 0.0}), InvalidArgument);
}

TEST_CASE("configs round-trip through JSON") {
  Experiment1DConfig c1;
  c1.seed = 17;
  c1.beta_constant = 0.3;
  c1.noise_levels = {1e-3};
  const Json j1 = c1;
  CHECK(Json(j1.get<Experiment1DConfig>()) == j1);

  Experiment2DConfig c2;
  c2.variant = SheppLoganVariant::Original;
  c2.roi = {0.1, 0.2, 0.3};
  c2.blobs.clear();
  const Json j2 = c2;
  CHECK(Json(j2.get<Experiment2DConfig>()) == j2);

  RateStudyConfig c3;
  c3.noise = SpectralNoiseSpec{1e-6, -5.5, 3};
  const Json j3 = c3;
  CHECK(Json(j3.get<RateStudyConfig>()) == j3);
  CHECK(config_hash(Json(j3.get<RateStudyConfig>())) == config_hash(j3));
}

TEST_CASE("partial configs keep defaults") {
  const auto c = Json::parse(R"({"size": 201, "roi": {"radius": 0.25}})").get<Experiment2DConfig>();
  CHECK(c.size == 201);
  CHECK(c.roi.radius == 0.25);
  CHECK(c.roi.y == 0.30);
  CHECK(c.beta_in == 0.8);
  const auto d = Json::parse(R"({"beta_constant": null, "seed": 4})").get<Experiment1DConfig>();
  CHECK_FALSE(d.beta_constant.has_value());
  CHECK(d.seed == 4);
}

TEST_CASE("configs reject unknown keys and bad types") {
  CHECK_THROWS_AS(Json::parse(R"({"sise": 201})").get<Experiment2DConfig>(), InvalidArgument);
  CHECK_THROWS_AS(Json::parse(R"({"roi": {"r": 1}})").get<Experiment2DConfig>(), InvalidArgument);
  CHECK_THROWS_AS(Json::parse(R"({"variant": "new"})").get<Experiment2DConfig>(), InvalidArgument);
  CHECK_THROWS_AS(Json::parse(R"({"samples": "many"})").get<Experiment1DConfig>(), InvalidArgument);
  CHECK_THROWS_AS(Json::parse(R"([1, 2])").get<RateStudyConfig>(), InvalidArgument);
  CHECK_THROWS_AS(Json::parse(R"({"noise": {"E": 1, "sigma": 2}})").get<RateStudyConfig>(), InvalidArgument);
}

TEST_CASE("experiment inputs are validated") {
  Experiment1DConfig c1;
  c1.noise_levels = {};
  CHECK_THROWS_AS(run_1d_experiment(c1), InvalidArgument);
  c1.noise_levels = {-1.0};
  CHECK_THROWS_AS(run_1d_experiment(c1), InvalidArgument);
  Experiment2DConfig c2 = small_2d();
  c2.realizations = 0;
  CHECK_THROWS_AS(prepare_2d(c2), InvalidArgument);
  RateStudyConfig c3;
  c3.dims = 3;
  CHECK_THROWS_AS(run_rate_study(c3), InvalidArgument);
}

}
