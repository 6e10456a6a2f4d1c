#include "helpers.hpp"

#include "molldeconv/random.hpp"
#include "molldeconv/service.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>

using namespace molldeconv;
using namespace testing;

namespace {

Service& demo_service() {
  static Service service;
  return service;
}

Json post(Service& s, std::string_view path, const Json& body, int expected = 200) {
  const HttpResponse r = s.handle("POST", path, body.dump());
  INFO(r.body);
  CHECK(r.status == expected);
  return Json::parse(r.body);
}

int status_of(Service& s, std::string_view method, std::string_view path, std::string_view body = "") {
  return s.handle(method, path, body).status;
}

const Json kConstant = {{"dataset", "demo"}, {"alpha", 1.0}, {"default_beta", 2.5}, {"regions", Json::array()}};

Json blob_roi() {
  // Phantom point (0, 0.30) on the 301 grid: row 104.85, column 150, radius 0.2 * 150.5 pixels.
  return {{"shape", "disk"}, {"params", {150.0, 104.85, 30.1}}};
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("health and dataset listing") {
  Service& s = demo_service();
  const HttpResponse health = s.handle("GET", "/api/health", "");
  CHECK(health.status == 200);
  CHECK(Json::parse(health.body)["status"] == "ok");

  const Json list = Json::parse(s.handle("GET", "/api/datasets", "").body);
  REQUIRE(list.is_array());
  REQUIRE(list.size() >= 1);
  CHECK(list[0]["id"] == "demo");
  CHECK(list[0]["dims"] == 2);
  CHECK(list[0]["samples"] == Json({301, 301}));

  const Json demo = Json::parse(s.handle("GET", "/api/datasets/demo", "").body);
  CHECK(demo["kernel"] == "gaussian2d:sigma=7");
  CHECK(demo["truth"]["width"] == 301);
  CHECK(demo["hash"].get<std::string>().size() == 16);
}

TEST_CASE("constant-beta reconstruction on the demo reports the stability estimate") {
  Service& s = demo_service();
  Json body = kConstant;
  body["estimate_kappa"] = true;
  const Json r = post(s, "/api/reconstruct", body);
  CHECK(r["levels"] == 1);
  CHECK(r["image"]["width"] == 301);
  CHECK(std::abs(r["kappa"].get<double>() - 0.06) <= 0.5 * 0.06);
  CHECK(r["kappa"].get<double>() == doctest::Approx(r["c2"].get<double>() / r["c1"].get<double>()));
  CHECK_FALSE(r.contains("roi_error"));

  // Same kappa as the 2D experiment's single-realization statistic.
  Experiment2DConfig config;
  config.realizations = 1;
  config.baseline = false;
  const Json report = run_2d_experiment(config).report;
  CHECK(r["kappa"].get<double>() == doctest::Approx(report["constant"]["stability"]["kappa"].get<double>()).epsilon(1e-12));
}

TEST_CASE("identical requests give identical images") {
  Service& s = demo_service();
  Json body = kConstant;
  body["regions"] = Json::array({blob_roi()});
  body["regions"][0]["beta"] = 0.8;
  body["default_beta"] = 6.4;
  body["estimate_kappa"] = true;
  body["seed"] = 7;
  const Json a = post(s, "/api/reconstruct", body);
  const Json b = post(s, "/api/reconstruct", body);
  CHECK(a["image"]["png"] == b["image"]["png"]);
  CHECK(a["kappa"] == b["kappa"]);
  CHECK(a["levels"] == 2);
  CHECK(a.contains("roi_error"));
  CHECK(a["seed"] == 7);
}

TEST_CASE("service reconstruction equals the library fast path") {
  Service s(false);
  Experiment2DConfig config;
  config.size = 64;
  s.add_dataset(phantom_dataset("small", config));
  Json body = {{"dataset", "small"}, {"alpha", 0.5}, {"default_beta", 2.0}, {"include_values", true},
               {"regions", Json::array({{{"shape", "rect"}, {"params", {10, 12, 20, 16}}, {"beta", 0.5}}})}};
  const Json r = post(s, "/api/reconstruct", body);

  const Experiment2DSetup setup = prepare_2d(config);
  const Grid& grid = setup.truth.grid();
  const BetaField beta = piecewise_beta(grid, 2.0, {{RegionMask::rectangle(grid, {12, 10}, {16, 20}), 0.5}});
  const SampledField expected =
      reconstruct_fast(setup.data, {0.5, beta, setup.reconstructor.kernel(), setup.reconstructor.mollifier()});
  const auto values = r["values"].get<std::vector<double>>();
  REQUIRE(static_cast<Index>(values.size()) == grid.size());
  double diff = 0.0;
  for (Index k = 0; k < grid.size(); ++k)
    diff = std::max(diff, std::abs(values[static_cast<std::size_t>(k)] - expected.values()[k].real()));
  CHECK(diff == 0.0);
}

TEST_CASE("parameter contract violations are 422") {
  Service& s = demo_service();
  Json zero = kConstant;
  zero["regions"] = Json::array({blob_roi()});
  zero["regions"][0]["beta"] = 0.0;
  post(s, "/api/reconstruct", zero, 422);
  Json negative = kConstant;
  negative["default_beta"] = -1.0;
  post(s, "/api/reconstruct", negative, 422);
  Json alpha = kConstant;
  alpha["alpha"] = 0.0;
  post(s, "/api/reconstruct", alpha, 422);
  Json empty = kConstant;
  empty["regions"] = Json::array({{{"shape", "disk"}, {"params", {-50, -50, 1}}, {"beta", 1.0}}});
  post(s, "/api/reconstruct", empty, 422);
  Json shape = kConstant;
  shape["regions"] = Json::array({{{"shape", "star"}, {"params", {1, 2, 3}}, {"beta", 1.0}}});
  post(s, "/api/reconstruct", shape, 422);
}

TEST_CASE("malformed requests") {
  Service& s = demo_service();
  CHECK(status_of(s, "POST", "/api/reconstruct", "{not json") == 400);
  CHECK(status_of(s, "POST", "/api/reconstruct", "[1]") == 400);
  CHECK(status_of(s, "POST", "/api/reconstruct", R"({"dataset": "demo", "default_beta": 1})") == 400);
  CHECK(status_of(s, "POST", "/api/reconstruct", R"({"dataset": "demo", "alpha": "1", "default_beta": 1})") == 400);
  CHECK(status_of(s, "POST", "/api/reconstruct",
                  R"({"dataset": "demo", "alpha": 1, "default_beta": 1, "seed": -3})") == 400);
  CHECK(status_of(s, "POST", "/api/reconstruct", R"({"dataset": "nope", "alpha": 1, "default_beta": 1})") == 404);
  CHECK(status_of(s, "GET", "/api/datasets/nope") == 404);
  CHECK(status_of(s, "GET", "/api/unknown") == 404);
  CHECK(status_of(s, "GET", "/api/reconstruct") == 405);
  CHECK(status_of(s, "OPTIONS", "/api/reconstruct") == 204);
  const Json error = Json::parse(s.handle("POST", "/api/reconstruct", "{oops").body);
  CHECK(error["status"] == 400);
  CHECK(error.contains("error"));
}

TEST_CASE("calibration matches the constant-beta budget") {
  Service& s = demo_service();
  Json body = kConstant;
  body["estimate_kappa"] = true;
  const double target = post(s, "/api/reconstruct", body)["kappa"].get<double>();
  const Json r = post(s, "/api/calibrate",
                      {{"dataset", "demo"}, {"alpha", 1.0}, {"roi", blob_roi()}, {"kappa_target", target}});
  CHECK(r["beta_in"].get<double>() < 2.5);
  CHECK(r["beta_out"].get<double>() >= 2.5);
  CHECK(std::abs(r["kappa_achieved"].get<double>() - target) <= 0.02 * target);

  // The reconstruct endpoint reproduces the achieved kappa.
  Json check = kConstant;
  check["regions"] = Json::array({blob_roi()});
  check["regions"][0]["beta"] = r["beta_in"];
  check["default_beta"] = r["beta_out"];
  check["estimate_kappa"] = true;
  CHECK(post(s, "/api/reconstruct", check)["kappa"].get<double>() ==
        doctest::Approx(r["kappa_achieved"].get<double>()).epsilon(1e-12));

  Json fixed = {{"dataset", "demo"}, {"alpha", 1.0}, {"roi", blob_roi()}, {"kappa_target", target}, {"beta_in", 1.0}};
  CHECK(post(s, "/api/calibrate", fixed)["beta_in"] == 1.0);

  Json unreachable = fixed;
  unreachable["kappa_target"] = 1e-6;
  post(s, "/api/calibrate", unreachable, 422);
  CHECK(status_of(s, "POST", "/api/calibrate", R"({"dataset": "demo", "alpha": 1, "kappa_target": 0.05})") == 400);
}

TEST_CASE("dataset creation") {
  Service s(false);
  const Json phantom = {{"phantom", {{"size", 64}, {"blur_sigma", 2.0}, {"seed", 5}}}};
  const Json created = post(s, "/api/datasets", phantom, 201);
  const std::string id = created["id"];
  CHECK(id.starts_with("ds-"));
  CHECK(post(s, "/api/datasets", phantom, 200)["created"] == false);

  Json named = phantom;
  named["id"] = "mine";
  post(s, "/api/datasets", named, 201);
  post(s, "/api/datasets", named, 409);
  post(s, "/api/datasets", {{"phantom", {{"sise", 64}}}}, 422);

  std::vector<double> values(32);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = k % 8 < 4 ? 1.0 : 0.0;
  const Json upload = {{"id", "line"},
                       {"field", {{"samples", {32}}, {"spacing", {1.0 / 32}}, {"values", values}}},
                       {"kernel", "gaussian1d:amplitude=0.1,width=0.05"},
                       {"noise_sigma", 1e-3}};
  post(s, "/api/datasets", upload, 201);
  const Json r = post(s, "/api/reconstruct",
                      {{"dataset", "line"}, {"alpha", 0.01}, {"default_beta", 1.0}, {"estimate_kappa", true}});
  CHECK(r["image"]["height"] == 1);
  CHECK(r["kappa"].get<double>() > 0.0);

  Json bad = upload;
  bad["id"] = "bad";
  bad["field"]["samples"] = {33};
  post(s, "/api/datasets", bad, 400);
  bad["field"]["samples"] = {32};
  bad["kernel"] = "box";
  post(s, "/api/datasets", bad, 422);

  const Json list = Json::parse(s.handle("GET", "/api/datasets", "").body);
  CHECK(list.size() == 3);
}

TEST_CASE("concurrent requests match serial execution") {
  Service& s = demo_service();
  std::vector<Json> bodies;
  for (int k = 0; k < 6; ++k) {
    Json b = kConstant;
    b["regions"] = Json::array({blob_roi()});
    b["regions"][0]["beta"] = 0.5 + 0.2 * k;
    b["estimate_kappa"] = true;
    b["seed"] = k;
    bodies.push_back(b);
  }
  std::vector<std::string> serial;
  for (const Json& b : bodies) {
    Json r = Json::parse(s.handle("POST", "/api/reconstruct", b.dump()).body);
    serial.push_back(r["image"]["png"].get<std::string>() + r["kappa"].dump());
  }
  std::vector<std::string> parallel(bodies.size());
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < bodies.size(); ++k)
    threads.emplace_back([&, k] {
      Json r = Json::parse(s.handle("POST", "/api/reconstruct", bodies[k].dump()).body);
      parallel[k] = r["image"]["png"].get<std::string>() + r["kappa"].dump();
    });
  for (auto& t : threads) t.join();
  CHECK(parallel == serial);
}

TEST_CASE("http round trip with CORS") {
  Service s(false);
  const int port = s.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread server([&] { s.listen(); });
  httplib::Client client("127.0.0.1", port);
  httplib::Result health;
  for (int attempt = 0; attempt < 100 && !health; ++attempt) {
    health = client.Get("/api/health");
    if (!health) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto missing = client.Post("/api/reconstruct", R"({"dataset": "demo", "alpha": 1, "default_beta": 1})",
                                   "application/json");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  s.stop();
  server.join();
}

}
