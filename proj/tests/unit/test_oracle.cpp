#include <sstream>

#include "gnnrec/oracle.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace gnnrec;

TEST_CASE("report semantics") {
  CHECK(make_report("a", 0.5, 1.0, 10).passed);
  CHECK(!make_report("b", 1.5, 1.0, 10).passed);
  CHECK(make_report("c", 1.0, 1.0, 10).passed);
}

TEST_CASE("finite difference oracle") {
  const auto adj = normalized_adjacency(build_cycle(80, 2));
  SUBCASE("sigmoid classification") {
    const auto gt = sample_ground_truth(4, 2, 1.0, Activation::Sigmoid, 1);
    const auto ds = forward_labels(gt, adj, sample_features(80, 4, 2), Problem::Classification, std::nullopt, 3);
    const auto r = fd_gradient_check(ModelParams{0.5 * gt.w_star, Activation::Sigmoid}, ds, adj, ds.omega, 1e-5);
    CHECK(r.passed);
    CHECK(r.max_abs_dev <= 1e-6);
  }
  SUBCASE("relu regression at the truth") {
    const auto gt = sample_ground_truth(4, 2, 1.0, Activation::ReLU, 4);
    const auto ds = forward_labels(gt, adj, sample_features(80, 4, 5), Problem::Regression, std::nullopt, 6);
    const auto r = fd_gradient_check(ModelParams{gt.w_star, Activation::ReLU}, ds, adj, ds.omega, 1e-6, 1e-8);
    CHECK(r.passed);
  }
  SUBCASE("size guard") {
    const auto gt = sample_ground_truth(30, 10, 1.0, Activation::ReLU, 4);
    const auto ds = forward_labels(gt, adj, sample_features(80, 30, 5), Problem::Regression, std::nullopt, 6);
    CHECK_ERROR_CODE(fd_gradient_check(ModelParams{gt.w_star, Activation::ReLU}, ds, adj, ds.omega, 1e-6),
                     ErrorCode::TooLarge);
  }
}

TEST_CASE("monte carlo moments") {
  const auto adj = normalized_adjacency(build_empty(1000));
  const auto relu = sample_ground_truth(4, 1, 1.0, Activation::ReLU, 7);
  CHECK(mc_moment_check(relu, adj, 20000, 8).passed);
  const auto sig = sample_ground_truth(4, 1, 1.0, Activation::Sigmoid, 9);
  CHECK(mc_moment_check(sig, adj, 20000, 10).passed);
}

TEST_CASE("default suite") {
  const auto reports = run_default_suite();
  CHECK(all_passed(reports));
  for (const auto& r : reports) CHECK_MESSAGE(r.passed, r.name);
  std::ostringstream os;
  write_oracle_json(os, reports);
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j.at("all_passed").get<bool>());
  CHECK(j.at("reports").size() == reports.size());
}
