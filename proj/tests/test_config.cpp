#include <sstream>
#include <string>

#include "doctest.h"
#include "gibbsdc/config.hpp"

using namespace gibbsdc;

namespace {

std::string error_of(const std::string& command, const Settings& s) {
  try {
    make_config(command, s);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("valid configuration") {
    const auto c = make_config("sample", {{"model", "strauss"}, {"alpha0", "2"}, {"beta", "0.25"},
                                          {"window", "4"}, {"mode", "thinning-exact"}, {"seed", "9"}});
    CHECK(c.model.kind == ModelKind::strauss);
    CHECK(c.model.beta == doctest::Approx(0.25));
    CHECK(c.model.r0 == doctest::Approx(0.3));
    CHECK(c.window == 4.0);
    CHECK(c.seed == 9);
    CHECK(c.route.route == SamplingRoute::thinning_exact);
    const auto clt = make_config("clt", {{"model", "hard_sphere"}, {"functional", "knn-length:k=4"}, {"n", "5,10"}});
    CHECK(clt.n_list == std::vector<double>{5.0, 10.0});
    CHECK(clt.spec.kind == ScoreSpec::Kind::knn_length);
  }

  TEST_CASE("invalid values name their key") {
    CHECK(error_of("sample", {{"model", "strauss"}, {"r0", "-1"}}).rfind("r0", 0) == 0);
    CHECK(error_of("sample", {{"model", "strauss"}, {"beta", "-1"}}).rfind("beta", 0) == 0);
    CHECK(error_of("sample", {{"window", "abc"}}).rfind("window", 0) == 0);
    CHECK(error_of("sample", {{"model", "ising"}}).rfind("model", 0) == 0);
    CHECK(error_of("sample", {{"colour", "red"}}).rfind("colour", 0) == 0);
    CHECK(error_of("sample", {{"reps", "3"}}).rfind("reps", 0) == 0);
    CHECK(error_of("clt", {{"functional", "betti:q=1,r=0.9,s=0.2"}}) != "");
    CHECK(error_of("couple", {{"perturb-box", "1,2,3"}}).rfind("perturb-box", 0) == 0);
    CHECK(error_of("launch", {}) != "");
  }

  TEST_CASE("file values are overridden by flags") {
    std::istringstream file("# fixture\nmodel = hard_sphere\nalpha0 = 1.5\n\nwindow = 6\n");
    const auto base = read_settings(file);
    CHECK(base.size() == 3);
    const auto merged = merge_settings(base, {{"window", "8"}});
    const auto c = make_config("sample", merged);
    CHECK(c.model.kind == ModelKind::hard_sphere);
    CHECK(c.model.alpha0 == 1.5);
    CHECK(c.window == 8.0);
    std::istringstream bad("window 6\n");
    CHECK_THROWS_AS(read_settings(bad), ConfigError);
  }

  TEST_CASE("output header") {
    const auto c = make_config("sample", {{"model", "hard_sphere"}, {"seed", "42"}});
    const auto h = output_header(c);
    CHECK(h.rfind("# gibbsdc ", 0) == 0);
    CHECK(h.find("# command = sample\n") != std::string::npos);
    CHECK(h.find("# model = hard_sphere\n") != std::string::npos);
    CHECK(h.find("# r0 = 0.3\n") != std::string::npos);
    CHECK(h.find("# master seed = 42\n") != std::string::npos);
  }
}
