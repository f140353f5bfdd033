#include "stemdde/config.hpp"
#include "stemdde/errors.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace stemdde;

namespace {

const char* kDemoJson = R"({
  "params": {"x1": 0.0, "x2": 1.0, "b": 1.5, "K": 1.0, "eps": 0.7, "mu": 0.1, "R_minus": -1.0},
  "rates": {
    "g":    {"family": "hill_y", "base": 0.7, "amp": 0.2, "k": 1.0, "n": 2},
    "d":    {"family": "hill_y", "base": 0.0, "amp": 0.2, "k": 2.0, "n": 2},
    "beta": {"family": "hill", "c": 1.0, "k": 1.0, "n": 2},
    "q":    {"family": "affine", "a": 0.5, "b": -0.25}
  },
  "initial_history": {"kind": "constant", "w": 0.5, "v": 0.5},
  "integrator": {"dt": 0.02, "inner_m": 512, "pc_tol": 1e-10, "norm_cap": 1e8, "x_tol": 1e-8, "T": 10.0},
  "check": {"y_box": [-0.9, 6.0], "n_grid": 64, "lb_pairs": 500, "s_probes": 12,
            "sampler": {"value_lo": 0.2, "value_hi": 2.0, "deriv_bound": 1.0, "knots": 16}},
  "output": {"dir": "out"},
  "seed": 42,
  "auto_compat": true
})";

} // namespace

TEST_CASE("config: parse and round trip") {
    const auto cfg = RunConfig::from_json_string(kDemoJson);
    CHECK(cfg.rates.params.x2 == 1.0);
    CHECK(cfg.rates.params.horizon() == doctest::Approx(1.5));
    CHECK(cfg.T == 10.0);
    CHECK(cfg.seed == 42);
    CHECK(cfg.auto_compat);

    const std::string serialized = cfg.to_json_string();
    const auto again = RunConfig::from_json_string(serialized);
    CHECK(again.to_json_string() == serialized);
    CHECK(again.rates.g.describe() == cfg.rates.g.describe());
    CHECK(again.check.lb_pairs == cfg.check.lb_pairs);
}

TEST_CASE("config: missing field diagnostics name the field") {
    std::string broken(kDemoJson);
    const auto pos = broken.find("\"x2\": 1.0, ");
    REQUIRE(pos != std::string::npos);
    broken.erase(pos, std::string("\"x2\": 1.0, ").size());
    try {
        (void)RunConfig::from_json_string(broken);
        FAIL("expected ConfigError");
    } catch (const ConfigError& ex) {
        CHECK(std::string(ex.what()).find("x2") != std::string::npos);
    }
}

TEST_CASE("config: unknown family and invalid params") {
    std::string bad_family(kDemoJson);
    auto pos = bad_family.find("\"affine\"");
    bad_family.replace(pos, 8, "\"spline\"");
    CHECK_THROWS_AS((void)RunConfig::from_json_string(bad_family), ConfigError);

    std::string bad_params(kDemoJson);
    pos = bad_params.find("\"eps\": 0.7");
    bad_params.replace(pos, 10, "\"eps\": 1.4"); // eps > K
    CHECK_THROWS_AS((void)RunConfig::from_json_string(bad_params), ConfigError);

    CHECK_THROWS_AS((void)RunConfig::from_json_string("not json at all"), ConfigError);
}

TEST_CASE("config: initial history kinds") {
    auto cfg = RunConfig::from_json_string(kDemoJson);
    const auto constant = cfg.build_initial_history();
    CHECK(constant.evaluate(-0.7)[0] == doctest::Approx(0.5));

    cfg.initial_history.kind = "function";
    cfg.initial_history.f_c0 = {0.6, 0.8};
    cfg.initial_history.f_c1 = {0.0, 0.1};
    cfg.initial_history.f_c2 = {0.1, 0.0};
    cfg.initial_history.f_omega = {1.2, 0.0};
    const auto fn_seg = cfg.build_initial_history();
    CHECK(fn_seg.evaluate(0.0)[0] == doctest::Approx(0.7)); // c0 + c2 at theta=0
    CHECK(fn_seg.derivative(-0.5)[1] == doctest::Approx(0.1));

    // file kind reads the dump format back
    const auto tmp = std::filesystem::temp_directory_path() / "stemdde_hist.csv";
    {
        std::ofstream out(tmp);
        fn_seg.dump_csv(out);
    }
    cfg.initial_history.kind = "file";
    cfg.initial_history.path = tmp.string();
    const auto loaded = cfg.build_initial_history();
    CHECK(loaded.evaluate(-0.3)[0] == doctest::Approx(fn_seg.evaluate(-0.3)[0]).epsilon(1e-14));
    std::filesystem::remove(tmp);
}
