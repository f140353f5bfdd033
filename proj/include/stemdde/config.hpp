#pragma once

#include "stemdde/history.hpp"
#include "stemdde/rates.hpp"
#include "stemdde/sampler.hpp"
#include "stemdde/semiflow.hpp"

#include <cstdint>
#include <string>

namespace stemdde {

/// Initial history declaration: a constant pair, a small family of analytic
/// functions per component, or a segment CSV file (the dump format).
struct HistoryConfig {
    std::string kind = "constant"; // constant | function | file
    double w = 0.0, v = 0.0;       // constant
    // function: per component c0 + c1*theta + c2*cos(omega*theta)
    std::array<double, 2> f_c0{}, f_c1{}, f_c2{}, f_omega{};
    int f_knots = 64;
    std::string path; // file
};

/// Parameters of the condition-check commands.
struct CheckConfig {
    double y_lo = -0.9, y_hi = 6.0;
    int n_grid = 64;
    int lb_pairs = 500;
    int s_probes = 12;
    SamplerSpec sampler;
};

/// One structured configuration file drives every command.
struct RunConfig {
    RateSet rates;
    HistoryConfig initial_history;
    IntegratorOptions integrator;
    double T = 10.0;
    CheckConfig check;
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    bool auto_compat = false;

    [[nodiscard]] HistorySegment build_initial_history() const;

    [[nodiscard]] std::string to_json_string() const;
    [[nodiscard]] static RunConfig from_json_string(const std::string& text);
    [[nodiscard]] static RunConfig load_file(const std::string& path);
    void save_file(const std::string& path) const;
};

} // namespace stemdde
