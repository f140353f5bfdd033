#pragma once

#include "stemdde/rates.hpp"
#include "stemdde/sampler.hpp"
#include "stemdde/semiflow.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace stemdde {

/// pass       - holds with exact (analytic) evidence
/// fail       - a concrete counterexample was found (witness attached)
/// statistical_pass - holds on the sampled/randomized evidence only
enum class Verdict { pass, fail, statistical_pass };

[[nodiscard]] const char* to_string(Verdict v);

struct CheckEntry {
    std::string name;
    Verdict verdict = Verdict::pass;
    std::string witness_text;
    std::map<std::string, double> witness; // numeric witnesses (locations, values, fit constants)
    long samples_used = 0;
};

struct ConditionReport {
    std::vector<CheckEntry> entries;
    [[nodiscard]] bool all_passed() const;
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::string to_json_string() const; // documented machine-readable schema
    [[nodiscard]] static ConditionReport from_json_string(const std::string& s);
};

/// Quantitative speed-bound check on closure(B(x2, b)) x [y_lo, y_hi]:
/// eps <= g <= K, |d1 g| < K/b strictly, and 0 < x2 - x1 < (b/K) eps.
/// Exact family bounds give pass/fail; sampled bounds give
/// statistical_pass/fail (n grid points per axis). Failures carry the
/// witness location and value.
CheckEntry check_G(const RateSet& rates, double y_lo, double y_hi, int n);

/// Empirical Lipschitz-on-bounded-sets estimate for the delay or growth
/// functional ("tau" or "F"): N random segment pairs from the sampler
/// family, difference quotients measured against the sup norm (not the C1
/// norm). The run is extended to 2N draws from the same stream and the
/// verdict is statistical_pass when the max quotient is stable within 20%.
CheckEntry estimate_Lb(const std::string& functional, const RateSet& rates,
                       const SamplerSpec& spec, int N, std::uint64_t seed,
                       InnerOptions inner = {});

/// Smoothness probe: directional derivatives of y, tau, F against central
/// finite differences over a delta sweep, on random histories and random
/// continuous directions including non-smooth piecewise-linear ones, plus
/// an O(delta) continuity probe of (psi, chi) -> D(psi)chi.
CheckEntry check_S(const RateSet& rates, int n_probes, std::uint64_t seed,
                   const SamplerSpec& spec = {}, InnerOptions inner = {});

/// Growth-bound fit along a finished trajectory: K1 = max |a| over the
/// records and the smallest envelope C e^{K2 s} >= |b2| with K2 from a
/// least-squares fit of log |b2|.
CheckEntry check_B(const Trajectory& traj);

} // namespace stemdde
