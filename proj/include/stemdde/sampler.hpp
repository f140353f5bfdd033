#pragma once

#include "stemdde/history.hpp"

#include <cstdint>

namespace stemdde {

/// Bounds of the C1-bounded random segment family drawn by SegmentSampler.
struct SamplerSpec {
    double value_lo = 0.2;
    double value_hi = 2.0;
    double deriv_bound = 1.0;
    int knots = 16; // intervals of the sampled Hermite grid
};

/// Seeded generator of random C1 history segments on [-h, 0] with knot
/// values in [value_lo, value_hi], knot derivatives in [-deriv_bound,
/// deriv_bound], and interpolant range inside I = (R_minus, inf). Draws
/// whose exact range leaves I are rejected and redrawn (counted).
class SegmentSampler {
public:
    SegmentSampler(SamplerSpec spec, double h, double R_minus, std::uint64_t seed);

    [[nodiscard]] HistorySegment draw();      // dim 1
    [[nodiscard]] HistorySegment draw_pair(); // dim 2, both components sampled

    /// A continuous derivative direction: smooth (Hermite) or piecewise
    /// linear with a kink at -h/2, values in [-1, 1]. Returned as a segment;
    /// for the kinked variant only the values are meaningful.
    [[nodiscard]] HistorySegment draw_direction_smooth();

    [[nodiscard]] long rejected() const { return rejected_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

private:
    SamplerSpec spec_;
    double h_;
    double R_minus_;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    long rejected_ = 0;
};

} // namespace stemdde
