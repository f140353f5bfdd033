#include "stemdde/sampler.hpp"

#include <random>
#include <stdexcept>
#include <vector>

namespace stemdde {

SegmentSampler::SegmentSampler(SamplerSpec spec, double h, double R_minus, std::uint64_t seed)
    : spec_(spec), h_(h), R_minus_(R_minus), seed_(seed) {
    if (!(h > 0.0)) throw std::invalid_argument("SegmentSampler: h must be positive");
    if (!(spec.value_hi > spec.value_lo))
        throw std::invalid_argument("SegmentSampler: empty value band");
    if (spec.knots < 2) throw std::invalid_argument("SegmentSampler: knots must be >= 2");
}

namespace {
// Per-draw generator: each draw is a pure function of (seed, counter).
std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t counter) {
    std::seed_seq seq{seed, counter, std::uint64_t{0x9e3779b97f4a7c15ULL}};
    return std::mt19937_64(seq);
}
} // namespace

HistorySegment SegmentSampler::draw() {
    std::uniform_real_distribution<double> val(spec_.value_lo, spec_.value_hi);
    std::uniform_real_distribution<double> der(-spec_.deriv_bound, spec_.deriv_bound);
    for (int tries = 0; tries < 1000; ++tries) {
        auto rng = rng_for(seed_, counter_++);
        std::vector<double> knots(static_cast<std::size_t>(spec_.knots) + 1);
        std::vector<std::array<double, 2>> vals(knots.size()), ders(knots.size());
        for (int i = 0; i <= spec_.knots; ++i) {
            knots[static_cast<std::size_t>(i)] =
                (i == spec_.knots) ? 0.0 : -h_ + h_ * static_cast<double>(i) / spec_.knots;
            vals[static_cast<std::size_t>(i)] = {val(rng), 0.0};
            ders[static_cast<std::size_t>(i)] = {der(rng), 0.0};
        }
        HistorySegment seg(PiecewiseHermite(1, std::move(knots), std::move(vals), std::move(ders)));
        if (seg.data().value_range(0).lo > R_minus_) return seg;
        ++rejected_;
    }
    throw std::runtime_error("SegmentSampler: 1000 consecutive out-of-domain draws");
}

HistorySegment SegmentSampler::draw_pair() {
    const HistorySegment a = draw();
    const HistorySegment b = draw();
    std::vector<double> knots(a.data().knots());
    std::vector<std::array<double, 2>> vals(knots.size()), ders(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) {
        vals[i] = {a.data().value_at_knot(i)[0], b.data().value_at_knot(i)[0]};
        ders[i] = {a.data().deriv_at_knot(i)[0], b.data().deriv_at_knot(i)[0]};
    }
    return HistorySegment(PiecewiseHermite(2, std::move(knots), std::move(vals), std::move(ders)));
}

HistorySegment SegmentSampler::draw_direction_smooth() {
    auto rng = rng_for(seed_, counter_++);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_real_distribution<double> der(-2.0 / h_, 2.0 / h_);
    std::vector<double> knots(static_cast<std::size_t>(spec_.knots) + 1);
    std::vector<std::array<double, 2>> vals(knots.size()), ders(knots.size());
    for (int i = 0; i <= spec_.knots; ++i) {
        knots[static_cast<std::size_t>(i)] =
            (i == spec_.knots) ? 0.0 : -h_ + h_ * static_cast<double>(i) / spec_.knots;
        vals[static_cast<std::size_t>(i)] = {val(rng), 0.0};
        ders[static_cast<std::size_t>(i)] = {der(rng), 0.0};
    }
    return HistorySegment(PiecewiseHermite(1, std::move(knots), std::move(vals), std::move(ders)));
}

} // namespace stemdde
