#pragma once

#include "stemdde/hermite.hpp"

#include <array>
#include <functional>
#include <iosfwd>

namespace stemdde {

/// Segment norms in the sense used throughout: the sup norm takes the max
/// over components (max norm on R^dim), and the C1 norm adds the sup norm
/// of the derivative track.
struct SegmentNorms {
    double sup_norm = 0.0;
    double c1_norm = 0.0;
};

/// A C1 history segment phi on [-h, 0] with 1 or 2 components: the state
/// object of the semiflow. Immutable after construction; all operations
/// are pure and return fresh segments.
class HistorySegment {
public:
    /// Wrap an existing Hermite track; requires t_back == 0 exactly.
    explicit HistorySegment(PiecewiseHermite data);

    [[nodiscard]] static HistorySegment constant(int dim, double h, std::array<double, 2> value);

    /// Sample f and f' on a uniform grid of m intervals (m >= 2).
    [[nodiscard]] static HistorySegment
    from_function(double h, int m, const std::function<double(double)>& f,
                  const std::function<double(double)>& fprime);

    [[nodiscard]] static HistorySegment
    from_function2(double h, int m, const std::function<std::array<double, 2>(double)>& f,
                   const std::function<std::array<double, 2>(double)>& fprime);

    [[nodiscard]] int dim() const { return data_.dim(); }
    [[nodiscard]] double h() const { return -data_.t_front(); }

    /// Interpolated value / derivative at theta in [-h, 0] (1e-12 clamp tolerance).
    [[nodiscard]] std::array<double, 2> evaluate(double theta) const;
    [[nodiscard]] std::array<double, 2> derivative(double theta) const;
    /// Component-0 conveniences for dim-1 segments.
    [[nodiscard]] double evaluate1(double theta) const { return data_.eval(0, theta); }
    [[nodiscard]] double derivative1(double theta) const { return data_.slope(0, theta); }

    /// Exact sup and C1 norms of the interpolant (cubic critical points,
    /// not grid sampling).
    [[nodiscard]] SegmentNorms norms() const;

    /// Shift by piece.dt and append the piece at the right end; content older
    /// than -h is discarded (truncation is exact for the interpolant).
    /// The piece must splice C1: left value/derivative within 1e-10 of the
    /// segment's state at 0. A zero-length piece is the identity.
    [[nodiscard]] HistorySegment append_step(const HermitePiece& piece) const;

    /// Extract one component as a dim-1 segment (same knots).
    [[nodiscard]] HistorySegment component(int c) const;

    [[nodiscard]] const PiecewiseHermite& data() const { return data_; }

    /// Debug dump: CSV with columns knot_t, value[0..dim), deriv[0..dim).
    void dump_csv(std::ostream& os) const;
    [[nodiscard]] static HistorySegment load_csv(std::istream& is);

private:
    PiecewiseHermite data_;
};

} // namespace stemdde
