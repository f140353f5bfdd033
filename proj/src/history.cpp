#include "stemdde/history.hpp"

#include "stemdde/errors.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace stemdde {

namespace {
constexpr double kSpliceTol = 1e-10;

void format_double(std::ostream& os, double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    os << buf;
}
} // namespace

HistorySegment::HistorySegment(PiecewiseHermite data) : data_(std::move(data)) {
    if (data_.t_back() != 0.0)
        throw std::invalid_argument("HistorySegment: last knot must be 0 exactly");
    if (!(data_.t_front() < 0.0))
        throw std::invalid_argument("HistorySegment: first knot must be -h < 0");
}

HistorySegment HistorySegment::constant(int dim, double h, std::array<double, 2> value) {
    if (!(h > 0.0)) throw std::invalid_argument("HistorySegment: h must be positive");
    std::vector<double> knots{-h, 0.0};
    std::vector<std::array<double, 2>> vals{value, value};
    std::vector<std::array<double, 2>> ders{{0.0, 0.0}, {0.0, 0.0}};
    return HistorySegment(PiecewiseHermite(dim, std::move(knots), std::move(vals), std::move(ders)));
}

namespace {
HistorySegment sample_uniform(int dim, double h, int m,
                              const std::function<std::array<double, 2>(double)>& f,
                              const std::function<std::array<double, 2>(double)>& fprime) {
    if (!(h > 0.0)) throw std::invalid_argument("from_function: h must be positive");
    if (m < 2) throw std::invalid_argument("from_function: m must be >= 2");
    std::vector<double> knots(static_cast<std::size_t>(m) + 1);
    std::vector<std::array<double, 2>> vals(knots.size()), ders(knots.size());
    for (int i = 0; i <= m; ++i) {
        const double t = (i == m) ? 0.0 : -h + h * static_cast<double>(i) / m;
        knots[static_cast<std::size_t>(i)] = t;
        vals[static_cast<std::size_t>(i)] = f(t);
        ders[static_cast<std::size_t>(i)] = fprime(t);
    }
    knots.front() = -h;
    return HistorySegment(PiecewiseHermite(dim, std::move(knots), std::move(vals), std::move(ders)));
}
} // namespace

HistorySegment HistorySegment::from_function(double h, int m,
                                             const std::function<double(double)>& f,
                                             const std::function<double(double)>& fprime) {
    return sample_uniform(1, h, m,
                          [&](double t) { return std::array<double, 2>{f(t), 0.0}; },
                          [&](double t) { return std::array<double, 2>{fprime(t), 0.0}; });
}

HistorySegment HistorySegment::from_function2(
    double h, int m, const std::function<std::array<double, 2>(double)>& f,
    const std::function<std::array<double, 2>(double)>& fprime) {
    return sample_uniform(2, h, m, f, fprime);
}

std::array<double, 2> HistorySegment::evaluate(double theta) const {
    return data_.eval_all(theta);
}

std::array<double, 2> HistorySegment::derivative(double theta) const {
    return data_.slope_all(theta);
}

SegmentNorms HistorySegment::norms() const {
    SegmentNorms n;
    n.sup_norm = data_.sup_norm();
    n.c1_norm = n.sup_norm + data_.deriv_sup_norm();
    return n;
}

HistorySegment HistorySegment::append_step(const HermitePiece& piece) const {
    if (piece.dt < 0.0) throw std::invalid_argument("append_step: negative step length");
    if (piece.dt > h()) throw std::invalid_argument("append_step: step longer than the horizon");
    const auto right_v = data_.value_at_knot(data_.knot_count() - 1);
    const auto right_d = data_.deriv_at_knot(data_.knot_count() - 1);
    for (int c = 0; c < dim(); ++c) {
        if (std::abs(piece.v0[c] - right_v[c]) > kSpliceTol) {
            std::ostringstream os;
            os << "append_step: value splice mismatch in component " << c << ": segment "
               << right_v[c] << " vs piece " << piece.v0[c];
            throw ContinuityError(os.str());
        }
        if (std::abs(piece.d0[c] - right_d[c]) > kSpliceTol) {
            std::ostringstream os;
            os << "append_step: derivative splice mismatch in component " << c << ": segment "
               << right_d[c] << " vs piece " << piece.d0[c];
            throw ContinuityError(os.str());
        }
    }
    if (piece.dt == 0.0) return *this;

    const double hh = h();
    const double cut = -hh + piece.dt; // old-time coordinate of the new -h
    std::vector<double> knots;
    std::vector<std::array<double, 2>> vals, ders;
    const double knot_tol = 1e-14 * std::max(1.0, hh);

    knots.push_back(-hh);
    if (std::abs(data_.t_front() - cut) <= knot_tol) {
        vals.push_back(data_.value_at_knot(0));
        ders.push_back(data_.deriv_at_knot(0));
    } else {
        // Exact restriction: a cubic re-sampled at an interior point stays
        // the same cubic on the remaining interval.
        vals.push_back(data_.eval_all(cut));
        ders.push_back(data_.slope_all(cut));
    }
    for (std::size_t i = 0; i < data_.knot_count(); ++i) {
        const double nk = data_.knot(i) - piece.dt;
        if (nk <= -hh + knot_tol) continue;
        knots.push_back(nk);
        vals.push_back(data_.value_at_knot(i));
        ders.push_back(data_.deriv_at_knot(i));
    }
    // knots.back() is now -piece.dt (image of the old 0); append the new piece.
    knots.push_back(0.0);
    vals.push_back(piece.v1);
    ders.push_back(piece.d1);
    return HistorySegment(PiecewiseHermite(dim(), std::move(knots), std::move(vals), std::move(ders)));
}

HistorySegment HistorySegment::component(int c) const {
    if (c < 0 || c >= dim()) throw std::invalid_argument("component: index out of range");
    std::vector<double> knots(data_.knots());
    std::vector<std::array<double, 2>> vals(data_.knot_count()), ders(data_.knot_count());
    for (std::size_t i = 0; i < data_.knot_count(); ++i) {
        vals[i] = {data_.value_at_knot(i)[static_cast<std::size_t>(c)], 0.0};
        ders[i] = {data_.deriv_at_knot(i)[static_cast<std::size_t>(c)], 0.0};
    }
    return HistorySegment(PiecewiseHermite(1, std::move(knots), std::move(vals), std::move(ders)));
}

void HistorySegment::dump_csv(std::ostream& os) const {
    os << "knot_t";
    for (int c = 0; c < dim(); ++c) os << ",value" << c;
    for (int c = 0; c < dim(); ++c) os << ",deriv" << c;
    os << "\n";
    for (std::size_t i = 0; i < data_.knot_count(); ++i) {
        format_double(os, data_.knot(i));
        for (int c = 0; c < dim(); ++c) {
            os << ',';
            format_double(os, data_.value_at_knot(i)[static_cast<std::size_t>(c)]);
        }
        for (int c = 0; c < dim(); ++c) {
            os << ',';
            format_double(os, data_.deriv_at_knot(i)[static_cast<std::size_t>(c)]);
        }
        os << "\n";
    }
}

HistorySegment HistorySegment::load_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("segment csv: empty stream");
    int dim = 0;
    if (line.find("value1") != std::string::npos)
        dim = 2;
    else if (line.find("value0") != std::string::npos)
        dim = 1;
    else
        throw ConfigError("segment csv: bad header: " + line);

    std::vector<double> knots;
    std::vector<std::array<double, 2>> vals, ders;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != static_cast<std::size_t>(1 + 2 * dim))
            throw ConfigError("segment csv: wrong column count in row: " + line);
        knots.push_back(row[0]);
        std::array<double, 2> v{}, d{};
        for (int c = 0; c < dim; ++c) {
            v[static_cast<std::size_t>(c)] = row[static_cast<std::size_t>(1 + c)];
            d[static_cast<std::size_t>(c)] = row[static_cast<std::size_t>(1 + dim + c)];
        }
        vals.push_back(v);
        ders.push_back(d);
    }
    return HistorySegment(PiecewiseHermite(dim, std::move(knots), std::move(vals), std::move(ders)));
}

} // namespace stemdde
