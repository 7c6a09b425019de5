#pragma once

#include "fracwb/types.hpp"

#include <iosfwd>
#include <memory>
#include <span>

namespace fracwb {

/// Ordered nodes a = x_0 < ... < x_M = b with trapezoidal weights.
class IntervalGrid {
public:
    static std::shared_ptr<const IntervalGrid> uniform(double a, double b, std::size_t intervals);
    static std::shared_ptr<const IntervalGrid> from_nodes(std::vector<double> nodes);

    double a() const { return nodes_.front(); }
    double b() const { return nodes_.back(); }
    double length() const { return b() - a(); }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

    /// True when spacing is constant to 1e-12 relative; enables Toeplitz kernels.
    bool is_uniform() const { return uniform_; }
    double spacing() const { return nodes_[1] - nodes_[0]; }

    /// Distances r_j = x_j - a from the left endpoint.
    std::vector<double> offsets_from_left() const;

private:
    explicit IntervalGrid(std::vector<double> nodes);

    std::vector<double> nodes_;
    std::vector<double> weights_;
    bool uniform_ = false;
};

using GridPtr = std::shared_ptr<const IntervalGrid>;

/// Complex samples on an IntervalGrid; zero outside [a, b].
class GridFn {
public:
    GridFn() = default;
    GridFn(GridPtr grid, CVec values);

    template <class F>
    static GridFn sample(GridPtr grid, F&& f) {
        CVec v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx(f(grid->nodes()[i]));
        return GridFn(std::move(grid), std::move(v));
    }

    const GridPtr& grid() const { return grid_; }
    const CVec& values() const { return values_; }
    CVec& values() { return values_; }
    std::size_t size() const { return values_.size(); }
    cplx operator[](std::size_t i) const { return values_[i]; }

    /// Piecewise-linear evaluation with zero extension outside the interval.
    cplx operator()(double x) const;

private:
    GridPtr grid_;
    CVec values_;
};

/// Discrete L_p norm (trapezoidal). skip_nonfinite_origin drops node 0 when
/// it carries the flagged singular value of a derivative.
double lp_norm(const GridFn& f, double p, bool skip_origin = false);
double lp_norm(std::span<const cplx> values, std::span<const double> weights, double p,
               std::size_t first = 0);

GridFn operator-(const GridFn& a, const GridFn& b);
GridFn operator+(const GridFn& a, const GridFn& b);
GridFn operator*(const GridFn& a, const GridFn& b);
GridFn operator*(cplx s, const GridFn& a);

/// CSV with header "node,re,im".
void write_csv(std::ostream& os, const GridFn& f);
GridFn read_csv(std::istream& is);

} // namespace fracwb
