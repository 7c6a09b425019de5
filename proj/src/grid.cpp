#include "fracwb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace fracwb {

IntervalGrid::IntervalGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    require(nodes_.size() >= 2, "IntervalGrid: need at least two nodes");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        require(nodes_[i] > nodes_[i - 1], "IntervalGrid: nodes must be strictly increasing");
    }
    weights_.assign(nodes_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        double h = nodes_[i + 1] - nodes_[i];
        weights_[i] += 0.5 * h;
        weights_[i + 1] += 0.5 * h;
    }
    double h0 = nodes_[1] - nodes_[0];
    uniform_ = std::all_of(nodes_.begin() + 1, nodes_.end(), [&, prev = nodes_[0]](double x) mutable {
        bool ok = std::abs((x - prev) - h0) <= 1e-9 * h0;
        prev = x;
        return ok;
    });
}

std::shared_ptr<const IntervalGrid> IntervalGrid::uniform(double a, double b, std::size_t intervals) {
    require(intervals >= 1, "IntervalGrid::uniform: empty grid");
    require(b > a, "IntervalGrid::uniform: need a < b");
    std::vector<double> x(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(intervals);
    }
    x.back() = b;
    return std::shared_ptr<const IntervalGrid>(new IntervalGrid(std::move(x)));
}

std::shared_ptr<const IntervalGrid> IntervalGrid::from_nodes(std::vector<double> nodes) {
    return std::shared_ptr<const IntervalGrid>(new IntervalGrid(std::move(nodes)));
}

std::vector<double> IntervalGrid::offsets_from_left() const {
    std::vector<double> r(nodes_.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = nodes_[i] - nodes_[0];
    return r;
}

GridFn::GridFn(GridPtr grid, CVec values) : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ != nullptr, "GridFn: null grid");
    require(values_.size() == grid_->size(), "GridFn: value count must equal node count");
}

cplx GridFn::operator()(double x) const {
    const auto& xs = grid_->nodes();
    if (x < xs.front() || x > xs.back()) return {0.0, 0.0};
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return values_.back();
    std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
    double s = (x - xs[k]) / (xs[k + 1] - xs[k]);
    return values_[k] + s * (values_[k + 1] - values_[k]);
}

double lp_norm(std::span<const cplx> values, std::span<const double> weights, double p,
               std::size_t first) {
    require(p >= 1.0, "lp_norm: p must be >= 1");
    double acc = 0.0;
    for (std::size_t i = first; i < values.size(); ++i) {
        acc += weights[i] * std::pow(std::abs(values[i]), p);
    }
    return std::pow(acc, 1.0 / p);
}

double lp_norm(const GridFn& f, double p, bool skip_origin) {
    return lp_norm(f.values(), f.grid()->weights(), p, skip_origin ? 1 : 0);
}

namespace {
template <class Op>
GridFn zip(const GridFn& a, const GridFn& b, Op op) {
    require(a.grid() == b.grid() || a.size() == b.size(), "GridFn: grid mismatch");
    CVec v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
    return GridFn(a.grid(), std::move(v));
}
} // namespace

GridFn operator-(const GridFn& a, const GridFn& b) { return zip(a, b, std::minus<>{}); }
GridFn operator+(const GridFn& a, const GridFn& b) { return zip(a, b, std::plus<>{}); }
GridFn operator*(const GridFn& a, const GridFn& b) { return zip(a, b, std::multiplies<>{}); }
GridFn operator*(cplx s, const GridFn& a) {
    CVec v(a.values());
    for (auto& x : v) x *= s;
    return GridFn(a.grid(), std::move(v));
}

void write_csv(std::ostream& os, const GridFn& f) {
    os << "node,re,im\n";
    char buf[96];
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", f.grid()->nodes()[i], f[i].real(),
                      f[i].imag());
        os << buf;
    }
}

GridFn read_csv(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "read_csv: empty input");
    std::vector<double> nodes;
    CVec values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        // strtod, unlike operator>>, accepts the "nan" written for singular nodes
        double v[3];
        const char* c = line.c_str();
        for (int k = 0; k < 3; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(c, &end);
            require(end != c, "read_csv: malformed row: " + line);
            c = end;
            if (k < 2) {
                require(*c == ',', "read_csv: malformed row: " + line);
                ++c;
            }
        }
        nodes.push_back(v[0]);
        values.emplace_back(v[1], v[2]);
    }
    return GridFn(IntervalGrid::from_nodes(std::move(nodes)), std::move(values));
}

} // namespace fracwb
