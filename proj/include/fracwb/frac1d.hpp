#pragma once

// One-dimensional Riemann-Liouville integrals and Marchaud derivatives on an
// interval, plus the right-sided Riemann-Liouville derivative in time used by
// the Cauchy solver diagnostics.

#include "fracwb/grid.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace fracwb {

struct FracParams {
    double alpha = 0.5;
    double epsilon = 1e-2;
    double p = 2.0;

    void validate() const;
};

/// Controls the epsilon -> 0 protocol of the Marchaud limit.
struct LimitOptions {
    double eps0 = 0.0;    ///< first truncation radius; 0 picks length/8
    double tol = 1e-10;   ///< Cauchy tolerance on successive L_p distances (relative)
    double p = 2.0;
    int k_max = 40;
    /// Below eps = 2h the truncated integral is finished exactly on the
    /// piecewise-linear interpolant (eps = 0). When false the sequence stops at
    /// the 2h floor and may report non-convergence.
    bool subgrid_limit = true;
};

struct LimitReport {
    std::vector<double> eps;
    std::vector<double> distances;
    double achieved_eps = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    bool used_subgrid_limit = false;
};

struct DerivResult {
    GridFn value;
    LimitReport report;
};

GridFn rl_integral_left(const GridFn& f, double alpha);
GridFn rl_integral_right(const GridFn& f, double alpha);

/// Difference integral psi^+_eps (both branches), node r = 0 flagged NaN.
GridFn psi_left(const GridFn& f, const FracParams& params);
GridFn psi_right(const GridFn& f, const FracParams& params);

GridFn marchaud_trunc_left(const GridFn& f, const FracParams& params);
GridFn marchaud_trunc_right(const GridFn& f, const FracParams& params);

/// Marchaud limit. Throws ConvergenceError (carrying the distance sequence)
/// when the protocol fails to settle.
DerivResult marchaud_deriv_left(const GridFn& f, double alpha, const LimitOptions& opts = {});
DerivResult marchaud_deriv_right(const GridFn& f, double alpha, const LimitOptions& opts = {});

/// I^sigma_{0+} rho D^gamma_{d-} f.
DerivResult weighted_composition(const GridFn& f, double sigma, double gamma, const GridFn& rho,
                                 const LimitOptions& opts = {});

/// Mirror image about the interval midpoint.
GridFn reflect(const GridFn& f);

// ---------------------------------------------------------------------------
// Right-sided time derivative D^{beta}_- on [0, T] with exponential tail.

struct TimeSeries {
    double dt = 0.0;
    std::vector<CVec> samples; ///< samples[j] = u(j*dt), all the same length
};

struct TimeDerivOptions {
    double tail_fraction = 0.1;   ///< window used to fit the decay rate
    double tail_tolerance = 1e-6; ///< warn when tail share exceeds this
    bool extrapolate_tail = true;
};

struct TimeDerivResult {
    std::vector<CVec> values;
    double tail_rate = 0.0;  ///< fitted exponential decay rate
    double tail_bound = 0.0; ///< max relative share of the extrapolated tail
    std::string tail_policy;
    std::vector<std::string> warnings;
};

/// beta = 1 gives -du/dt; beta = 0 is the identity.
TimeDerivResult frac_time_deriv(const TimeSeries& u, double beta, const TimeDerivOptions& opts = {});

/// Scaled upper incomplete gamma e^x * Gamma(a, x), a > 0, stable for large x.
double scaled_upper_gamma(double a, double x);

// ---------------------------------------------------------------------------

/// Geometric epsilon protocol shared by the 1D and directional derivatives.
/// `eval(eps)` returns the truncated operator (eps = 0 is the interpolant
/// limit); `dist(a, b)` and `norm(a)` measure in the audit norm.
template <class T, class Eval, class Dist, class Norm>
std::pair<T, LimitReport> run_eps_limit(Eval&& eval, Dist&& dist, Norm&& norm, double h,
                                        double length, const LimitOptions& opts) {
    LimitReport rep;
    const double floor_eps = 2.0 * h;
    double eps = opts.eps0 > 0.0 ? opts.eps0 : length / 8.0;
    if (eps < floor_eps) eps = floor_eps;
    T prev = eval(eps);
    rep.eps.push_back(eps);
    for (int k = 1; k <= opts.k_max; ++k) {
        double next_eps = eps / 2.0;
        if (next_eps < floor_eps) {
            if (!opts.subgrid_limit) break;
            T lim = eval(0.0);
            double d = dist(lim, prev);
            rep.eps.push_back(0.0);
            rep.distances.push_back(d);
            rep.achieved_eps = 0.0;
            rep.converged = std::isfinite(d);
            rep.used_subgrid_limit = true;
            return {std::move(lim), rep};
        }
        T cur = eval(next_eps);
        double d = dist(cur, prev);
        rep.eps.push_back(next_eps);
        rep.distances.push_back(d);
        eps = next_eps;
        if (d <= opts.tol * std::max(norm(cur), 1e-300)) {
            rep.achieved_eps = eps;
            rep.converged = true;
            return {std::move(cur), rep};
        }
        prev = std::move(cur);
    }
    throw ConvergenceError("Marchaud limit did not converge above eps = 2h", rep.distances);
}

} // namespace fracwb
