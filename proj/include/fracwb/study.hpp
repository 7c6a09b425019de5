#pragma once

// Refinement studies shared by the CLI and the acceptance suite, with a
// log-log order fit.

#include "fracwb/opcalc.hpp"
#include "fracwb/spectral.hpp"

#include "json.hpp"

namespace fracwb {

struct OrderFit {
    double order = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0; ///< 95% Student-t interval on the slope
};

/// Least squares on log(err) = c + order log(h). Needs three or more positive points.
OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& err);

bool strictly_decreasing(const std::vector<double>& v);

struct StudyReport {
    std::string name;
    std::string axis_name;
    std::vector<double> axis;
    std::vector<double> values;
    std::optional<OrderFit> fit;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;

    void validate() const;
    nlohmann::json to_json() const;
    static StudyReport from_json(const nlohmann::json& j);
};

/// Power series sum_k a_k x^k on [0, 1] with a_0 = 0; D^a and I^a act termwise.
struct SeriesFn {
    std::string name;
    std::vector<double> a;

    double value(double x) const;
    double rl_derivative(double x, double alpha) const;
    double rl_integral(double x, double alpha) const;

    static SeriesFn linear();
    static SeriesFn expm1();
    static SeriesFn sine();
};

/// ||I^a u||_p <= C_{a,d} ||u||_p + delta(M) on [0, 1] for `count` random
/// polynomials; delta(M) is the largest discretization defect of the integral
/// norm. Passes when the bound holds at every level and the fitted order >= 1.
StudyReport integral_bound_study(double alpha, double p, const std::vector<std::size_t>& levels,
                                 std::size_t count = 200, unsigned seed = 21);

/// ||A^a f - D^a_{0+} f||_2 / ||D^a_{0+} f||_2 with A the backward shift
/// generator on M intervals of [0, 1].
StudyReport generator_bridge_study(double alpha, const SeriesFn& f, const std::vector<std::size_t>& levels,
                                   const PowerOptions& opts = {});

/// Weighted residual between (1/n) sum A_i* G_i A_i and the divergence-form
/// stencil over smooth probes, against h = 1/(m + 1).
StudyReport elliptic_order_study(int dim, bool variable, const std::vector<std::size_t>& levels);

/// ||I^a phi^+_eps f - f||_2 over eps = 2^{-k} for f = I^a g on `mesh`.
StudyReport representation_study(const RayMeshPtr& mesh, double alpha, const std::vector<int>& ks);

/// 6x6 W = V J V^{-1} with a two-chain, phi(z) = z; eigenvalues 1, 2 (double), 5, 30, 200.
CauchyProblem reference_cauchy_problem(double alpha, double dt, double T, unsigned seed = 4);

/// Max interior residual of the series solution under joint refinement of dt and T.
StudyReport residual_study(double alpha, const std::vector<double>& dts, const std::vector<double>& horizons,
                           double tolerance = 1e-2);

} // namespace fracwb
