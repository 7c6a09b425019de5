#pragma once

// Directional fractional calculus on a convex domain discretized by rays from
// a boundary point P. Every operation acts ray by ray; in dimension one the
// interval mesh reproduces the frac1d operators on the offset nodes x_j - a.

#include "fracwb/frac1d.hpp"
#include "fracwb/raymesh.hpp"

namespace fracwb {

struct DirResult {
    RayFn value;
    LimitReport report;
    /// Rays on which epsilon >= d(e), so only the closed-form branch was used.
    std::vector<std::size_t> closed_form_rays;
};

/// (1/G(a)) int_0^r f(P+te) (r-t)^{a-1} (t/r)^{n-1} dt.
RayFn dir_integral_left(const RayFn& f, double alpha);
/// (1/G(a)) int_r^d f(P+te) (t-r)^{a-1} dt.
RayFn dir_integral_right(const RayFn& f, double alpha);
/// dir_integral_left(mu f) for real-valued mu.
RayFn dir_integral_weighted(const RayFn& f, double alpha, const RayFn& mu);
RayFn dir_integral_weighted(const RayFn& f, double alpha, const DirWeight& mu);

DirResult psi_plus(const RayFn& f, const FracParams& params);
DirResult psi_minus(const RayFn& f, const FracParams& params);

/// Truncated left derivative (1/G(1-a)) f r^{-a} + (a/G(1-a)) psi^+_eps f and
/// its limit. The node r = 0 is NaN.
DirResult dir_marchaud_trunc_left(const RayFn& f, const FracParams& params);
DirResult dir_marchaud_left(const RayFn& f, double alpha, const LimitOptions& opts = {});

/// Kipriyanov operator
/// (a/G(1-a)) int_0^r [f(Q) - f(T)] (r-t)^{-a-1} (t/r)^{n-1} dt + C_n f(Q) r^{-a}.
DirResult kipriyanov_apply(const RayFn& f, double alpha, const LimitOptions& opts = {});

/// phi^+_eps f = (1/G(1-a)) (f r^{-a} + a psi^+_eps f); equals f eps^{-a}/G(1-a) for r < eps.
RayFn representation_approximant(const RayFn& f, const FracParams& params);

/// Split of ||I^a phi^+_eps f - f||_p^p into the regions d(e) >= eps, r >= eps (I1),
/// d(e) >= eps, r < eps (I2) and d(e) < eps (I3).
struct RepresentationSplit {
    double I1 = 0.0, I2 = 0.0, I3 = 0.0;
    double error = 0.0; ///< (I1 + I2 + I3)^{1/p}
};
RepresentationSplit representation_error(const RayFn& f, const FracParams& params);

/// Auxiliary kernel (sin a pi / pi) (t_+^a - (t-1)_+^a) / t; +inf at t = 0.
double kernel_K(double t, double alpha);
/// int_0^inf K(t) dt by the analytic (0,1) part plus tanh-sinh on (1, inf).
double kernel_integral(double alpha);

struct KipConstants {
    double C_n_alpha = 0.0;   ///< (n-1)!/G(n-a)
    double C_alpha_rho = 0.0; ///< accretivity constant
    double C_alpha_d = 0.0;   ///< d^a / G(a+1)
    bool coercive = true;     ///< false when the general formula is <= 0
};

double kipriyanov_C(int n, double alpha);
/// Requires lambda > alpha. The monotone flag selects the Lipschitz-free formula.
double accretivity_constant(double alpha, const DirWeight& rho, double diam, int n);
KipConstants kip_constants(double alpha, const DirWeight& rho, double diam, int n);

struct AccretivityAudit {
    std::vector<double> ratios; ///< Re(f, D f)_rho / ||f||^2_rho per suite member
    double min_ratio = 0.0;
    double constant = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Smooth functions vanishing on the boundary of a ball or square mesh.
std::vector<RayFn> accretivity_suite(const RayMeshPtr& mesh, std::size_t count = 20, unsigned seed = 11);
AccretivityAudit accretivity_check(const std::vector<RayFn>& suite, double alpha, const DirWeight& rho,
                                    double tol = 1e-3);

/// Finiteness smoke check of ||D^a f||_q over a suite.
struct MappingReport {
    std::vector<double> norms;
    bool finite = true;
};
MappingReport mapping_smoke_check(const std::vector<RayFn>& suite, double alpha, double q);

} // namespace fracwb
