#pragma once

// Operator calculus on discretized operators: numerical range and resolvent
// audits, the shift generator, Balakrishnan fractional powers, the transform
// J*GJ + F J^a and the elliptic / perturbed assemblies on tensor grids.

#include "fracwb/frac1d.hpp"
#include "fracwb/grid.hpp"
#include "fracwb/opmatrix.hpp"
#include "fracwb/raymesh.hpp"

#include <functional>
#include <optional>

namespace fracwb {

struct AccretivityReport {
    double min_re = 0.0;          ///< gamma_L, min Re of the Rayleigh quotient
    std::vector<cplx> samples;    ///< sampled (Af, f)/|f|^2
    double vertex = 0.0;          ///< sector vertex iota
    double theta = 0.0;           ///< semi-angle about iota
    bool sectorial = false;       ///< theta < pi/2
    std::vector<double> lambdas;  ///< resolvent audit grid
    std::vector<double> resolvent_scaled; ///< lambda |(A + lambda)^{-1}|, must be <= 1
    bool resolvent_pass = true;
    bool pass = false;
};

/// Rayleigh quotients over `count` random probes, eigenvector probes and the
/// numerical-range boundary. The vertex defaults to 0 when gamma_L >= 0 and
/// to 2 gamma_L otherwise.
AccretivityReport numerical_range_sample(const OpMatrix& A, std::size_t count, unsigned seed = 1,
                                         std::optional<double> vertex = std::nullopt);

/// Resolvent bound |(A + lambda)^{-1}| <= 1/lambda on the grid.
AccretivityReport m_accretive_check(const OpMatrix& A, const std::vector<double>& lambda_grid);

/// Forward: (Af)_j = (f_j - f_{j+1})/h, zero beyond the last node; generates
/// T_t f(x) = f(x + t). Backward: (Af)_j = (f_j - f_{j-1})/h, zero before the
/// first node; generates f(x - t).
enum class Orientation { Forward, Backward };

/// Weights are the rectangle weights h.
OpMatrix shift_generator(std::size_t nodes, double h, Orientation o = Orientation::Forward);
OpMatrix shift_generator(const IntervalGrid& grid, Orientation o = Orientation::Forward);
OpMatrix shift_generator(const RayMesh& mesh, std::size_t ray, Orientation o = Orientation::Forward);

enum class PowerSign { Positive, Negative };

struct PowerOptions {
    double tail_tol = 1e-12;
    double panel_width = 1.5; ///< in s = log(lambda)
    int max_panels = 4000;
    bool check_accretive = true;
};

struct PowerResult {
    OpMatrix value;
    double error_estimate = 0.0; ///< 32- vs 16-point panel difference plus tail
    int panels = 0;
};

struct PowerApplyResult {
    CVecE value;
    double error_estimate = 0.0;
    int panels = 0;
};

/// A^a or A^{-a}, 0 < a < 1, by (sin a pi / pi) int lambda^{a-1} (lambda + A)^{-1} A
/// (resp. lambda^{-a} (lambda + A)^{-1}) with lambda = e^s.
PowerResult balakrishnan_power(const OpMatrix& A, double alpha, PowerSign sign = PowerSign::Positive,
                               const PowerOptions& opts = {});
/// Same quadrature applied to one vector; banded triangular A is solved by substitution.
PowerApplyResult balakrishnan_apply(const OpMatrix& A, const CVecE& f, double alpha,
                                    PowerSign sign = PowerSign::Positive, const PowerOptions& opts = {});

struct NegPowerReport {
    double actual = 0.0; ///< |J^{-a}|
    double bound = 0.0;  ///< 2 (1-a)^{-1} |J^{-1}| + a^{-1}
    bool pass = true;
    bool skipped = false;
    std::string notice;
};
NegPowerReport neg_power_bound_check(const OpMatrix& J, double alpha);

struct TransformResult {
    OpMatrix Z;
    double gamma_G = 0.0;
    double norm_J_inv = 0.0;
    double norm_F = 0.0;
    double C_verbatim = 0.0; ///< 2 (1-a)^{-1} |J^{-1}| + a^{-1}
    double C_swapped = 0.0;  ///< 2 a^{-1} |J^{-1}| + (1-a)^{-1}, bounds |J^{a-1}|
    bool condition_verbatim = false;
    bool condition_swapped = false;
    std::string binding;     ///< which constant gives the stricter condition
    double coercivity = 0.0; ///< min Re(Zf, f)/|Jf|^2, exact
    std::vector<std::string> warnings;
};
/// J*GJ + F J^a; a = 0 uses J^0 = I.
TransformResult transform_Z(const OpMatrix& J, const OpMatrix& G, const OpMatrix& F, double alpha);

struct H1H2Report {
    double C1 = 0.0; ///< sup |(Lf, g)| / (|f|_+ |g|_+)
    double C2 = 0.0; ///< inf Re(Lf, f) / |f|_+^2
    double probe_C1 = 0.0;
    double probe_C2 = 0.0;
    bool pass = false;
};
/// |f|_+ = |E f|. Constants are exact via the congruence E^{-*} L E^{-1};
/// probe estimates are reported alongside.
H1H2Report h1h2_verify(const OpMatrix& L, const OpMatrix& E, std::size_t probes = 200, unsigned seed = 3);

// ---------------------------------------------------------------------------
// Tensor grids on the cube [lo, lo + 1]^n with m interior nodes per axis.

struct GeneratorSystem {
    int dim = 1;
    std::size_t m = 0;
    double lo = 1.0;
    double h = 0.0;
    std::vector<std::vector<double>> points; ///< P_i on the boundary
    std::vector<std::vector<double>> frames; ///< constant directions e_i
    std::vector<OpMatrix> generators;        ///< forward shift along e_i (axis frames only)
    double delta = 0.0;                      ///< det of the point matrix

    /// Axis-aligned frames, P_i the centre of the face x_i = lo.
    static GeneratorSystem axis(int dim, std::size_t m, double lo = 1.0);
    /// Custom constant frames for the norm-equivalence audit (no generators).
    static GeneratorSystem with_frames(std::vector<std::vector<double>> frames,
                                       std::vector<std::vector<double>> points, std::size_t m, double lo = 1.0);

    std::size_t size() const;
    std::vector<double> node(std::size_t idx) const;
    RVecE weights() const;
    OpMatrix energy_root() const; ///< (sum A_i* A_i)^{1/2}
};

struct EllipticCoeffs {
    std::function<double(const std::vector<double>&, int, int)> a; ///< a^{ij}(x)
    double gamma_a = 0.0; ///< claimed ellipticity constant
};

struct EllipticResult {
    OpMatrix T;                 ///< -T = (1/n) sum A_i* G_i A_i
    std::vector<OpMatrix> G;
    double coercivity = 0.0;    ///< min Re(-Tf, f)/|f|^2_{h_A}
    double continuity = 0.0;    ///< |(-T f, g)| / (|f| |g|) in h_A
};

/// Throws std::domain_error when the ellipticity audit fails and
/// std::invalid_argument when a^{ij} is not diagonal in the frame.
/// `constants = false` skips the coercivity / continuity computation.
EllipticResult elliptic_assemble(const EllipticCoeffs& c, const GeneratorSystem& sys, bool constants = true);

/// Direct non-conservative stencil -sum_i (a^{ii} f_ii + d_i a^{ii} f_i).
OpMatrix divergence_stencil(const EllipticCoeffs& c, const GeneratorSystem& sys);

/// Smooth probes vanishing to third order on the cube boundary.
std::vector<CVecE> smooth_probes(const GeneratorSystem& sys, std::size_t count, unsigned seed = 5);

struct PerturbedResult {
    OpMatrix L;          ///< -T + I^sigma_{0+} rho D^gamma_{d-}
    OpMatrix elliptic;   ///< -T
    OpMatrix F;          ///< (L - (-T)) (A_1^gamma)^{-1}
    OpMatrix A1_power;   ///< A_1^gamma
    double representation_residual = 0.0; ///< |(-T) + F A_1^gamma - L| / |L|
};

/// The fractional term acts along e_1 line by line.
PerturbedResult perturbed_assemble(const EllipticCoeffs& c, const GeneratorSystem& sys,
                                   const std::function<double(const std::vector<double>&)>& rho,
                                   double sigma, double gamma_ord, const LimitOptions& opts = {});

/// Smallest scale s in [lo, hi] (bisection) such that the assembly with
/// coefficients s * a passes h1h2_verify against the h_A energy norm.
double h1h2_threshold(const EllipticCoeffs& base, const GeneratorSystem& sys,
                      const std::function<double(const std::vector<double>&)>& rho, double sigma,
                      double gamma_ord, double lo, double hi, int iters = 30);

struct NormEquivReport {
    double c1 = 0.0, c2 = 0.0;             ///< frame bounds (exact, constant frames)
    double probe_min = 0.0, probe_max = 0.0;
    double frame_det = 0.0;
    double hA_lower = 0.0, hA_upper = 0.0; ///< |f|_{h_A}^2 / |f|_{H^1_0}^2 extremes, exact
    double hA_probe_min = 0.0, hA_probe_max = 0.0;
    bool pass = false;
};
NormEquivReport direction_norm_equivalence(const GeneratorSystem& sys, std::size_t probes = 200, unsigned seed = 9);

} // namespace fracwb
