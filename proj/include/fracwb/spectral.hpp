#pragma once

// Jordan systems of B = W^{-1}, biorthogonal duals, operator functions
// phi(W) = sum c_n W^n and the root-vector series solution of
// D^{1/a}_- u = phi(W) u, u(0) = f.

#include "fracwb/frac1d.hpp"
#include "fracwb/opmatrix.hpp"

#include <map>
#include <optional>

namespace fracwb {

/// Chain extraction failure; names the offending eigenvalue cluster.
class JordanError : public std::runtime_error {
public:
    JordanError(const std::string& what, std::size_t cluster, double residual)
        : std::runtime_error(what), cluster_(cluster), residual_(residual) {}
    std::size_t cluster() const { return cluster_; }
    double residual() const { return residual_; }

private:
    std::size_t cluster_;
    double residual_;
};

struct JordanChain {
    std::size_t cluster = 0;
    /// Column indices of e_{q}, e_{q+1}, ..., e_{q+k}; (B - mu) e_{q+i} = e_{q+i-1}.
    std::vector<Eigen::Index> columns;
    std::size_t k() const { return columns.size() - 1; }
};

struct JordanSystem {
    std::vector<cplx> mu;     ///< eigenvalue of B per cluster
    std::vector<cplx> lambda; ///< characteristic number 1/mu, ordered by modulus
    std::vector<std::size_t> multiplicity; ///< geometric multiplicity m(q)
    std::vector<JordanChain> chains;       ///< grouped by cluster
    CMat E;                  ///< major vectors (columns)
    CMat G;                  ///< biorthogonal vectors g_n (columns), empty until constructed
    RVecE w;                 ///< inner-product weights
    std::vector<std::size_t> blocks; ///< cluster offsets N_nu; last entry = cluster count
    double condition = 0.0;  ///< cond(E)
    double chain_residual = 0.0;
    double max_cross_pairing = 0.0; ///< max |<e_i, g_j>| across distinct clusters
    double min_pairing = 0.0;       ///< min |<e_{q+i}, g_{q+k-i}>|
};

/// Generic path: cluster eigenvalues of W^{-1} within tol and extract chains.
JordanSystem jordan_decompose(const OpMatrix& W, double tol = 1e-4);
/// Exact path: W = V J V^{-1} with J in Jordan form (ones on the superdiagonal).
JordanSystem jordan_decompose(const OpMatrix& W, const CMat& V, const CMat& J);

/// Fills sys.G with the duals g_{q+k-i} of e_{q+i} and audits the pairing.
void biorthogonal_construct(JordanSystem& sys, const OpMatrix& W);

/// Groups clusters by decades of |lambda|.
std::vector<std::size_t> modulus_decade_blocks(const std::vector<cplx>& lambda);

struct GrowthCertificate {
    double theta0 = 0.0; ///< ray arg z = theta_0
    double H = 0.0;      ///< H(theta_0)
    double varrho = 0.0;
    double zeta = 0.0;  ///< sector semi-angle of the image
};

struct OperatorFunction {
    std::map<int, cplx> coeffs; ///< c_n, n from l to k
    double theta = 0.0;         ///< semi-angle of the sector containing the numerical range of W
    std::optional<GrowthCertificate> growth;
    bool infinite_regular = false; ///< the table truncates an infinite regular part

    cplx operator()(cplx z) const;
    /// sum c_n W^n with negative powers through W^{-1}.
    CMat apply(const CMat& W) const;
    int lowest() const;
    int highest() const;
    void validate() const;
};

/// H_j(phi^a, z, t): Taylor coefficient of e^{-phi^a(1/zeta) t} at zeta = 1/z
/// times e^{phi^a(z) t}. `power` is the pointwise principal power a.
cplx H_j(const OperatorFunction& phi, cplx z, double t, int j, double power = 1.0);
/// All of H_0..H_jmax in one pass.
std::vector<cplx> H_series(const OperatorFunction& phi, cplx z, double t, int jmax, double power = 1.0);

/// Block A_nu(phi^a, t) f.
CVecE block_A_nu(const JordanSystem& sys, const OperatorFunction& phi, double t, const CVecE& f,
                 std::size_t nu, double power = 1.0);

struct SectorReport {
    bool pass = false;
    int witness = 0;
    double value = 0.0; ///< max_n (|arg c_n| + n theta)
};
SectorReport sector_check(const OperatorFunction& phi, double theta);

struct GrowthReport {
    bool pass = false;
    double C = 0.0;
    double min_re = 0.0;
    std::vector<double> radii;
    std::vector<double> re_phi;
};
/// Audits Re phi(z) > C exp(H r^varrho) on arg z = theta0 with H, varrho from phi.growth.
GrowthReport growth_check(const OperatorFunction& phi, double theta0, const std::vector<double>& ray_samples);

struct CauchyProblem {
    OpMatrix W;
    OperatorFunction phi;
    double alpha = 1.0; ///< time order parameter; the derivative has order 1/alpha
    CVecE f;
    std::vector<double> times;
    double tol = 1e-14;        ///< series truncation tolerance
    double jordan_tol = 1e-4;
    std::optional<std::pair<CMat, CMat>> structure; ///< exact (V, J) if known

    void validate() const;
};

struct SeriesSolution {
    std::vector<double> times;
    std::vector<CVecE> values;
    std::vector<std::vector<double>> block_norms;  ///< per time
    std::vector<std::vector<double>> partial_sums; ///< running sum of block norms
    std::vector<std::size_t> truncation;           ///< blocks used per time
    JordanSystem system;
    SectorReport sector;
};

SeriesSolution solve_cauchy(const CauchyProblem& problem);
void write_csv(std::ostream& os, const SeriesSolution& s);

struct ResidualReport {
    std::vector<double> audit_times;
    std::vector<double> residuals;
    double max_residual = 0.0;
    double tail_bound = 0.0;
    std::vector<std::string> warnings;
};
/// Needs a uniform time grid from 0. Audits t in [lo_frac T, hi_frac T].
ResidualReport residual_check(const SeriesSolution& sol, const CauchyProblem& problem, double lo_frac = 0.1,
                              double hi_frac = 0.5);

struct UniquenessReport {
    double min_re = 0.0;
    double theta = 0.0;
    bool accretive = false;
    std::string note;
};
UniquenessReport uniqueness_diagnostic(const CauchyProblem& problem);

} // namespace fracwb
