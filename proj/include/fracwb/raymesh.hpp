#pragma once

// Discretization of a convex domain along rays issued from a boundary point P:
// Q = P + r e, r in [0, d(e)]. Directions carry solid-angle weights so that
// integral over Omega = sum_k w_k int_0^{d(e_k)} (.) r^{n-1} dr.

#include "fracwb/types.hpp"

#include "json.hpp"

#include <functional>
#include <memory>

namespace fracwb {

struct Ray {
    std::vector<double> direction; ///< unit vector e_k
    double weight = 0.0;           ///< solid-angle weight d chi_k
    double length = 0.0;           ///< d(e_k)
    std::vector<double> r;         ///< radial nodes 0 = r_0 < ... < r_M = d(e_k)
    std::vector<double> w;         ///< trapezoidal weights on r
};

class RayMesh {
public:
    using Membership = std::function<bool(const std::vector<double>&)>;

    /// n = 1: the interval [a, b] seen from P = a. Nodes are x_j - a.
    static std::shared_ptr<const RayMesh> interval(double a, double b, std::size_t intervals);
    static std::shared_ptr<const RayMesh> interval(const std::vector<double>& nodes);

    /// Ball of the given radius touching P = 0 with inward normal along the
    /// last axis. dim 2: `n_polar` directions; dim 3: n_polar x n_azimuth.
    static std::shared_ptr<const RayMesh> ball(int dim, double radius, int n_polar, int n_azimuth,
                                               std::size_t intervals);

    /// Square [0, side]^2 seen from P = (side/2, 0); `n_dir` directions split
    /// over the three corner-delimited angular sectors.
    static std::shared_ptr<const RayMesh> square(double side, int n_dir, std::size_t intervals);

    static std::shared_ptr<const RayMesh> from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    int dim() const { return dim_; }
    const std::vector<double>& origin() const { return P_; }
    const std::vector<Ray>& rays() const { return rays_; }
    std::size_t ray_count() const { return rays_.size(); }
    double diameter() const { return diam_; }
    const std::string& shape() const { return shape_; }

    std::vector<double> point(std::size_t ray, std::size_t node) const;
    std::vector<double> point(std::size_t ray, double r) const;

    /// Measure of the direction set entering the domain (half sphere).
    static double half_sphere_measure(int dim);
    double direction_measure() const;
    /// Volume by the mesh quadrature (integral of 1).
    double volume() const;
    bool membership_certified() const { return certified_; }

private:
    RayMesh() = default;
    void finalize(const Membership& inside);
    void validate() const;

    int dim_ = 1;
    std::vector<double> P_;
    std::vector<Ray> rays_;
    double diam_ = 0.0;
    std::string shape_;
    bool certified_ = false;
};

using RayMeshPtr = std::shared_ptr<const RayMesh>;

/// Complex samples per (ray, node); zero outside the closed domain.
class RayFn {
public:
    RayFn() = default;
    RayFn(RayMeshPtr mesh, std::vector<CVec> values);

    static RayFn zeros(RayMeshPtr mesh);

    /// Sample f(Q) at every mesh point.
    static RayFn sample(RayMeshPtr mesh, const std::function<cplx(const std::vector<double>&)>& f);
    /// Sample g(ray index, r) directly.
    static RayFn sample_radial(RayMeshPtr mesh, const std::function<cplx(std::size_t, double)>& g);

    const RayMeshPtr& mesh() const { return mesh_; }
    const std::vector<CVec>& values() const { return values_; }
    std::vector<CVec>& values() { return values_; }
    const CVec& ray(std::size_t k) const { return values_[k]; }

    RayFn operator-(const RayFn& o) const;
    RayFn operator+(const RayFn& o) const;
    RayFn operator*(const RayFn& o) const;
    RayFn scaled(cplx s) const;

private:
    RayMeshPtr mesh_;
    std::vector<CVec> values_;
};

/// L_p(Omega) norm with the ray quadrature; skip_origin drops the r = 0 node.
double lp_norm(const RayFn& f, double p, bool skip_origin = false);
/// (f, g)_{L_2(Omega, rho)}; rho may be null for the unweighted product.
cplx inner(const RayFn& f, const RayFn& g, const RayFn* rho = nullptr, bool skip_origin = false);

/// CSV keyed by (direction index, node index).
void write_csv(std::ostream& os, const RayFn& f);

/// Non-negative weight rho with Lip-lambda data.
struct DirWeight {
    RayFn rho;
    double lambda = 1.0;
    double lipschitz = 0.0;
    bool monotone = false;

    /// Checks realness, non-negativity, the monotone flag along rays and the
    /// Lipschitz bound on `audit_pairs` random pairs. Throws on violation.
    void validate(std::size_t audit_pairs = 500, unsigned seed = 7) const;
    double inf_rho() const;
};

/// Gauss-Legendre rule on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

} // namespace fracwb
