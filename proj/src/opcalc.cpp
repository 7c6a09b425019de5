#include "fracwb/opcalc.hpp"

#include "fracwb/product_rule.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace fracwb {

namespace {

CMat hermitian_part(const CMat& B) { return (B + B.adjoint()) / 2.0; }

double lambda_min_herm(const CMat& B) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(B), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

CVecE random_unit(Eigen::Index n, std::mt19937_64& gen) {
    std::normal_distribution<double> N01;
    CVecE v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(N01(gen), N01(gen));
    return v / v.norm();
}

cplx rayleigh(const CMat& B, const CVecE& v) { return v.dot(B * v) / v.squaredNorm(); }

} // namespace

AccretivityReport numerical_range_sample(const OpMatrix& A, std::size_t count, unsigned seed,
                                         std::optional<double> vertex) {
    require(count >= 1, "numerical_range_sample: need at least one probe");
    A.validate();
    const CMat B = A.unitary_form();
    const Eigen::Index n = B.rows();
    AccretivityReport rep;

    Eigen::SelfAdjointEigenSolver<CMat> hs(hermitian_part(B));
    rep.samples.push_back(rayleigh(B, hs.eigenvectors().col(0)));

    std::mt19937_64 gen(seed);
    for (std::size_t s = 0; s < count; ++s) rep.samples.push_back(rayleigh(B, random_unit(n, gen)));

    Eigen::ComplexEigenSolver<CMat> ces(B);
    for (Eigen::Index k = 0; k < n; ++k) rep.samples.push_back(rayleigh(B, ces.eigenvectors().col(k)));

    // Boundary of the numerical range: support points in 64 directions.
    for (int k = 0; k < 64; ++k) {
        const cplx rot = std::polar(1.0, 2.0 * kPi * k / 64.0);
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(rot * B));
        rep.samples.push_back(rayleigh(B, es.eigenvectors().col(n - 1)));
    }

    const double gamma = hs.eigenvalues()(0);
    rep.min_re = std::numeric_limits<double>::infinity();
    for (const auto& z : rep.samples) rep.min_re = std::min(rep.min_re, z.real());
    rep.min_re = std::min(rep.min_re, gamma);
    rep.vertex = vertex ? *vertex : (gamma >= 0.0 ? 0.0 : 2.0 * gamma);
    const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
    for (const auto& z : rep.samples) {
        const cplx d = z - rep.vertex;
        if (std::abs(d) <= 1e-14 * scale) continue;
        rep.theta = std::max(rep.theta, std::abs(std::arg(d)));
    }
    rep.sectorial = rep.theta < kPi / 2.0 - 1e-12;
    rep.pass = rep.min_re >= -1e-12 * scale;
    return rep;
}

AccretivityReport m_accretive_check(const OpMatrix& A, const std::vector<double>& lambda_grid) {
    require(!lambda_grid.empty(), "m_accretive_check: empty lambda grid");
    A.validate();
    const CMat B = A.unitary_form();
    AccretivityReport rep;
    rep.min_re = lambda_min_herm(B);
    rep.vertex = rep.min_re >= 0.0 ? 0.0 : 2.0 * rep.min_re;
    const CMat I = CMat::Identity(B.rows(), B.cols());
    for (double lam : lambda_grid) {
        require(lam > 0.0, "m_accretive_check: lambda grid must be positive");
        Eigen::JacobiSVD<CMat> svd(B + lam * I);
        const double smin = svd.singularValues()(svd.singularValues().size() - 1);
        const double scaled = smin > 0.0 ? lam / smin : std::numeric_limits<double>::infinity();
        rep.lambdas.push_back(lam);
        rep.resolvent_scaled.push_back(scaled);
        if (!(scaled <= 1.0 + 1e-12)) rep.resolvent_pass = false;
    }
    rep.pass = rep.resolvent_pass;
    return rep;
}

// ---------------------------------------------------------------------------

OpMatrix shift_generator(std::size_t nodes, double h, Orientation o) {
    require(nodes >= 1, "shift_generator: empty grid");
    require(h > 0.0, "shift_generator: spacing must be positive");
    const auto n = static_cast<Eigen::Index>(nodes);
    CMat A = CMat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        A(j, j) = 1.0 / h;
        if (o == Orientation::Forward && j + 1 < n) A(j, j + 1) = -1.0 / h;
        if (o == Orientation::Backward && j > 0) A(j, j - 1) = -1.0 / h;
    }
    return OpMatrix(std::move(A), RVecE::Constant(n, h), Provenance::Generator);
}

OpMatrix shift_generator(const IntervalGrid& grid, Orientation o) {
    require(grid.is_uniform(), "shift_generator: grid must be uniform");
    return shift_generator(grid.size(), grid.spacing(), o);
}

OpMatrix shift_generator(const RayMesh& mesh, std::size_t ray, Orientation o) {
    require(ray < mesh.ray_count(), "shift_generator: ray index out of range");
    const auto& r = mesh.rays()[ray].r;
    require(detail::uniformly_spaced(r), "shift_generator: radial nodes must be uniform");
    return shift_generator(r.size(), r[1] - r[0], o);
}

// ---------------------------------------------------------------------------

namespace {

struct GaussRule {
    std::vector<double> x, w;
};

const GaussRule& gauss_rule(int n) {
    static const GaussRule g32 = [] {
        GaussRule g;
        gauss_legendre(32, -1.0, 1.0, g.x, g.w);
        return g;
    }();
    static const GaussRule g16 = [] {
        GaussRule g;
        gauss_legendre(16, -1.0, 1.0, g.x, g.w);
        return g;
    }();
    return n == 32 ? g32 : g16;
}

template <class Obj>
double obj_norm(const Obj& x) {
    return x.norm();
}

// Integrates term(s) over the real line by panels grown outward from s0.
template <class Obj, class Term>
std::tuple<Obj, double, int> log_quadrature(Term&& term, double s0, const Obj& zero, const PowerOptions& opts) {
    const auto& g32 = gauss_rule(32);
    const auto& g16 = gauss_rule(16);
    const double hw = opts.panel_width / 2.0;
    Obj sum = zero;
    double err = 0.0;
    int panels = 0;
    std::vector<double> history;

    auto panel = [&](double a) {
        const double c = a + hw;
        Obj q32 = zero, q16 = zero;
        for (std::size_t i = 0; i < g32.x.size(); ++i) q32 += (g32.w[i] * hw) * term(c + hw * g32.x[i]);
        for (std::size_t i = 0; i < g16.x.size(); ++i) q16 += (g16.w[i] * hw) * term(c + hw * g16.x[i]);
        err += obj_norm<Obj>(q32 - q16);
        ++panels;
        return q32;
    };

    for (int side : {+1, -1}) {
        double prev = -1.0;
        for (int k = 0;; ++k) {
            if (panels >= opts.max_panels) {
                throw ConvergenceError("Balakrishnan quadrature: tail did not decay within the panel budget",
                                       history);
            }
            const double a = side > 0 ? s0 + k * opts.panel_width : s0 - (k + 1) * opts.panel_width;
            Obj q = panel(a);
            const double cur = obj_norm<Obj>(q);
            history.push_back(cur);
            sum += q;
            const double total = obj_norm<Obj>(sum);
            if (k >= 2 && prev >= 0.0) {
                if (cur == 0.0) break;
                const double ratio = cur / prev;
                if (ratio < 1.0) {
                    const double tail = cur * ratio / (1.0 - ratio);
                    if (tail <= opts.tail_tol * total) {
                        err += tail;
                        break;
                    }
                }
            }
            prev = cur;
        }
    }
    return {std::move(sum), err, panels};
}

void check_power_args(const OpMatrix& A, double alpha, const PowerOptions& opts) {
    require_domain(alpha > 0.0 && alpha < 1.0, "balakrishnan_power: alpha must lie in (0,1)");
    A.validate();
    if (opts.check_accretive && A.size() <= 400) {
        const CMat B = A.unitary_form();
        const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
        require_domain(lambda_min_herm(B) >= -1e-10 * scale, "balakrishnan_power: operator is not accretive");
    }
}

double spectral_centre(const CMat& A) {
    const double mu = std::abs(A.trace()) / static_cast<double>(A.rows());
    return mu > 0.0 ? std::log(mu) : 0.0;
}

// Substitution solver for (lambda + A) x = b when A is triangular with a narrow band.
struct BandedSolver {
    const CMat& A;
    Eigen::Index lower = 0, upper = 0;
    bool triangular = false;

    explicit BandedSolver(const CMat& a) : A(a) {
        const Eigen::Index n = A.rows();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (A(i, j) == cplx{}) continue;
                lower = std::max(lower, i - j);
                upper = std::max(upper, j - i);
            }
        }
        triangular = lower == 0 || upper == 0;
    }

    CVecE solve(double lam, const CVecE& b) const {
        const Eigen::Index n = A.rows();
        if (!triangular) {
            CMat M = A;
            M.diagonal().array() += lam;
            return M.partialPivLu().solve(b);
        }
        CVecE x(n);
        if (upper == 0) {
            for (Eigen::Index i = 0; i < n; ++i) {
                cplx s = b[i];
                for (Eigen::Index j = std::max<Eigen::Index>(0, i - lower); j < i; ++j) s -= A(i, j) * x[j];
                x[i] = s / (A(i, i) + lam);
            }
        } else {
            for (Eigen::Index i = n - 1; i >= 0; --i) {
                cplx s = b[i];
                for (Eigen::Index j = i + 1; j <= std::min(n - 1, i + upper); ++j) s -= A(i, j) * x[j];
                x[i] = s / (A(i, i) + lam);
            }
        }
        return x;
    }
};

} // namespace

PowerResult balakrishnan_power(const OpMatrix& A, double alpha, PowerSign sign, const PowerOptions& opts) {
    check_power_args(A, alpha, opts);
    const Eigen::Index n = A.size();
    const CMat I = CMat::Identity(n, n);
    const double c = std::sin(alpha * kPi) / kPi;
    const double expo = sign == PowerSign::Positive ? alpha : 1.0 - alpha;
    const CMat& rhs = sign == PowerSign::Positive ? A.A : I;
    auto term = [&](double s) -> CMat {
        const double lam = std::exp(s);
        CMat M = A.A;
        M.diagonal().array() += lam;
        return (c * std::exp(expo * s)) * M.partialPivLu().solve(rhs);
    };
    auto [X, err, panels] = log_quadrature<CMat>(term, spectral_centre(A.A), CMat::Zero(n, n), opts);
    PowerResult res;
    res.value = OpMatrix(std::move(X), A.w, Provenance::Transform);
    res.error_estimate = err;
    res.panels = panels;
    return res;
}

PowerApplyResult balakrishnan_apply(const OpMatrix& A, const CVecE& f, double alpha, PowerSign sign,
                                    const PowerOptions& opts) {
    check_power_args(A, alpha, opts);
    require(f.size() == A.size(), "balakrishnan_apply: vector size mismatch");
    const double c = std::sin(alpha * kPi) / kPi;
    const double expo = sign == PowerSign::Positive ? alpha : 1.0 - alpha;
    const CVecE b = sign == PowerSign::Positive ? CVecE(A.A * f) : f;
    BandedSolver solver(A.A);
    auto term = [&](double s) -> CVecE { return (c * std::exp(expo * s)) * solver.solve(std::exp(s), b); };
    auto [x, err, panels] = log_quadrature<CVecE>(term, spectral_centre(A.A), CVecE::Zero(A.size()), opts);
    return {std::move(x), err, panels};
}

NegPowerReport neg_power_bound_check(const OpMatrix& J, double alpha) {
    require_domain(alpha > 0.0 && alpha < 1.0, "neg_power_bound_check: alpha must lie in (0,1)");
    NegPowerReport rep;
    if (1.0 - alpha < 1e-6) {
        rep.skipped = true;
        rep.bound = std::numeric_limits<double>::infinity();
        rep.notice = "bound diverges as alpha -> 1; check skipped";
        return rep;
    }
    const double inv_norm = J.inverse().op_norm();
    rep.bound = 2.0 / (1.0 - alpha) * inv_norm + 1.0 / alpha;
    rep.actual = balakrishnan_power(J, alpha, PowerSign::Negative).value.op_norm();
    rep.pass = rep.actual <= rep.bound * (1.0 + 1e-12);
    return rep;
}

TransformResult transform_Z(const OpMatrix& J, const OpMatrix& G, const OpMatrix& F, double alpha) {
    require_domain(alpha >= 0.0 && alpha < 1.0, "transform_Z: alpha must lie in [0,1)");
    require(J.size() == G.size() && J.size() == F.size(), "transform_Z: shapes are not conformable");
    TransformResult res;
    OpMatrix Ja = alpha == 0.0 ? OpMatrix::identity(J.w) : balakrishnan_power(J, alpha).value;
    res.Z = J.adjoint() * G * J + F * Ja;
    res.Z.provenance = Provenance::Transform;

    res.gamma_G = lambda_min_herm(G.unitary_form());
    OpMatrix Jinv = J.inverse();
    res.norm_J_inv = Jinv.op_norm();
    res.norm_F = F.op_norm();
    if (alpha > 0.0) {
        res.C_verbatim = 2.0 / (1.0 - alpha) * res.norm_J_inv + 1.0 / alpha;
        res.C_swapped = 2.0 / alpha * res.norm_J_inv + 1.0 / (1.0 - alpha);
    } else {
        res.C_verbatim = std::numeric_limits<double>::infinity();
        res.C_swapped = res.norm_J_inv; // |J^{-1}| bounds |J^0 J^{-1}|
    }
    const double rhs = res.norm_J_inv * res.norm_F;
    res.condition_verbatim = res.gamma_G > res.C_verbatim * rhs;
    res.condition_swapped = res.gamma_G > res.C_swapped * rhs;
    res.binding = res.C_verbatim >= res.C_swapped ? "verbatim" : "swapped";
    if (!res.condition_verbatim || !res.condition_swapped) {
        res.warnings.push_back(std::string("lower-bound condition fails for the ") +
                               (!res.condition_verbatim ? "verbatim" : "swapped") + " constant");
    }
    const CMat Bi = Jinv.unitary_form();
    res.coercivity = lambda_min_herm(Bi.adjoint() * res.Z.unitary_form() * Bi);
    return res;
}

H1H2Report h1h2_verify(const OpMatrix& L, const OpMatrix& E, std::size_t probes, unsigned seed) {
    require(L.size() == E.size(), "h1h2_verify: size mismatch");
    const CMat UL = L.unitary_form(), UE = E.unitary_form();
    Eigen::FullPivLU<CMat> lu(UE);
    require(lu.isInvertible(), "h1h2_verify: energy operator must be invertible");
    const CMat Einv = lu.inverse();
    const CMat M = Einv.adjoint() * UL * Einv;
    H1H2Report rep;
    rep.C2 = lambda_min_herm(M);
    rep.C1 = spectral_norm(M);

    std::mt19937_64 gen(seed);
    rep.probe_C2 = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < probes; ++s) {
        CVecE f = random_unit(UL.rows(), gen), g = random_unit(UL.rows(), gen);
        const double nf = (UE * f).norm(), ng = (UE * g).norm();
        rep.probe_C2 = std::min(rep.probe_C2, f.dot(UL * f).real() / (nf * nf));
        rep.probe_C1 = std::max(rep.probe_C1, std::abs(g.dot(UL * f)) / (nf * ng));
    }
    rep.pass = rep.C2 > 0.0 && std::isfinite(rep.C1);
    return rep;
}

} // namespace fracwb
