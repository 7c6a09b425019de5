#include "fracwb/opcalc.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace fracwb {

namespace {

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Multi-index of a flat node index, axis 0 fastest.
std::vector<std::size_t> unflatten(std::size_t idx, std::size_t m, int dim) {
    std::vector<std::size_t> c(dim);
    for (int k = 0; k < dim; ++k) {
        c[k] = idx % m;
        idx /= m;
    }
    return c;
}

double det(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    double d = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        }
        if (a[p][c] == 0.0) return 0.0;
        if (p != c) {
            std::swap(a[p], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return d;
}

void check_points(const GeneratorSystem& s) {
    double scale = 0.0;
    for (const auto& p : s.points) for (double v : p) scale = std::max(scale, std::abs(v));
    require(std::abs(s.delta) > 1e-10 * std::pow(std::max(scale, 1e-300), s.dim),
            "GeneratorSystem: point determinant vanishes");
}

} // namespace

GeneratorSystem GeneratorSystem::axis(int dim, std::size_t m, double lo) {
    require(dim >= 1 && dim <= 3, "GeneratorSystem: dimension must be 1, 2 or 3");
    require(m >= 2, "GeneratorSystem: need at least two interior nodes per axis");
    GeneratorSystem s;
    s.dim = dim;
    s.m = m;
    s.lo = lo;
    s.h = 1.0 / static_cast<double>(m + 1);
    for (int i = 0; i < dim; ++i) {
        std::vector<double> p(dim, lo + 0.5), e(dim, 0.0);
        p[i] = lo;
        e[i] = 1.0;
        s.points.push_back(p);
        s.frames.push_back(e);
    }
    s.delta = det(s.points);
    check_points(s);

    const std::size_t N = s.size();
    const auto w = s.weights();
    for (int i = 0; i < dim; ++i) {
        const std::size_t stride = ipow(m, i);
        CMat A = CMat::Zero(N, N);
        for (std::size_t p = 0; p < N; ++p) {
            A(p, p) = 1.0 / s.h;
            if ((p / stride) % m + 1 < m) A(p, p + stride) = -1.0 / s.h;
        }
        s.generators.emplace_back(std::move(A), w, Provenance::Generator);
    }
    return s;
}

GeneratorSystem GeneratorSystem::with_frames(std::vector<std::vector<double>> frames,
                                             std::vector<std::vector<double>> points, std::size_t m, double lo) {
    GeneratorSystem s;
    s.dim = static_cast<int>(frames.size());
    require(s.dim >= 1 && points.size() == frames.size(), "GeneratorSystem: one point per frame vector required");
    for (const auto& e : frames) {
        require(static_cast<int>(e.size()) == s.dim, "GeneratorSystem: frame dimension mismatch");
        double n2 = 0.0;
        for (double v : e) n2 += v * v;
        require(std::abs(std::sqrt(n2) - 1.0) <= 1e-12, "GeneratorSystem: frame vectors must be unit vectors");
    }
    s.m = m;
    s.lo = lo;
    s.h = 1.0 / static_cast<double>(m + 1);
    s.frames = std::move(frames);
    s.points = std::move(points);
    s.delta = det(s.points);
    check_points(s);
    return s;
}

std::size_t GeneratorSystem::size() const { return ipow(m, dim); }

std::vector<double> GeneratorSystem::node(std::size_t idx) const {
    auto c = unflatten(idx, m, dim);
    std::vector<double> x(dim);
    for (int k = 0; k < dim; ++k) x[k] = lo + static_cast<double>(c[k] + 1) * h;
    return x;
}

RVecE GeneratorSystem::weights() const { return RVecE::Constant(size(), std::pow(h, dim)); }

OpMatrix GeneratorSystem::energy_root() const {
    require(!generators.empty(), "energy_root: system has no generators");
    const std::size_t N = size();
    CMat S = CMat::Zero(N, N);
    for (const auto& A : generators) S += (A.adjoint() * A).A;
    Eigen::SelfAdjointEigenSolver<CMat> es((S + S.adjoint()) / 2.0);
    return OpMatrix(es.operatorSqrt(), weights(), Provenance::Weight);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> shifted(std::vector<double> x, int axis, double d) {
    x[axis] += d;
    return x;
}

void audit_coefficients(const EllipticCoeffs& c, const GeneratorSystem& sys) {
    require(static_cast<bool>(c.a), "elliptic_assemble: coefficient function missing");
    require_domain(c.gamma_a > 0.0, "elliptic_assemble: ellipticity constant must be positive");
    const int n = sys.dim;
    auto check_at = [&](const std::vector<double>& x) {
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i) for (int j = 0; j < n; ++j) a(i, j) = c.a(x, i, j);
        require(a.allFinite(), "elliptic_assemble: coefficients must be finite");
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                require_domain(std::abs(a(i, j) - a(j, i)) <= 1e-12 * scale, "elliptic_assemble: a^{ij} must be symmetric");
                if (i != j) {
                    require(std::abs(a(i, j)) <= 1e-12 * scale,
                            "elliptic_assemble: a^{ij} is not representable in the direction frame (off-diagonal part)");
                }
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
        require_domain(es.eigenvalues()(0) >= c.gamma_a * (1.0 - 1e-12),
                       "elliptic_assemble: ellipticity audit failed (min eigenvalue below gamma_a)");
    };
    for (std::size_t p = 0; p < sys.size(); ++p) {
        const auto x = sys.node(p);
        check_at(x);
        for (int i = 0; i < n; ++i) check_at(shifted(x, i, sys.h / 2.0));
    }
}

OpMatrix assemble_T(const EllipticCoeffs& c, const GeneratorSystem& sys, std::vector<OpMatrix>* G_out) {
    const std::size_t N = sys.size();
    const int n = sys.dim;
    const auto w = sys.weights();
    CMat T = CMat::Zero(N, N);
    for (int i = 0; i < n; ++i) {
        CVecE g(N);
        for (std::size_t p = 0; p < N; ++p) g[p] = n * c.a(shifted(sys.node(p), i, sys.h / 2.0), i, i);
        OpMatrix G = OpMatrix::diagonal(g, w);
        const OpMatrix& A = sys.generators[i];
        T += (A.adjoint() * G * A).A;
        if (G_out) G_out->push_back(std::move(G));
    }
    return OpMatrix(T / static_cast<double>(n), w, Provenance::Elliptic);
}

} // namespace

EllipticResult elliptic_assemble(const EllipticCoeffs& c, const GeneratorSystem& sys, bool constants) {
    require(static_cast<int>(sys.generators.size()) == sys.dim, "elliptic_assemble: system has no generators");
    audit_coefficients(c, sys);
    EllipticResult res;
    res.T = assemble_T(c, sys, &res.G);
    if (!constants) return res;
    auto hh = h1h2_verify(res.T, sys.energy_root(), 0);
    res.coercivity = hh.C2;
    res.continuity = hh.C1;
    return res;
}

OpMatrix divergence_stencil(const EllipticCoeffs& c, const GeneratorSystem& sys) {
    const std::size_t N = sys.size();
    const std::size_t m = sys.m;
    const double h = sys.h, d = 1e-5;
    CMat S = CMat::Zero(N, N);
    for (int i = 0; i < sys.dim; ++i) {
        const std::size_t stride = ipow(m, i);
        for (std::size_t p = 0; p < N; ++p) {
            const auto x = sys.node(p);
            const double a = c.a(x, i, i);
            const double da = (c.a(shifted(x, i, d), i, i) - c.a(shifted(x, i, -d), i, i)) / (2.0 * d);
            const std::size_t ci = (p / stride) % m;
            S(p, p) += 2.0 * a / (h * h);
            if (ci + 1 < m) S(p, p + stride) += -a / (h * h) - da / (2.0 * h);
            if (ci > 0) S(p, p - stride) += -a / (h * h) + da / (2.0 * h);
        }
    }
    return OpMatrix(std::move(S), sys.weights(), Provenance::Elliptic);
}

std::vector<CVecE> smooth_probes(const GeneratorSystem& sys, std::size_t count, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<CVecE> out;
    for (std::size_t s = 0; s < count; ++s) {
        std::vector<double> k(sys.dim);
        for (auto& v : k) v = 4.0 * U(gen);
        const double ph = kPi * U(gen), im = 0.5 * U(gen);
        CVecE f(sys.size());
        for (std::size_t p = 0; p < sys.size(); ++p) {
            const auto x = sys.node(p);
            double b = 1.0, arg = ph;
            for (int i = 0; i < sys.dim; ++i) {
                const double t = (x[i] - sys.lo) * (sys.lo + 1.0 - x[i]);
                b *= 64.0 * t * t * t;
                arg += k[i] * x[i];
            }
            f[p] = cplx(b * (1.0 + 0.5 * std::sin(arg)), im * b * std::cos(arg));
        }
        out.push_back(std::move(f));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Interior-node matrix of a 1D grid operator on [lo, lo + 1] with zero boundary values.
template <class Op>
CMat line_matrix(const GeneratorSystem& sys, Op op) {
    const std::size_t m = sys.m;
    auto grid = IntervalGrid::uniform(sys.lo, sys.lo + 1.0, m + 1);
    CMat M(m, m);
    for (std::size_t k = 0; k < m; ++k) {
        CVec e(m + 2, cplx{});
        e[k + 1] = 1.0;
        GridFn out = op(GridFn(grid, std::move(e)));
        for (std::size_t j = 0; j < m; ++j) M(j, k) = out[j + 1];
    }
    return M;
}

struct LineParts {
    CMat I_sigma, D_gamma, A_gamma, A_gamma_inv;
};

LineParts line_parts(const GeneratorSystem& sys, double sigma, double gamma_ord, const LimitOptions& opts) {
    const auto m = static_cast<Eigen::Index>(sys.m);
    LineParts lp;
    lp.I_sigma = sigma == 0.0 ? CMat(CMat::Identity(m, m))
                              : line_matrix(sys, [&](const GridFn& f) { return rl_integral_left(f, sigma); });
    lp.D_gamma = gamma_ord == 0.0
                     ? CMat(CMat::Identity(m, m))
                     : line_matrix(sys, [&](const GridFn& f) { return marchaud_deriv_right(f, gamma_ord, opts).value; });
    if (gamma_ord == 0.0) {
        lp.A_gamma = CMat::Identity(m, m);
    } else {
        lp.A_gamma = balakrishnan_power(shift_generator(sys.m, sys.h, Orientation::Forward), gamma_ord).value.A;
    }
    lp.A_gamma_inv = lp.A_gamma.partialPivLu().inverse();
    return lp;
}

// Block-diagonal operator along e_1 lines; block(q) gives the m x m block of line q.
template <class Block>
CMat line_block_diag(const GeneratorSystem& sys, Block block) {
    const std::size_t N = sys.size(), m = sys.m;
    CMat M = CMat::Zero(N, N);
    for (std::size_t q = 0; q < N / m; ++q) M.block(q * m, q * m, m, m) = block(q);
    return M;
}

CMat fractional_part(const GeneratorSystem& sys, const LineParts& lp,
                     const std::function<double(const std::vector<double>&)>& rho) {
    const std::size_t m = sys.m;
    return line_block_diag(sys, [&](std::size_t q) {
        CVecE r(m);
        for (std::size_t j = 0; j < m; ++j) r[j] = rho(sys.node(q * m + j));
        return CMat(lp.I_sigma * r.asDiagonal() * lp.D_gamma);
    });
}

} // namespace

PerturbedResult perturbed_assemble(const EllipticCoeffs& c, const GeneratorSystem& sys,
                                   const std::function<double(const std::vector<double>&)>& rho,
                                   double sigma, double gamma_ord, const LimitOptions& opts) {
    require_domain(sigma >= 0.0 && sigma < 1.0 && gamma_ord >= 0.0 && gamma_ord < 1.0,
                   "perturbed_assemble: orders must lie in [0,1)");
    require(static_cast<bool>(rho), "perturbed_assemble: rho missing");
    for (std::size_t p = 0; p < sys.size(); ++p) {
        require(std::isfinite(rho(sys.node(p))), "perturbed_assemble: rho must be bounded");
    }
    PerturbedResult res;
    res.elliptic = elliptic_assemble(c, sys).T;
    const auto w = sys.weights();
    const LineParts lp = line_parts(sys, sigma, gamma_ord, opts);
    const CMat R = fractional_part(sys, lp, rho);
    res.L = OpMatrix(res.elliptic.A + R, w, Provenance::Assembled);
    res.A1_power = OpMatrix(line_block_diag(sys, [&](std::size_t) { return lp.A_gamma; }), w, Provenance::Transform);
    const CMat Ainv = line_block_diag(sys, [&](std::size_t) { return lp.A_gamma_inv; });
    res.F = OpMatrix((res.L.A - res.elliptic.A) * Ainv, w, Provenance::Assembled);
    const CMat rebuilt = res.elliptic.A + res.F.A * res.A1_power.A;
    res.representation_residual = (rebuilt - res.L.A).norm() / std::max(res.L.A.norm(), 1e-300);
    return res;
}

double h1h2_threshold(const EllipticCoeffs& base, const GeneratorSystem& sys,
                      const std::function<double(const std::vector<double>&)>& rho, double sigma,
                      double gamma_ord, double lo, double hi, int iters) {
    require(lo > 0.0 && hi > lo, "h1h2_threshold: need 0 < lo < hi");
    const auto w = sys.weights();
    const OpMatrix T = elliptic_assemble(base, sys).T;
    const CMat R = fractional_part(sys, line_parts(sys, sigma, gamma_ord, {}), rho);
    const OpMatrix E = sys.energy_root();
    auto passes = [&](double s) { return h1h2_verify(OpMatrix(s * T.A + R, w, Provenance::Assembled), E, 0).pass; };
    if (passes(lo)) return lo;
    if (!passes(hi)) {
        throw ConvergenceError("h1h2_threshold: audit fails at the upper scale", {lo, hi});
    }
    for (int it = 0; it < iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? hi : lo) = mid;
    }
    return hi;
}

NormEquivReport direction_norm_equivalence(const GeneratorSystem& sys, std::size_t probes, unsigned seed) {
    const int n = sys.dim;
    NormEquivReport rep;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n), E(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) E(k, i) = sys.frames[i][k];
    }
    S = E * E.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    rep.c1 = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
    rep.c2 = std::sqrt(es.eigenvalues()(n - 1));
    rep.frame_det = E.determinant();

    // Vector fields on the grid: |f|_L^2 = sum_Q sum_i |(f, e_i)|^2.
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> N01;
    rep.probe_min = std::numeric_limits<double>::infinity();
    const std::size_t N = sys.size();
    for (std::size_t s = 0; s < probes; ++s) {
        double num = 0.0, den = 0.0;
        for (std::size_t p = 0; p < N; ++p) {
            Eigen::VectorXcd f(n);
            for (int k = 0; k < n; ++k) f[k] = cplx(N01(gen), N01(gen));
            for (int i = 0; i < n; ++i) {
                cplx proj{};
                for (int k = 0; k < n; ++k) proj += f[k] * sys.frames[i][k];
                num += std::norm(proj);
            }
            den += f.squaredNorm();
        }
        const double ratio = std::sqrt(num / den);
        rep.probe_min = std::min(rep.probe_min, ratio);
        rep.probe_max = std::max(rep.probe_max, ratio);
    }
    const double tol = 1e-12;
    rep.pass = rep.c1 > 0.0 && rep.probe_min >= rep.c1 - tol && rep.probe_max <= rep.c2 + tol;

    if (static_cast<int>(sys.generators.size()) == n) {
        Eigen::MatrixXd GA = Eigen::MatrixXd::Zero(N, N), GH = Eigen::MatrixXd::Zero(N, N);
        for (const auto& A : sys.generators) GA += (A.A.adjoint() * A.A).real();
        const double h2 = sys.h * sys.h;
        for (int i = 0; i < n; ++i) {
            const std::size_t stride = ipow(sys.m, i);
            for (std::size_t p = 0; p < N; ++p) {
                GH(p, p) += 2.0 / h2;
                if ((p / stride) % sys.m + 1 < sys.m) {
                    GH(p, p + stride) -= 1.0 / h2;
                    GH(p + stride, p) -= 1.0 / h2;
                }
            }
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(GA, GH, Eigen::EigenvaluesOnly);
        rep.hA_lower = ges.eigenvalues()(0);
        rep.hA_upper = ges.eigenvalues()(N - 1);
        rep.hA_probe_min = std::numeric_limits<double>::infinity();
        for (const auto& f : smooth_probes(sys, std::max<std::size_t>(probes / 10, 1), seed)) {
            const double r = f.dot(GA.cast<cplx>() * f).real() / f.dot(GH.cast<cplx>() * f).real();
            rep.hA_probe_min = std::min(rep.hA_probe_min, r);
            rep.hA_probe_max = std::max(rep.hA_probe_max, r);
        }
        rep.pass = rep.pass && rep.hA_lower > 0.0 && std::isfinite(rep.hA_upper);
    }
    return rep;
}

} // namespace fracwb
