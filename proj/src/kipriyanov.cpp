#include "fracwb/kipriyanov.hpp"

#include "fracwb/product_rule.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace fracwb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

GridFn ray_fn(const RayFn& f, std::size_t k) {
    return GridFn(IntervalGrid::from_nodes(f.mesh()->rays()[k].r), f.ray(k));
}

void check_alpha(double alpha) {
    require_domain(alpha >= 0.0 && alpha < 1.0, "order must lie in [0,1)");
}

double min_spacing(const RayMesh& m) {
    double h = std::numeric_limits<double>::infinity();
    for (const auto& ray : m.rays()) {
        for (std::size_t j = 0; j + 1 < ray.r.size(); ++j) h = std::min(h, ray.r[j + 1] - ray.r[j]);
    }
    return h;
}

double max_length(const RayMesh& m) {
    double d = 0.0;
    for (const auto& ray : m.rays()) d = std::max(d, ray.length);
    return d;
}

// t^{n-1} on a ray.
std::vector<double> radial_power(const std::vector<double>& r, int n) {
    std::vector<double> s(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) s[j] = std::pow(r[j], n - 1);
    return s;
}

// psi^+_eps on one ray for n >= 2 (closed form below eps, NaN at r = 0).
CVec psi_plus_ray(const std::vector<double>& r, const CVec& v, int n, double alpha, double eps) {
    auto s = radial_power(r, n);
    CVec vr(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) vr[j] = v[j] * s[j];
    CVec out = detail::marchaud_diff_left(r, vr, vr, {}, alpha, eps);
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j] == 0.0) {
            out[j] = cplx(kNaN, 0.0);
        } else if (r[j] < eps) {
            out[j] = v[j] * (std::pow(eps, -alpha) - std::pow(r[j], -alpha)) / alpha;
        } else {
            out[j] /= s[j];
        }
    }
    return out;
}

enum class LeftKind { Marchaud, Kipriyanov };

RayFn left_eps(const RayFn& f, double alpha, double eps, LeftKind kind) {
    const auto& m = *f.mesh();
    const int n = m.dim();
    const double g = 1.0 / std::tgamma(1.0 - alpha);
    const double cn = kipriyanov_C(n, alpha);
    std::vector<CVec> out(m.ray_count());
    for (std::size_t k = 0; k < m.ray_count(); ++k) {
        const auto& r = m.rays()[k].r;
        const CVec& v = f.ray(k);
        CVec& o = out[k];
        o.resize(r.size());
        if (kind == LeftKind::Marchaud) {
            CVec p = psi_plus_ray(r, v, n, alpha, eps);
            for (std::size_t j = 0; j < r.size(); ++j) {
                o[j] = r[j] == 0.0 ? cplx(kNaN, 0.0) : g * v[j] * std::pow(r[j], -alpha) + alpha * g * p[j];
            }
        } else {
            auto s = radial_power(r, n);
            CVec D = detail::marchaud_diff_left(r, v, v, s, alpha, eps);
            for (std::size_t j = 0; j < r.size(); ++j) {
                if (r[j] == 0.0) {
                    o[j] = cplx(kNaN, 0.0);
                    continue;
                }
                o[j] = cn * v[j] * std::pow(r[j], -alpha) + alpha * g * (D[j] / s[j]);
            }
        }
    }
    return RayFn(f.mesh(), std::move(out));
}

DirResult left_limit(const RayFn& f, double alpha, const LimitOptions& opts, LeftKind kind) {
    const double p = opts.p;
    auto eval = [&](double eps) { return left_eps(f, alpha, eps, kind); };
    auto dist = [&](const RayFn& a, const RayFn& b) { return lp_norm(a - b, p, true); };
    auto norm = [&](const RayFn& a) { return lp_norm(a, p, true); };
    const auto& m = *f.mesh();
    auto [val, rep] = run_eps_limit<RayFn>(eval, dist, norm, min_spacing(m), max_length(m), opts);
    return {std::move(val), std::move(rep), {}};
}

// Applies a 1D operator to every ray of an n = 1 (or radial-weight-free) function.
template <class Op>
RayFn per_ray(const RayFn& f, Op op) {
    std::vector<CVec> out(f.mesh()->ray_count());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = op(ray_fn(f, k)).values();
    return RayFn(f.mesh(), std::move(out));
}

} // namespace

double kipriyanov_C(int n, double alpha) {
    require(n >= 1, "kipriyanov_C: dimension must be positive");
    return std::tgamma(static_cast<double>(n)) / std::tgamma(n - alpha);
}

RayFn dir_integral_left(const RayFn& f, double alpha) {
    check_alpha(alpha);
    if (alpha == 0.0) return f;
    const int n = f.mesh()->dim();
    if (n == 1) return per_ray(f, [&](const GridFn& g) { return rl_integral_left(g, alpha); });
    const double inv_gamma = 1.0 / std::tgamma(alpha);
    std::vector<CVec> out(f.mesh()->ray_count());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& r = f.mesh()->rays()[k].r;
        auto s = radial_power(r, n);
        CVec g(r.size());
        for (std::size_t j = 0; j < r.size(); ++j) g[j] = f.ray(k)[j] * s[j];
        out[k] = detail::abel_left(r, g, alpha);
        for (std::size_t j = 0; j < r.size(); ++j) {
            out[k][j] = r[j] == 0.0 ? cplx{} : out[k][j] * (inv_gamma / s[j]);
        }
    }
    return RayFn(f.mesh(), std::move(out));
}

RayFn dir_integral_right(const RayFn& f, double alpha) {
    check_alpha(alpha);
    if (alpha == 0.0) return f;
    return per_ray(f, [&](const GridFn& g) { return rl_integral_right(g, alpha); });
}

RayFn dir_integral_weighted(const RayFn& f, double alpha, const RayFn& mu) {
    require(mu.mesh() == f.mesh(), "dir_integral_weighted: mesh mismatch");
    for (const auto& ray : mu.values()) {
        for (const auto& v : ray) require(v.imag() == 0.0, "dir_integral_weighted: mu must be real-valued");
    }
    return dir_integral_left(mu * f, alpha);
}

RayFn dir_integral_weighted(const RayFn& f, double alpha, const DirWeight& mu) {
    return dir_integral_weighted(f, alpha, mu.rho);
}

DirResult psi_plus(const RayFn& f, const FracParams& params) {
    params.validate();
    const auto& m = *f.mesh();
    DirResult res;
    for (std::size_t k = 0; k < m.ray_count(); ++k) {
        if (params.epsilon >= m.rays()[k].length) res.closed_form_rays.push_back(k);
    }
    if (m.dim() == 1) {
        res.value = per_ray(f, [&](const GridFn& g) { return psi_left(g, params); });
        return res;
    }
    std::vector<CVec> out(m.ray_count());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = psi_plus_ray(m.rays()[k].r, f.ray(k), m.dim(), params.alpha, params.epsilon);
    }
    res.value = RayFn(f.mesh(), std::move(out));
    return res;
}

DirResult psi_minus(const RayFn& f, const FracParams& params) {
    params.validate();
    const auto& m = *f.mesh();
    DirResult res;
    for (std::size_t k = 0; k < m.ray_count(); ++k) {
        if (params.epsilon >= m.rays()[k].length) res.closed_form_rays.push_back(k);
    }
    res.value = per_ray(f, [&](const GridFn& g) { return psi_right(g, params); });
    return res;
}

DirResult dir_marchaud_trunc_left(const RayFn& f, const FracParams& params) {
    params.validate();
    DirResult res;
    if (f.mesh()->dim() == 1) {
        res.value = per_ray(f, [&](const GridFn& g) { return marchaud_trunc_left(g, params); });
    } else {
        res.value = left_eps(f, params.alpha, params.epsilon, LeftKind::Marchaud);
    }
    for (std::size_t k = 0; k < f.mesh()->ray_count(); ++k) {
        if (params.epsilon >= f.mesh()->rays()[k].length) res.closed_form_rays.push_back(k);
    }
    return res;
}

DirResult dir_marchaud_left(const RayFn& f, double alpha, const LimitOptions& opts) {
    check_alpha(alpha);
    if (alpha == 0.0) return {f, LimitReport{{}, {}, 0.0, true, false}, {}};
    if (f.mesh()->dim() == 1) {
        auto d = marchaud_deriv_left(ray_fn(f, 0), alpha, opts);
        return {RayFn(f.mesh(), {d.value.values()}), d.report, {}};
    }
    return left_limit(f, alpha, opts, LeftKind::Marchaud);
}

DirResult kipriyanov_apply(const RayFn& f, double alpha, const LimitOptions& opts) {
    check_alpha(alpha);
    if (alpha == 0.0) return {f, LimitReport{{}, {}, 0.0, true, false}, {}};
    if (f.mesh()->dim() == 1) return dir_marchaud_left(f, alpha, opts);
    return left_limit(f, alpha, opts, LeftKind::Kipriyanov);
}

RayFn representation_approximant(const RayFn& f, const FracParams& params) {
    params.validate();
    const double a = params.alpha, eps = params.epsilon;
    const double g = 1.0 / std::tgamma(1.0 - a);
    RayFn psi = psi_plus(f, params).value;
    std::vector<CVec> out(f.mesh()->ray_count());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& r = f.mesh()->rays()[k].r;
        out[k].resize(r.size());
        for (std::size_t j = 0; j < r.size(); ++j) {
            const cplx v = f.ray(k)[j];
            out[k][j] = r[j] < eps ? g * v * std::pow(eps, -a) : g * (v * std::pow(r[j], -a) + a * psi.ray(k)[j]);
        }
    }
    return RayFn(f.mesh(), std::move(out));
}

RepresentationSplit representation_error(const RayFn& f, const FracParams& params) {
    RayFn err = dir_integral_left(representation_approximant(f, params), params.alpha) - f;
    const auto& m = *f.mesh();
    const double p = params.p, eps = params.epsilon;
    RepresentationSplit s;
    for (std::size_t k = 0; k < m.ray_count(); ++k) {
        const auto& ray = m.rays()[k];
        for (std::size_t j = 0; j < ray.r.size(); ++j) {
            const double jac = m.dim() == 1 ? 1.0 : std::pow(ray.r[j], m.dim() - 1);
            const double c = ray.weight * ray.w[j] * jac * std::pow(std::abs(err.ray(k)[j]), p);
            if (ray.length < eps) {
                s.I3 += c;
            } else if (ray.r[j] < eps) {
                s.I2 += c;
            } else {
                s.I1 += c;
            }
        }
    }
    s.error = std::pow(s.I1 + s.I2 + s.I3, 1.0 / p);
    return s;
}

double kernel_K(double t, double alpha) {
    require_domain(alpha > 0.0 && alpha < 1.0, "kernel_K: order must lie in (0,1)");
    require_domain(t >= 0.0, "kernel_K: t must be non-negative");
    const double c = std::sin(alpha * kPi) / kPi;
    if (t == 0.0) return std::numeric_limits<double>::infinity();
    if (t <= 1.0) return c * std::pow(t, alpha - 1.0);
    // t^a - (t-1)^a = -t^a expm1(a log1p(-1/t)).
    return -c * std::pow(t, alpha) * std::expm1(alpha * std::log1p(-1.0 / t)) / t;
}

double kernel_integral(double alpha) {
    require_domain(alpha > 0.0 && alpha < 1.0, "kernel_integral: order must lie in (0,1)");
    const double c = std::sin(alpha * kPi) / kPi;
    // u = 1/t maps (1, inf) to (0, 1): integrand c u^{-1-a} (1 - (1-u)^a).
    auto tail = [&](double u) {
        if (u <= 0.0) return 0.0;
        if (u < 1e-6) return c * alpha * std::pow(u, -alpha) * (1.0 + 0.5 * (1.0 - alpha) * u);
        return -c * std::pow(u, -1.0 - alpha) * std::expm1(alpha * std::log1p(-u));
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    return c / alpha + ts.integrate(tail, 0.0, 1.0);
}

double accretivity_constant(double alpha, const DirWeight& rho, double diam, int n) {
    require_domain(alpha > 0.0 && alpha < 1.0, "accretivity_constant: order must lie in (0,1)");
    require_domain(rho.lambda > alpha, "accretivity_constant: Lipschitz exponent must exceed the order");
    require(diam > 0.0 && n >= 1, "accretivity_constant: bad geometry");
    const double g = 1.0 / std::tgamma(1.0 - alpha);
    double brace = g + kipriyanov_C(n, alpha);
    if (!rho.monotone && rho.lipschitz > 0.0) {
        const double inf = rho.inf_rho();
        require_domain(inf > 0.0, "accretivity_constant: inf rho must be positive for the general formula");
        brace -= alpha * rho.lipschitz * std::pow(diam, rho.lambda) * g / (2.0 * (rho.lambda - alpha) * inf);
    }
    return brace / (2.0 * std::pow(diam, alpha));
}

KipConstants kip_constants(double alpha, const DirWeight& rho, double diam, int n) {
    KipConstants c;
    c.C_n_alpha = kipriyanov_C(n, alpha);
    c.C_alpha_rho = accretivity_constant(alpha, rho, diam, n);
    c.C_alpha_d = std::pow(diam, alpha) / std::tgamma(alpha + 1.0);
    c.coercive = c.C_alpha_rho > 0.0;
    return c;
}

std::vector<RayFn> accretivity_suite(const RayMeshPtr& mesh, std::size_t count, unsigned seed) {
    const auto& m = *mesh;
    const int n = m.dim();
    std::function<double(const std::vector<double>&)> base;
    if (m.shape() == "ball") {
        const double R = m.diameter() / 2.0;
        base = [R, n](const std::vector<double>& q) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                double c = i == n - 1 ? q[i] - R : q[i];
                s += c * c;
            }
            return std::max(0.0, (R * R - s) / (R * R));
        };
    } else if (m.shape() == "square") {
        const double L = m.diameter() / std::sqrt(2.0);
        base = [L](const std::vector<double>& q) {
            return 16.0 * q[0] * (L - q[0]) * q[1] * (L - q[1]) / (L * L * L * L);
        };
    } else if (m.shape() == "interval") {
        const double a = m.origin()[0], L = m.diameter();
        base = [a, L](const std::vector<double>& q) { return 4.0 * (q[0] - a) * (a + L - q[0]) / (L * L); };
    } else {
        throw std::invalid_argument("accretivity_suite: unsupported mesh shape " + m.shape());
    }
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double scale = m.diameter();
    std::vector<RayFn> suite;
    for (std::size_t s = 0; s < count; ++s) {
        std::vector<double> kx(n), ph(3);
        for (auto& x : kx) x = 3.0 * U(gen) / scale;
        for (auto& x : ph) x = kPi * U(gen);
        const double amp = 0.8 * U(gen), im = s % 2 == 0 ? 0.0 : 0.5 * U(gen);
        suite.push_back(RayFn::sample(mesh, [&](const std::vector<double>& q) {
            double arg = ph[0];
            for (int i = 0; i < n; ++i) arg += kx[i] * q[i] * (1.0 + s);
            const double b = base(q);
            return cplx(b * (1.0 + amp * std::sin(arg)), im * b * std::cos(arg + ph[1]));
        }));
    }
    return suite;
}

AccretivityAudit accretivity_check(const std::vector<RayFn>& suite, double alpha, const DirWeight& rho,
                                    double tol) {
    require(!suite.empty(), "accretivity_check: empty suite");
    const auto& mesh = suite.front().mesh();
    require(rho.rho.mesh() == mesh, "accretivity_check: weight mesh mismatch");
    AccretivityAudit rep;
    rep.constant = accretivity_constant(alpha, rho, mesh->diameter(), mesh->dim());
    rep.tolerance = tol;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& f : suite) {
        const double nf = inner(f, f, &rho.rho, true).real();
        require(nf > 0.0, "accretivity_check: suite functions must be non-zero in L_2(rho)");
        RayFn D = kipriyanov_apply(f, alpha).value;
        const double ratio = inner(D, f, &rho.rho, true).real() / nf;
        rep.ratios.push_back(ratio);
        rep.min_ratio = std::min(rep.min_ratio, ratio);
    }
    rep.pass = rep.min_ratio >= rep.constant - tol;
    return rep;
}

MappingReport mapping_smoke_check(const std::vector<RayFn>& suite, double alpha, double q) {
    MappingReport rep;
    for (const auto& f : suite) {
        double v = lp_norm(kipriyanov_apply(f, alpha).value, q, true);
        rep.norms.push_back(v);
        rep.finite = rep.finite && std::isfinite(v);
    }
    return rep;
}

} // namespace fracwb
