#include "fracwb/frac1d.hpp"

#include "fracwb/product_rule.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace fracwb {

void FracParams::validate() const {
    require_domain(alpha > 0.0 && alpha < 1.0, "FracParams: alpha must lie in (0,1)");
    require_domain(epsilon > 0.0, "FracParams: epsilon must be positive");
    require_domain(p >= 1.0 && std::isfinite(p), "FracParams: p must lie in [1, inf)");
}

GridFn reflect(const GridFn& f) {
    const auto& g = *f.grid();
    std::vector<double> x(g.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = g.a() + g.b() - g.nodes()[g.size() - 1 - i];
    CVec v(f.values().rbegin(), f.values().rend());
    if (g.is_uniform()) {
        // Keep the original grid object so reflected uniform grids compare equal.
        return GridFn(f.grid(), std::move(v));
    }
    return GridFn(IntervalGrid::from_nodes(std::move(x)), std::move(v));
}

namespace {

GridFn reflect_onto(const GridFn& f, const GridPtr& target) {
    CVec v(f.values().rbegin(), f.values().rend());
    return GridFn(target, std::move(v));
}

void check_order(double alpha) {
    require_domain(alpha >= 0.0 && alpha < 1.0, "order must lie in [0,1)");
}

} // namespace

GridFn rl_integral_left(const GridFn& f, double alpha) {
    check_order(alpha);
    require(f.size() > 0, "rl_integral_left: empty grid");
    if (alpha == 0.0) return f;
    auto r = f.grid()->offsets_from_left();
    CVec out = detail::abel_left(r, f.values(), alpha);
    const double inv_gamma = 1.0 / std::tgamma(alpha);
    for (auto& v : out) v *= inv_gamma;
    return GridFn(f.grid(), std::move(out));
}

GridFn rl_integral_right(const GridFn& f, double alpha) {
    check_order(alpha);
    if (alpha == 0.0) return f;
    GridFn m = reflect(f);
    return reflect_onto(rl_integral_left(m, alpha), f.grid());
}

GridFn psi_left(const GridFn& f, const FracParams& params) {
    params.validate();
    const double a = params.alpha, eps = params.epsilon;
    auto r = f.grid()->offsets_from_left();
    CVec out = detail::marchaud_diff_left(r, f.values(), f.values(), {}, a, eps);
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j] == 0.0) {
            out[j] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
        } else if (r[j] < eps) {
            out[j] = f[j] * (std::pow(eps, -a) - std::pow(r[j], -a)) / a;
        }
    }
    return GridFn(f.grid(), std::move(out));
}

GridFn psi_right(const GridFn& f, const FracParams& params) {
    return reflect_onto(psi_left(reflect(f), params), f.grid());
}

namespace {

// D_eps = f r^-a / G(1-a) + a/G(1-a) psi_eps, with eps = 0 the interpolant limit.
GridFn marchaud_left_eps(const GridFn& f, double alpha, double eps) {
    auto r = f.grid()->offsets_from_left();
    CVec psi = detail::marchaud_diff_left(r, f.values(), f.values(), {}, alpha, eps);
    const double g = 1.0 / std::tgamma(1.0 - alpha);
    CVec out(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j] == 0.0) {
            out[j] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
            continue;
        }
        const double ra = std::pow(r[j], -alpha);
        cplx p = r[j] < eps ? f[j] * (std::pow(eps, -alpha) - ra) / alpha : psi[j];
        out[j] = g * f[j] * ra + alpha * g * p;
    }
    return GridFn(f.grid(), std::move(out));
}

double min_spacing(const IntervalGrid& g) {
    double h = g.length();
    for (std::size_t i = 0; i + 1 < g.size(); ++i) h = std::min(h, g.nodes()[i + 1] - g.nodes()[i]);
    return h;
}

} // namespace

GridFn marchaud_trunc_left(const GridFn& f, const FracParams& params) {
    params.validate();
    return marchaud_left_eps(f, params.alpha, params.epsilon);
}

GridFn marchaud_trunc_right(const GridFn& f, const FracParams& params) {
    return reflect_onto(marchaud_trunc_left(reflect(f), params), f.grid());
}

DerivResult marchaud_deriv_left(const GridFn& f, double alpha, const LimitOptions& opts) {
    check_order(alpha);
    if (alpha == 0.0) return {f, LimitReport{{}, {}, 0.0, true, false}};
    const double p = opts.p;
    auto eval = [&](double eps) { return marchaud_left_eps(f, alpha, eps); };
    auto dist = [&](const GridFn& a, const GridFn& b) { return lp_norm(a - b, p, true); };
    auto norm = [&](const GridFn& a) { return lp_norm(a, p, true); };
    auto [val, rep] = run_eps_limit<GridFn>(eval, dist, norm, min_spacing(*f.grid()),
                                             f.grid()->length(), opts);
    return {std::move(val), std::move(rep)};
}

DerivResult marchaud_deriv_right(const GridFn& f, double alpha, const LimitOptions& opts) {
    auto res = marchaud_deriv_left(reflect(f), alpha, opts);
    res.value = reflect_onto(res.value, f.grid());
    return res;
}

DerivResult weighted_composition(const GridFn& f, double sigma, double gamma, const GridFn& rho,
                                 const LimitOptions& opts) {
    require(rho.size() == f.size(), "weighted_composition: rho grid mismatch");
    for (const auto& v : rho.values()) {
        require(v.imag() == 0.0 && std::isfinite(v.real()), "weighted_composition: rho must be real and bounded");
    }
    DerivResult d = marchaud_deriv_right(f, gamma, opts);
    d.value = rl_integral_left(rho * d.value, sigma);
    return d;
}

// ---------------------------------------------------------------------------

double scaled_upper_gamma(double a, double x) {
    require(a > 0.0 && x >= 0.0, "scaled_upper_gamma: needs a > 0 and x >= 0");
    if (x < 500.0) return std::exp(x) * boost::math::tgamma(a, x);
    // Asymptotic series x^{a-1} (1 + (a-1)/x + (a-1)(a-2)/x^2 + ...).
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 8; ++k) {
        term *= (a - k) / x;
        sum += term;
    }
    return std::pow(x, a - 1.0) * sum;
}

namespace {

double vec_norm(const CVec& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

std::vector<CVec> central_difference(const std::vector<CVec>& F, double dt, double factor) {
    const std::size_t n = F.size();
    const std::size_t dim = F.front().size();
    std::vector<CVec> out(n, CVec(dim));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t c = 0; c < dim; ++c) {
            cplx d;
            if (n < 3) {
                d = (F[n - 1][c] - F[0][c]) / (dt * static_cast<double>(n - 1));
            } else if (j == 0) {
                d = (-3.0 * F[0][c] + 4.0 * F[1][c] - F[2][c]) / (2.0 * dt);
            } else if (j == n - 1) {
                d = (3.0 * F[n - 1][c] - 4.0 * F[n - 2][c] + F[n - 3][c]) / (2.0 * dt);
            } else {
                d = (F[j + 1][c] - F[j - 1][c]) / (2.0 * dt);
            }
            out[j][c] = factor * d;
        }
    }
    return out;
}

} // namespace

TimeDerivResult frac_time_deriv(const TimeSeries& u, double beta, const TimeDerivOptions& opts) {
    require_domain(beta >= 0.0 && beta <= 1.0, "frac_time_deriv: order must lie in [0,1]");
    require(u.dt > 0.0, "frac_time_deriv: dt must be positive");
    require(u.samples.size() >= 3, "frac_time_deriv: need at least three samples");
    const std::size_t n = u.samples.size();
    const std::size_t dim = u.samples.front().size();
    for (const auto& s : u.samples) require(s.size() == dim, "frac_time_deriv: ragged samples");

    TimeDerivResult res;
    if (beta == 0.0) {
        res.values = u.samples;
        res.tail_policy = "identity";
        return res;
    }
    if (beta == 1.0) {
        res.values = central_difference(u.samples, u.dt, -1.0);
        res.tail_policy = "none (local derivative)";
        return res;
    }

    const double T = u.dt * static_cast<double>(n - 1);
    // Decay rate from the last decade of samples.
    std::size_t lag = std::max<std::size_t>(1, static_cast<std::size_t>(opts.tail_fraction * static_cast<double>(n - 1)));
    lag = std::min(lag, n - 1);
    const double n_end = vec_norm(u.samples[n - 1]);
    const double n_lag = vec_norm(u.samples[n - 1 - lag]);
    double kappa = 0.0;
    bool tail_ok = false;
    if (n_end == 0.0) {
        kappa = std::numeric_limits<double>::infinity();
        tail_ok = true;
    } else if (n_lag > 0.0) {
        kappa = std::log(n_lag / n_end) / (static_cast<double>(lag) * u.dt);
        tail_ok = std::isfinite(kappa) && kappa > 0.0;
    }
    res.tail_rate = kappa;
    res.tail_policy = "exponential extrapolation from the last " + std::to_string(lag) + " samples";
    if (!opts.extrapolate_tail) res.tail_policy = "truncated at horizon";

    // F_j = int_{t_j}^T u(s) (s - t_j)^{-beta} ds via the reflected Abel rule.
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = u.dt * static_cast<double>(k);
    std::vector<CVec> F(n, CVec(dim));
    CVec comp(n);
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t k = 0; k < n; ++k) comp[k] = u.samples[n - 1 - k][c];
        CVec I = detail::abel_left(r, comp, 1.0 - beta);
        for (std::size_t j = 0; j < n; ++j) F[j][c] = I[n - 1 - j];
    }

    double worst_share = 0.0;
    if (!tail_ok) {
        res.tail_bound = std::numeric_limits<double>::infinity();
        res.warnings.push_back("tail-truncation: samples do not decay at the horizon; the integral over "
                               "(T, inf) diverges for order < 1 and was dropped");
    } else if (opts.extrapolate_tail && std::isfinite(kappa)) {
        const CVec& uT = u.samples[n - 1];
        const double a = 1.0 - beta;
        const double kpow = std::pow(kappa, beta - 1.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double x = kappa * (T - r[j]);
            const double w = kpow * scaled_upper_gamma(a, x);
            CVec tail(dim);
            for (std::size_t c = 0; c < dim; ++c) {
                tail[c] = w * uT[c];
                F[j][c] += tail[c];
            }
            if (j <= (n - 1) / 2) {
                const double fn = vec_norm(F[j]);
                if (fn > 0.0) worst_share = std::max(worst_share, vec_norm(tail) / fn);
            }
        }
        res.tail_bound = worst_share;
        if (worst_share > opts.tail_tolerance) {
            res.warnings.push_back("tail-truncation: extrapolated tail carries up to " +
                                   std::to_string(worst_share) + " of the integral in the audit window");
        }
    }

    res.values = central_difference(F, u.dt, -1.0 / std::tgamma(1.0 - beta));
    return res;
}

} // namespace fracwb
