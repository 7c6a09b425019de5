#include "fracwb/study.hpp"

#include "fracwb/kipriyanov.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

namespace fracwb {

OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& err) {
    require(h.size() == err.size(), "fit_order: length mismatch");
    require(h.size() >= 3, "fit_order: need at least three levels");
    const auto n = static_cast<double>(h.size());
    double sx = 0, sy = 0;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < h.size(); ++i) {
        require(h[i] > 0 && err[i] > 0 && std::isfinite(err[i]), "fit_order: values must be positive and finite");
        x.push_back(std::log(h[i]));
        y.push_back(std::log(err[i]));
        sx += x.back();
        sy += y.back();
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0, "fit_order: degenerate axis");
    OrderFit f;
    f.order = sxy / sxx;
    f.intercept = my - f.order * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.order * x[i];
        ss += r * r;
    }
    const double se = std::sqrt(ss / (n - 2.0) / sxx);
    boost::math::students_t dist(n - 2.0);
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    f.ci_lo = f.order - q * se;
    f.ci_hi = f.order + q * se;
    return f;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

void StudyReport::validate() const {
    require(axis.size() == values.size(), "StudyReport: sweep axis and values differ in length");
}

nlohmann::json StudyReport::to_json() const {
    validate();
    nlohmann::json j;
    j["name"] = name;
    j["axis_name"] = axis_name;
    j["axis"] = axis;
    j["values"] = values;
    if (fit) j["fit"] = {{"order", fit->order}, {"intercept", fit->intercept}, {"ci95", {fit->ci_lo, fit->ci_hi}}};
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    j["detail"] = detail;
    return j;
}

StudyReport StudyReport::from_json(const nlohmann::json& j) {
    StudyReport r;
    r.name = j.at("name").get<std::string>();
    r.axis_name = j.at("axis_name").get<std::string>();
    r.axis = j.at("axis").get<std::vector<double>>();
    r.values = j.at("values").get<std::vector<double>>();
    if (j.contains("fit")) {
        OrderFit f;
        f.order = j["fit"].at("order");
        f.intercept = j["fit"].at("intercept");
        f.ci_lo = j["fit"].at("ci95")[0];
        f.ci_hi = j["fit"].at("ci95")[1];
        r.fit = f;
    }
    r.tolerance = j.value("tolerance", 0.0);
    r.pass = j.value("pass", false);
    r.detail = j.value("detail", "");
    r.validate();
    return r;
}

// ---------------------------------------------------------------------------

double SeriesFn::value(double x) const {
    double s = 0;
    for (std::size_t k = 1; k < a.size(); ++k) s += a[k] * std::pow(x, double(k));
    return s;
}

double SeriesFn::rl_derivative(double x, double alpha) const {
    if (x == 0.0) return 0.0;
    double s = 0;
    for (std::size_t k = 1; k < a.size(); ++k) {
        if (a[k] == 0.0) continue;
        s += a[k] * std::exp(std::lgamma(k + 1.0) - std::lgamma(k + 1.0 - alpha)) * std::pow(x, k - alpha);
    }
    return s;
}

double SeriesFn::rl_integral(double x, double alpha) const {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] == 0.0) continue;
        s += a[k] * std::exp(std::lgamma(k + 1.0) - std::lgamma(k + 1.0 + alpha)) * std::pow(x, k + alpha);
    }
    return s;
}

SeriesFn SeriesFn::linear() { return {"x", {0.0, 1.0}}; }

SeriesFn SeriesFn::expm1() {
    SeriesFn f{"exp(x)-1", std::vector<double>(26, 0.0)};
    double fact = 1;
    for (std::size_t k = 1; k < f.a.size(); ++k) {
        fact *= double(k);
        f.a[k] = 1.0 / fact;
    }
    return f;
}

SeriesFn SeriesFn::sine() {
    SeriesFn f{"sin(x)", std::vector<double>(26, 0.0)};
    double fact = 1;
    for (std::size_t k = 1; k < f.a.size(); ++k) {
        fact *= double(k);
        if (k % 2 == 1) f.a[k] = ((k / 2) % 2 == 0 ? 1.0 : -1.0) / fact;
    }
    return f;
}

// ---------------------------------------------------------------------------

namespace {

double exact_norm(const std::function<double(double)>& g, double p) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double x) { return std::pow(std::abs(g(x)), p); };
    double v = gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 12, 1e-13);
    return std::pow(v, 1.0 / p);
}

} // namespace

StudyReport integral_bound_study(double alpha, double p, const std::vector<std::size_t>& levels,
                                 std::size_t count, unsigned seed) {
    require(alpha > 0 && alpha < 1, "integral_bound_study: alpha must lie in (0, 1)");
    require(p >= 1, "integral_bound_study: p must be >= 1");
    require(count > 0 && levels.size() >= 3, "integral_bound_study: need probes and three levels");
    const double C = 1.0 / std::tgamma(alpha + 1.0); // d = 1
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> N01;
    std::vector<SeriesFn> us;
    std::vector<double> un, iun;
    double worst_exact = 0;
    for (std::size_t s = 0; s < count; ++s) {
        SeriesFn u{"poly", std::vector<double>(6)};
        for (auto& c : u.a) c = N01(gen);
        auto full = [&u](double x) { return u.a[0] + u.value(x); };
        un.push_back(exact_norm(full, p));
        iun.push_back(exact_norm([&u, alpha](double x) { return u.rl_integral(x, alpha); }, p));
        worst_exact = std::max(worst_exact, iun.back() / un.back());
        us.push_back(std::move(u));
    }
    StudyReport r;
    r.name = "integral_bound";
    r.axis_name = "h";
    r.tolerance = C;
    bool bound_ok = true;
    for (std::size_t M : levels) {
        auto grid = IntervalGrid::uniform(0.0, 1.0, M);
        double delta = 0;
        std::vector<double> nI(count);
        for (std::size_t s = 0; s < count; ++s) {
            const auto& u = us[s];
            GridFn f = GridFn::sample(grid, [&u](double x) { return u.a[0] + u.value(x); });
            nI[s] = lp_norm(rl_integral_left(f, alpha), p);
            delta = std::max(delta, std::abs(nI[s] - iun[s]) / un[s]);
        }
        for (std::size_t s = 0; s < count; ++s)
            if (nI[s] > (C + delta) * un[s] * (1.0 + 1e-14)) bound_ok = false;
        r.axis.push_back(1.0 / double(M));
        r.values.push_back(delta);
    }
    r.fit = fit_order(r.axis, r.values);
    r.pass = bound_ok && worst_exact <= C && r.fit->order >= 1.0;
    r.detail = "alpha=" + std::to_string(alpha) + " p=" + std::to_string(p) +
               " max exact ratio=" + std::to_string(worst_exact) + " C=" + std::to_string(C);
    return r;
}

StudyReport generator_bridge_study(double alpha, const SeriesFn& f, const std::vector<std::size_t>& levels,
                                   const PowerOptions& opts) {
    require(alpha > 0 && alpha < 1, "generator_bridge_study: alpha must lie in (0, 1)");
    StudyReport r;
    r.name = "generator_bridge";
    r.axis_name = "M";
    r.tolerance = 1e-2;
    for (std::size_t M : levels) {
        auto grid = IntervalGrid::uniform(0.0, 1.0, M);
        OpMatrix A = shift_generator(*grid, Orientation::Backward);
        CVecE v(static_cast<Eigen::Index>(grid->size())), d(v.size());
        for (std::size_t j = 0; j < grid->size(); ++j) {
            const double x = grid->nodes()[j];
            v[Eigen::Index(j)] = f.value(x);
            d[Eigen::Index(j)] = f.rl_derivative(x, alpha);
        }
        PowerOptions o = opts;
        o.check_accretive = false;
        auto Af = balakrishnan_apply(A, v, alpha, PowerSign::Positive, o);
        r.axis.push_back(double(M));
        r.values.push_back(A.norm(Af.value - d) / A.norm(d));
    }
    std::vector<double> hs;
    for (double M : r.axis) hs.push_back(1.0 / M);
    if (r.axis.size() >= 3) r.fit = fit_order(hs, r.values);
    r.pass = strictly_decreasing(r.values) && r.values.back() < r.tolerance;
    r.detail = "alpha=" + std::to_string(alpha) + " f=" + f.name;
    return r;
}

StudyReport elliptic_order_study(int dim, bool variable, const std::vector<std::size_t>& levels) {
    require(dim == 1 || dim == 2, "elliptic_order_study: dim must be 1 or 2");
    EllipticCoeffs c;
    if (variable) {
        c.a = [](const std::vector<double>& x, int i, int j) {
            if (i != j) return 0.0;
            double s = 0;
            for (std::size_t k = 0; k < x.size(); ++k) s += (k + 1.0) * x[k];
            return 1.0 + 0.4 * std::sin(s) + 0.2 * i;
        };
        c.gamma_a = 0.5;
    } else {
        c.a = [](const std::vector<double>&, int i, int j) { return i == j ? 1.0 + 0.5 * i : 0.0; };
        c.gamma_a = 1.0;
    }
    StudyReport r;
    r.name = "elliptic_representation";
    r.axis_name = "h";
    r.tolerance = 1.0;
    for (std::size_t m : levels) {
        auto sys = GeneratorSystem::axis(dim, m);
        auto er = elliptic_assemble(c, sys, false);
        OpMatrix S = divergence_stencil(c, sys);
        double worst = 0;
        for (const auto& f : smooth_probes(sys, 8)) {
            CVecE sf = S.A * f;
            worst = std::max(worst, S.norm(er.T.A * f - sf) / S.norm(sf));
        }
        r.axis.push_back(sys.h);
        r.values.push_back(worst);
    }
    r.fit = fit_order(r.axis, r.values);
    r.pass = r.fit->order >= r.tolerance;
    r.detail = "dim=" + std::to_string(dim) + (variable ? " variable" : " constant") + " coefficients";
    return r;
}

StudyReport representation_study(const RayMeshPtr& mesh, double alpha, const std::vector<int>& ks) {
    RayFn g = RayFn::sample(mesh, [](const std::vector<double>& x) {
        double s = 0, q = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += (i + 1.0) * x[i];
            q += x[i] * x[i];
        }
        return cplx(1.0 + 0.5 * std::cos(s) + 0.25 * q, 0.1 * s);
    });
    RayFn f = dir_integral_left(g, alpha);
    StudyReport r;
    r.name = "representation";
    r.axis_name = "epsilon";
    for (int k : ks) {
        FracParams fp;
        fp.alpha = alpha;
        fp.epsilon = std::ldexp(1.0, -k) * mesh->diameter();
        fp.p = 2.0;
        r.axis.push_back(fp.epsilon);
        r.values.push_back(representation_error(f, fp).error);
    }
    if (r.axis.size() >= 3) r.fit = fit_order(r.axis, r.values);
    r.pass = strictly_decreasing(r.values);
    r.detail = "shape=" + mesh->shape() + " dim=" + std::to_string(mesh->dim()) + " alpha=" + std::to_string(alpha);
    return r;
}

CauchyProblem reference_cauchy_problem(double alpha, double dt, double T, unsigned seed) {
    require(dt > 0 && T > dt, "reference_cauchy_problem: need 0 < dt < T");
    const Eigen::Index N = 6;
    CMat J = CMat::Zero(N, N);
    const double ev[N] = {1, 2, 2, 5, 30, 200};
    for (Eigen::Index i = 0; i < N; ++i) J(i, i) = ev[i];
    J(1, 2) = 1.0;
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    CMat V = CMat::Identity(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) V(i, j) += 0.1 * cplx(U(gen), U(gen));
    CauchyProblem p;
    p.W = OpMatrix::plain(V * J * V.inverse());
    p.structure = std::make_pair(V, J);
    p.phi.coeffs[1] = 1.0;
    p.alpha = alpha;
    p.f = CVecE(N);
    for (Eigen::Index i = 0; i < N; ++i) p.f[i] = cplx(U(gen), U(gen));
    const auto n = static_cast<std::size_t>(std::llround(T / dt));
    for (std::size_t j = 0; j <= n; ++j) p.times.push_back(double(j) * dt);
    return p;
}

StudyReport residual_study(double alpha, const std::vector<double>& dts, const std::vector<double>& horizons,
                           double tolerance) {
    require(dts.size() == horizons.size() && !dts.empty(), "residual_study: one horizon per time step");
    StudyReport r;
    r.name = "fractional_residual";
    r.axis_name = "dt";
    r.tolerance = tolerance;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        auto p = reference_cauchy_problem(alpha, dts[i], horizons[i]);
        auto sol = solve_cauchy(p);
        auto res = residual_check(sol, p);
        r.axis.push_back(dts[i]);
        r.values.push_back(res.max_residual);
    }
    if (r.axis.size() >= 3) r.fit = fit_order(r.axis, r.values);
    r.pass = strictly_decreasing(r.values) && r.values.back() < tolerance;
    r.detail = "alpha=" + std::to_string(alpha);
    return r;
}

} // namespace fracwb
