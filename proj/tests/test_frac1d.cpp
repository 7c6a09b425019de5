#include "doctest.h"

#include "fracwb/frac1d.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace fracwb;

namespace {

// Direct quadrature of (1/G(a)) int_0^x f(t) (x - t)^{a-1} dt, singular end handled by tanh-sinh.
double rl_oracle(const std::function<double(double)>& f, double x, double a) {
    boost::math::quadrature::tanh_sinh<double> q;
    auto g = [&](double s) { return f(x - s) * std::pow(s, a - 1.0); };
    return q.integrate(g, 0.0, x) / std::tgamma(a);
}

double max_rel(const GridFn& got, const std::function<double(double)>& ex, std::size_t from = 0) {
    double worst = 0;
    for (std::size_t i = from; i < got.size(); ++i) {
        const double x = got.grid()->nodes()[i];
        const double e = ex(x);
        worst = std::max(worst, std::abs(got[i] - e) / std::max(std::abs(e), 1e-300));
    }
    return worst;
}

} // namespace

TEST_CASE("order zero integral is the identity") {
    auto g = IntervalGrid::uniform(0.0, 2.0, 40);
    auto f = GridFn::sample(g, [](double x) { return std::sin(3 * x) + 0.2; });
    auto I = rl_integral_left(f, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(I[i] == f[i]);
}

TEST_CASE("left integral of monomials matches the Beta-function formula") {
    for (double a : {0.25, 0.5, 0.75}) {
        for (int k : {0, 1, 2}) {
            auto g = IntervalGrid::uniform(0.0, 1.0, 400);
            auto f = GridFn::sample(g, [k](double x) { return std::pow(x, k); });
            auto I = rl_integral_left(f, a);
            const double c = std::tgamma(k + 1.0) / std::tgamma(k + 1.0 + a);
            double err = 0;
            for (std::size_t i = 0; i < I.size(); ++i)
                err = std::max(err, std::abs(I[i] - c * std::pow(g->nodes()[i], k + a)));
            // linear data are integrated exactly
            CHECK(err < (k <= 1 ? 1e-13 : 1e-5));
        }
    }
}

TEST_CASE("left integral agrees with direct quadrature on a non-uniform grid") {
    std::vector<double> nodes;
    for (int i = 0; i <= 300; ++i) nodes.push_back(std::pow(i / 300.0, 1.5));
    auto g = IntervalGrid::from_nodes(nodes);
    auto f = GridFn::sample(g, [](double x) { return std::cos(2 * x); });
    const double a = 0.4;
    auto I = rl_integral_left(f, a);
    for (std::size_t i : {50, 150, 300}) {
        const double ex = rl_oracle([](double t) { return std::cos(2 * t); }, nodes[i], a);
        CHECK(std::abs(I[i].real() - ex) < 1e-4);
    }
}

TEST_CASE("right integral is the reflection of the left one") {
    auto g = IntervalGrid::uniform(0.0, 1.0, 64);
    auto f = GridFn::sample(g, [](double x) { return std::exp(x) - x * x; });
    auto R = rl_integral_right(f, 0.3);
    auto L = reflect(rl_integral_left(reflect(f), 0.3));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(R[i] - L[i]) < 1e-13);
}

TEST_CASE("semigroup of integrals improves under refinement") {
    double prev = 1e9;
    for (std::size_t M : {32, 64, 128, 256}) {
        auto g = IntervalGrid::uniform(0.0, 1.0, M);
        auto f = GridFn::sample(g, [](double x) { return std::sin(4 * x) + 1.0; });
        auto lhs = rl_integral_left(rl_integral_left(f, 0.3), 0.4);
        auto rhs = rl_integral_left(f, 0.7);
        const double err = lp_norm(lhs - rhs, 2) / lp_norm(f, 2);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("norm bound of the left integral on random data") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> N;
    auto g = IntervalGrid::uniform(0.0, 2.0, 256);
    for (double a : {0.25, 0.5, 0.75}) {
        const double C = std::pow(2.0, a) / std::tgamma(a + 1.0);
        for (int s = 0; s < 20; ++s) {
            CVec v(g->size());
            for (auto& x : v) x = cplx(N(gen), N(gen));
            GridFn f(g, v);
            for (double p : {1.0, 2.0}) CHECK(lp_norm(rl_integral_left(f, a), p) <= C * lp_norm(f, p) * (1 + 1e-3));
        }
    }
}

TEST_CASE("Marchaud derivative of x and of constants") {
    const double a = 0.5;
    auto g = IntervalGrid::uniform(0.0, 1.0, 200);
    auto lin = GridFn::sample(g, [](double x) { return x; });
    auto d = marchaud_deriv_left(lin, a);
    CHECK(d.report.converged);
    CHECK(std::isnan(d.value[0].real()));
    CHECK(max_rel(d.value, [a](double x) { return std::pow(x, 1 - a) / std::tgamma(2 - a); }, 1) < 1e-10);

    auto one = GridFn::sample(g, [](double) { return 1.0; });
    auto d1 = marchaud_deriv_left(one, a);
    CHECK(max_rel(d1.value, [a](double x) { return std::pow(x, -a) / std::tgamma(1 - a); }, 1) < 1e-12);
}

TEST_CASE("truncated derivative approaches the limit as epsilon shrinks") {
    auto g = IntervalGrid::uniform(0.0, 1.0, 512);
    auto f = GridFn::sample(g, [](double x) { return x * x; });
    auto lim = marchaud_deriv_left(f, 0.6).value;
    double prev = 1e9;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        auto t = marchaud_trunc_left(f, {0.6, eps, 2.0});
        double e = 0;
        for (std::size_t i = 1; i < f.size(); ++i) e = std::max(e, std::abs(t[i] - lim[i]));
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("parameter validation") {
    auto g = IntervalGrid::uniform(0.0, 1.0, 8);
    auto f = GridFn::sample(g, [](double x) { return x; });
    const FracParams big{1.2, 0.1, 2.0}, flat{0.5, 0.0, 2.0};
    CHECK_THROWS_AS((void)rl_integral_left(f, -0.1), std::domain_error);
    CHECK_THROWS_AS((void)marchaud_trunc_left(f, big), std::domain_error);
    CHECK_THROWS_AS((void)marchaud_trunc_left(f, flat), std::domain_error);
    CHECK_THROWS(IntervalGrid::from_nodes({0.0, 0.5, 0.4}));
}

TEST_CASE("time derivative of exponentials") {
    const double dt = 1e-3, lam = 1.3;
    TimeSeries u{dt, {}};
    for (int j = 0; j <= 20000; ++j) u.samples.push_back(CVec{std::exp(-lam * j * dt)});
    SUBCASE("order one is minus the derivative") {
        auto r = frac_time_deriv(u, 1.0);
        for (int j : {1000, 5000})
            CHECK(std::abs(r.values[j][0].real() - lam * std::exp(-lam * j * dt)) < 1e-4 * std::exp(-lam * j * dt));
    }
    SUBCASE("fractional order gives lam^b e^{-lam t}") {
        for (double b : {0.5, 2.0 / 3.0}) {
            auto r = frac_time_deriv(u, b);
            for (int j : {1000, 5000}) {
                const double ex = std::pow(lam, b) * std::exp(-lam * j * dt);
                CHECK(std::abs(r.values[j][0].real() - ex) < 1e-4 * ex);
            }
        }
    }
}

TEST_CASE("time derivative warns when there is no decay") {
    TimeSeries u{0.01, {}};
    for (int j = 0; j <= 200; ++j) u.samples.push_back(CVec{1.0});
    auto r = frac_time_deriv(u, 0.5);
    CHECK(!r.warnings.empty());
}

TEST_CASE("scaled upper gamma against the regular definition") {
    for (double a : {0.3, 0.5, 0.9}) {
        for (double x : {0.5, 2.0, 8.0, 600.0}) {
            boost::math::quadrature::tanh_sinh<double> q;
            // e^x Gamma(a, x) = int_0^inf (x + s)^{a-1} e^{-s} ds
            const double ex = q.integrate([&](double s) { return std::pow(x + s / (1 - s), a - 1) * std::exp(-s / (1 - s)) / ((1 - s) * (1 - s)); }, 0.0, 1.0);
            CHECK(scaled_upper_gamma(a, x) == doctest::Approx(ex).epsilon(1e-9));
        }
    }
}

TEST_CASE("CSV round trip keeps singular nodes") {
    auto g = IntervalGrid::uniform(0.0, 1.0, 10);
    auto f = GridFn::sample(g, [](double x) { return x * x; });
    f.values()[0] = cplx(std::nan(""), 0.0);
    std::stringstream ss;
    write_csv(ss, f);
    auto h = read_csv(ss);
    REQUIRE(h.size() == f.size());
    CHECK(std::isnan(h[0].real()));
    for (std::size_t i = 1; i < f.size(); ++i) CHECK(h[i] == f[i]);
}

TEST_CASE("closed-form values at the endpoints") {
    auto g = IntervalGrid::uniform(0.0, 1.0, 512);
    auto one = GridFn::sample(g, [](double) { return 1.0; });
    CHECK(rl_integral_left(one, 0.5)[512].real() == doctest::Approx(1.128379).epsilon(1e-6));
    CHECK(rl_integral_right(one, 0.5)[0].real() == doctest::Approx(1.128379).epsilon(1e-6));
    // error decays like h^{3/2}; 2048 intervals resolve the sixth digit
    auto g2 = IntervalGrid::uniform(0.0, 1.0, 2048);
    auto sq = GridFn::sample(g2, [](double x) { return x * x; });
    CHECK(marchaud_deriv_left(sq, 0.5).value[2048].real() == doctest::Approx(1.504506).epsilon(5e-6));
    // below epsilon only the closed-form branch acts
    auto t = marchaud_trunc_left(one, {0.5, 0.1, 2.0});
    for (std::size_t i = 1; g->nodes()[i] < 0.1; ++i)
        CHECK(t[i].real() == doctest::Approx(std::pow(0.1, -0.5) / std::tgamma(0.5)).epsilon(1e-13));
}

TEST_CASE("quarter integrals compose to a half integral at fine resolution") {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> N;
    for (int s = 0; s < 3; ++s) {
        const double a = N(gen), b = N(gen), c = N(gen);
        // vanishing at 0: the inner integral stays C^1 and the rule is second order
        auto smooth = [&](double x) { return a * x + b * std::sin(2 * x) + c * x * std::cos(3 * x); };
        // f(0) != 0: the inner integral carries x^{1/4}, first order only
        auto general = [&](double x) { return a + b * std::sin(2 * x) + c * std::cos(3 * x); };
        auto defect = [](std::size_t M, const std::function<double(double)>& fn) {
            auto g = IntervalGrid::uniform(0.0, 1.0, M);
            auto f = GridFn::sample(g, fn);
            auto rhs = rl_integral_left(f, 0.5);
            return lp_norm(rl_integral_left(rl_integral_left(f, 0.25), 0.25) - rhs, 2) / lp_norm(rhs, 2);
        };
        CHECK(defect(2048, smooth) < 1e-6);
        const double e1 = defect(1024, general), e2 = defect(2048, general);
        CHECK(e2 < e1);
        CHECK(std::log2(e1 / e2) > 0.9);
    }
}

TEST_CASE("Marchaud derivative inverts the integral") {
    auto g = IntervalGrid::uniform(0.0, 1.0, 2048);
    auto f = GridFn::sample(g, [](double x) { return std::pow(std::sin(kPi * x), 3); });
    for (double a : {0.3, 0.6}) {
        auto back = marchaud_deriv_left(rl_integral_left(f, a), a).value;
        back.values()[0] = 0.0;
        CHECK(lp_norm(back - f, 2) / lp_norm(f, 2) < 1e-3);
    }
}

TEST_CASE("weighted composition reduces in trivial cases") {
    auto g = IntervalGrid::uniform(0.0, 1.0, 256);
    auto f = GridFn::sample(g, [](double x) { return x * (1 - x) * std::exp(x); });
    auto one = GridFn::sample(g, [](double) { return 1.0; });
    auto id = weighted_composition(f, 0.0, 0.0, one).value;
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(id[i] == f[i]);
    auto d = weighted_composition(f, 0.0, 0.4, one).value;
    auto ref = marchaud_deriv_right(f, 0.4).value;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) CHECK(std::abs(d[i] - ref[i]) < 1e-12 * std::max(1.0, std::abs(ref[i])));
}
