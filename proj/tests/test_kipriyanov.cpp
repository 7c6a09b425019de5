#include "doctest.h"

#include "fracwb/kipriyanov.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace fracwb;

namespace {


RayFn constant(const RayMeshPtr& m, cplx c) {
    return RayFn::sample(m, [c](const std::vector<double>&) { return c; });
}

RayFn random_fn(const RayMeshPtr& m, std::mt19937_64& gen) {
    std::normal_distribution<double> N;
    std::vector<CVec> v;
    for (const auto& ray : m->rays()) {
        CVec c(ray.r.size());
        for (auto& x : c) x = cplx(N(gen), N(gen));
        v.push_back(c);
    }
    return RayFn(m, v);
}

DirWeight unit_weight(const RayMeshPtr& m) {
    DirWeight w;
    w.rho = constant(m, 1.0);
    w.lambda = 1.0;
    w.monotone = true;
    return w;
}

} // namespace

TEST_CASE("one-dimensional operations reduce to frac1d exactly") {
    std::vector<double> nodes;
    for (int i = 0; i <= 96; ++i) nodes.push_back(std::pow(i / 96.0, 1.3));
    auto mesh = RayMesh::interval(nodes);
    auto grid = IntervalGrid::from_nodes(nodes);
    auto fn = [](double x) { return cplx(std::sin(2 * x) + x, 0.3 * x * x); };
    auto g = GridFn::sample(grid, fn);
    auto f = RayFn::sample_radial(mesh, [&](std::size_t, double r) { return fn(r); });
    REQUIRE(mesh->rays()[0].r == nodes);

    auto a = dir_integral_left(f, 0.4);
    auto b = rl_integral_left(g, 0.4);
    for (std::size_t j = 0; j < nodes.size(); ++j) CHECK(a.ray(0)[j] == b[j]);

    auto ka = kipriyanov_apply(f, 0.6).value;
    auto kb = marchaud_deriv_left(g, 0.6).value;
    for (std::size_t j = 1; j < nodes.size(); ++j) CHECK(ka.ray(0)[j] == kb[j]);

    const FracParams fp{0.6, 0.05, 2.0};
    auto pa = psi_plus(f, fp).value;
    auto pb = psi_left(g, fp);
    for (std::size_t j = 1; j < nodes.size(); ++j) CHECK(pa.ray(0)[j] == pb[j]);
}

TEST_CASE("Kipriyanov operator of a constant") {
    const double a = 0.5;
    for (int n : {1, 2, 3}) {
        RayMeshPtr m = n == 1 ? RayMesh::interval(0.0, 1.0, 128) : RayMesh::ball(n, 0.5, 8, 4, 128);
        auto d = kipriyanov_apply(constant(m, 1.0), a);
        const double C = std::tgamma(static_cast<double>(n)) / std::tgamma(n - a);
        double worst = 0;
        for (std::size_t k = 0; k < m->ray_count(); ++k) {
            const auto& r = m->rays()[k].r;
            for (std::size_t j = 1; j < r.size(); ++j) {
                const double ex = C * std::pow(r[j], -a);
                worst = std::max(worst, std::abs(d.value.ray(k)[j] - ex) / ex);
            }
        }
        CHECK(worst < 1e-10);
    }
    CHECK(kipriyanov_C(2, 0.5) == doctest::Approx(1.128379).epsilon(1e-6));
}

TEST_CASE("directional integral of one against direct quadrature") {
    const double a = 0.5;
    for (int n : {2, 3}) {
        auto m = RayMesh::ball(n, 0.5, 6, 3, 256);
        auto I = dir_integral_left(constant(m, 1.0), a);
        boost::math::quadrature::tanh_sinh<double> q;
        double worst = 0;
        const auto& ray = m->rays().back();
        // linear interpolation of (t/r)^{n-1}: exact for n = 2, O((h/r)^2) for n = 3
        for (std::size_t j : {std::size_t{128}, ray.r.size() - 1}) {
            const double r = ray.r[j];
            const double ex =
                q.integrate([&](double s) { return std::pow(s, a - 1) * std::pow((r - s) / r, n - 1); }, 0.0, r) /
                std::tgamma(a);
            worst = std::max(worst, std::abs(I.values().back()[j] - ex) / ex);
        }
        CHECK(worst < (n == 2 ? 1e-12 : 1e-4));
    }
    // ray of length one at n = 2: B(2, 1/2) / G(1/2)
    auto disk = RayMesh::ball(2, 0.5, 9, 0, 256);
    auto I = dir_integral_left(constant(disk, 1.0), 0.5);
    bool seen = false;
    for (std::size_t k = 0; k < disk->ray_count(); ++k) {
        if (std::abs(disk->rays()[k].length - 1.0) > 1e-12) continue;
        CHECK(I.ray(k).back().real() == doctest::Approx(0.752252).epsilon(1e-6));
        seen = true;
    }
    CHECK(seen);
}

TEST_CASE("weighted integral with trivial weights") {
    auto m = RayMesh::ball(2, 0.5, 6, 0, 64);
    std::mt19937_64 gen(5);
    auto f = random_fn(m, gen);
    auto one = dir_integral_weighted(f, 0.3, constant(m, 1.0));
    auto ref = dir_integral_left(f, 0.3);
    auto zero = dir_integral_weighted(f, 0.3, constant(m, 0.0));
    for (std::size_t k = 0; k < m->ray_count(); ++k) {
        for (std::size_t j = 0; j < f.ray(k).size(); ++j) {
            CHECK(std::abs(one.ray(k)[j] - ref.ray(k)[j]) < 1e-14);
            CHECK(zero.ray(k)[j] == cplx{});
        }
    }
}

TEST_CASE("integral norm bound on random data") {
    auto m = RayMesh::ball(2, 0.5, 8, 0, 64);
    std::mt19937_64 gen(9);
    for (double a : {0.25, 0.75}) {
        const double C = std::pow(m->diameter(), a) / std::tgamma(a + 1.0);
        for (int s = 0; s < 20; ++s) {
            auto u = random_fn(m, gen);
            CHECK(lp_norm(dir_integral_left(u, a), 2) <= C * lp_norm(u, 2) * (1 + 1e-3));
            CHECK(lp_norm(dir_integral_right(u, a), 2) <= C * lp_norm(u, 2) * (1 + 1e-3));
        }
    }
}

TEST_CASE("psi plus closed-form branch below epsilon") {
    auto m = RayMesh::ball(2, 0.5, 4, 0, 64);
    auto f = RayFn::sample(m, [](const std::vector<double>& x) { return cplx(1.0 + x[0], x[1]); });
    const FracParams fp{0.4, 0.1, 2.0};
    auto p = psi_plus(f, fp).value;
    for (std::size_t k = 0; k < m->ray_count(); ++k) {
        const auto& r = m->rays()[k].r;
        for (std::size_t j = 1; j < r.size() && r[j] < fp.epsilon; ++j) {
            const cplx ex = f.ray(k)[j] * (std::pow(fp.epsilon, -fp.alpha) - std::pow(r[j], -fp.alpha)) / fp.alpha;
            CHECK(std::abs(p.ray(k)[j] - ex) < 1e-13 * std::abs(ex) + 1e-15);
        }
    }
}

TEST_CASE("psi plus of one vanishes above epsilon when n is one") {
    auto m = RayMesh::interval(0.0, 1.0, 64);
    auto p = psi_plus(constant(m, 1.0), {0.5, 0.05, 2.0}).value;
    const auto& r = m->rays()[0].r;
    for (std::size_t j = 1; j < r.size(); ++j)
        if (r[j] >= 0.05) CHECK(std::abs(p.ray(0)[j]) < 1e-13);
}

TEST_CASE("auxiliary kernel") {
    CHECK(kernel_K(0.5, 0.5) == doctest::Approx(std::sqrt(2.0) / kPi).epsilon(1e-14));
    CHECK(std::isinf(kernel_K(0.0, 0.5)));
    for (double a : {0.1, 0.5, 0.9}) {
        bool positive = true;
        for (int i = 1; i <= 10000; ++i) positive = positive && kernel_K(i * 1e-3, a) > 0;
        CHECK(positive);
    }
    for (double a : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        // independent evaluation straight from the kernel
        boost::math::quadrature::tanh_sinh<double> ts;
        boost::math::quadrature::exp_sinh<double> es;
        auto K = [a](double t) { return kernel_K(t, a); };
        const double oracle = ts.integrate(K, 0.0, 1.0) + es.integrate(K, 1.0, std::numeric_limits<double>::infinity());
        CHECK(std::abs(oracle - 1.0) < 1e-8);
        CHECK(std::abs(kernel_integral(a) - 1.0) < 1e-8);
    }
}

TEST_CASE("accretivity constant values") {
    auto m = RayMesh::interval(0.0, 1.0, 16);
    auto w = unit_weight(m);
    CHECK(accretivity_constant(0.5, w, 1.0, 1) == doctest::Approx(1.0 / std::sqrt(kPi)).epsilon(1e-12));
    CHECK(accretivity_constant(0.5, w, 2.0, 1) ==
          doctest::Approx(std::pow(2.0, -0.5) * accretivity_constant(0.5, w, 1.0, 1)).epsilon(1e-12));
    DirWeight general = w;
    general.monotone = false;
    general.lipschitz = 0.0;
    CHECK(accretivity_constant(0.5, general, 1.0, 2) == doctest::Approx(accretivity_constant(0.5, w, 1.0, 2)));
    DirWeight rough = w;
    rough.lambda = 0.4;
    CHECK_THROWS_AS((void)accretivity_constant(0.5, rough, 1.0, 1), std::domain_error);

    auto c = kip_constants(0.5, w, 1.0, 2);
    CHECK(c.C_n_alpha > 0);
    CHECK(c.C_alpha_d == doctest::Approx(1.0 / std::tgamma(1.5)));
    CHECK(c.coercive);
}

TEST_CASE("accretivity holds on smooth suites") {
    for (int n : {1, 2}) {
        RayMeshPtr m = n == 1 ? RayMesh::interval(0.0, 1.0, 256) : RayMesh::ball(2, 0.5, 16, 0, 128);
        auto w = unit_weight(m);
        const double C = accretivity_constant(0.5, w, m->diameter(), n);
        auto audit = accretivity_check(accretivity_suite(m, 20, 11), 0.5, w, 0.05 * C);
        CHECK(audit.ratios.size() == 20);
        CHECK(audit.pass);
        CHECK(audit.min_ratio >= 0.95 * C);
    }
}

TEST_CASE("representation error decreases with epsilon") {
    auto m = RayMesh::ball(2, 0.5, 8, 0, 256);
    auto g = RayFn::sample(m, [](const std::vector<double>& x) { return cplx(1.0 + x[0] * x[1], 0.5 * x[1]); });
    auto f = dir_integral_left(g, 0.5);
    double prev = 1e9;
    for (int k = 3; k <= 7; ++k) {
        auto s = representation_error(f, {0.5, std::ldexp(1.0, -k), 2.0});
        CHECK(s.error < prev);
        CHECK(s.error == doctest::Approx(std::sqrt(s.I1 + s.I2 + s.I3)));
        prev = s.error;
    }
    auto z = representation_approximant(constant(m, 0.0), {0.5, 0.1, 2.0});
    for (const auto& ray : z.values())
        for (std::size_t j = 1; j < ray.size(); ++j) CHECK(ray[j] == cplx{});
}

TEST_CASE("mapping smoke check is finite on a smooth suite") {
    auto m = RayMesh::ball(2, 0.5, 8, 0, 64);
    auto r = mapping_smoke_check(accretivity_suite(m, 5, 3), 0.5, 2.0);
    CHECK(r.finite);
    CHECK(r.norms.size() == 5);
}
