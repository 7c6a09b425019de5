#include "doctest.h"

#include "fracwb/spectral.hpp"
#include "fracwb/study.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>

using namespace fracwb;

namespace {

OperatorFunction poly(std::map<int, cplx> c, double theta = 0.0) {
    OperatorFunction phi;
    phi.coeffs = std::move(c);
    phi.theta = theta;
    return phi;
}

// Taylor coefficient by the trapezoid rule on a circle around 1/z, times e^{t phi^a(z)}.
cplx H_contour(const OperatorFunction& phi, cplx z, double t, int j, double a = 1.0) {
    const cplx z0 = 1.0 / z;
    const double rad = 0.3 * std::abs(z0);
    const int K = 256;
    cplx s = 0;
    for (int k = 0; k < K; ++k) {
        const cplx e = std::polar(1.0, 2 * kPi * k / K);
        const cplx zeta = z0 + rad * e;
        s += std::exp(-std::pow(phi(1.0 / zeta), a) * t) / std::pow(rad * e, j);
    }
    return s / static_cast<double>(K) * std::exp(std::pow(phi(z), a) * t);
}

CMat random_cmat(Eigen::Index n, std::mt19937_64& gen, double scale = 1.0) {
    std::normal_distribution<double> N;
    CMat X(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) X(i, j) = scale * cplx(N(gen), N(gen));
    return X;
}

CVecE random_vec(Eigen::Index n, std::mt19937_64& gen) { return random_cmat(n, gen).col(0); }

// V J V^{-1} with J built from (eigenvalue, block size) pairs.
std::pair<CMat, CMat> jordan_form(const std::vector<std::pair<double, int>>& blocks, std::mt19937_64& gen) {
    int n = 0;
    for (auto& b : blocks) n += b.second;
    CMat J = CMat::Zero(n, n);
    int o = 0;
    for (auto& b : blocks) {
        for (int i = 0; i < b.second; ++i) {
            J(o + i, o + i) = b.first;
            if (i + 1 < b.second) J(o + i, o + i + 1) = 1.0;
        }
        o += b.second;
    }
    CMat V = CMat::Identity(n, n) + random_cmat(n, gen, 0.1);
    return {V, J};
}

std::vector<std::size_t> chain_lengths(const JordanSystem& s) {
    std::vector<std::size_t> out;
    for (const auto& c : s.chains) out.push_back(c.columns.size());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("H_j closed forms for phi = z") {
    auto phi = poly({{1, 1.0}});
    for (cplx z : {cplx(0.7, 0.2), cplx(3.0, -1.0)}) {
        for (double t : {0.1, 1.0}) {
            auto H = H_series(phi, z, t, 2);
            CHECK(std::abs(H[0] - 1.0) < 1e-14);
            CHECK(std::abs(H[1] - t * z * z) < 1e-13 * std::abs(t * z * z));
            CHECK(std::abs(H_j(phi, z, t, 1) - H[1]) < 1e-15 * std::abs(H[1]));
        }
    }
}

TEST_CASE("H_j against the Cauchy integral") {
    const std::vector<OperatorFunction> fns{poly({{1, 1.0}, {2, 0.1}}), poly({{-1, 0.5}, {0, 0.2}, {1, 1.0}}),
                                            poly({{1, cplx(1.0, 0.2)}, {3, 0.05}})};
    for (const auto& phi : fns) {
        for (double a : {1.0, 1.5, 2.0}) {
            for (cplx z : {cplx(1.2, 0.3), cplx(0.5, -0.1)}) {
                auto H = H_series(phi, z, 0.7, 4, a);
                for (int j = 0; j <= 4; ++j) {
                    const cplx ex = H_contour(phi, z, 0.7, j, a);
                    CHECK(std::abs(H[j] - ex) < 1e-10 * std::max(1.0, std::abs(ex)));
                }
            }
        }
    }
}

TEST_CASE("H_1 by complex step at real z") {
    auto phi = poly({{1, 1.0}, {2, 0.3}});
    for (double a : {1.0, 1.5}) {
        for (double x : {0.4, 2.0}) {
            const double t = 0.5, h = 1e-30, z0 = 1.0 / x;
            auto g = [&](cplx zeta) { return std::exp(-std::pow(phi(1.0 / zeta), a) * t); };
            const double d = g(cplx(z0, h)).imag() / h;
            const double ex = d * std::exp(std::pow(phi(x), a) * t).real();
            CHECK(H_j(phi, x, t, 1, a).real() == doctest::Approx(ex).epsilon(1e-12));
        }
    }
}

TEST_CASE("two by two Jordan block by hand") {
    CMat W(2, 2);
    W << 2, 1, 0, 2;
    auto sys = jordan_decompose(OpMatrix::plain(W));
    REQUIRE(sys.chains.size() == 1);
    CHECK(sys.chains[0].k() == 1);
    CHECK(std::abs(sys.lambda[0] - 2.0) < 1e-12);
    const CMat B = W.inverse();
    const CVecE e0 = sys.E.col(sys.chains[0].columns[0]), e1 = sys.E.col(sys.chains[0].columns[1]);
    CHECK((B * e0 - 0.5 * e0).norm() < 1e-12);
    CHECK((B * e1 - 0.5 * e1 - e0).norm() < 1e-12);
}

TEST_CASE("generic path recovers chain lengths") {
    std::mt19937_64 gen(12);
    auto [V, J] = jordan_form({{1.0, 3}, {1.0, 1}, {4.0, 2}, {9.0, 1}}, gen);
    auto W = OpMatrix::plain(V * J * V.inverse());
    auto sys = jordan_decompose(W);
    CHECK(chain_lengths(sys) == std::vector<std::size_t>{1, 1, 2, 3});
    CHECK(sys.mu.size() == 3);
    CHECK(sys.chain_residual < 1e-6);
    auto exact = jordan_decompose(W, V, J);
    CHECK(chain_lengths(exact) == chain_lengths(sys));
}

TEST_CASE("biorthogonal duals") {
    std::mt19937_64 gen(13);
    auto [V, J] = jordan_form({{1.0, 2}, {2.0, 1}, {5.0, 3}}, gen);
    RVecE w = RVecE::LinSpaced(6, 0.5, 1.5);
    OpMatrix W(V * J * V.inverse(), w, Provenance::Assembled);
    for (int exact = 0; exact < 2; ++exact) {
        auto sys = exact ? jordan_decompose(W, V, J) : jordan_decompose(W);
        biorthogonal_construct(sys, W);
        CHECK(sys.max_cross_pairing < 1e-10);
        // <e_{q+i}, g_{q+k-i}> = 1 and zero for every other pair
        double worst = 0;
        for (const auto& c : sys.chains) {
            for (std::size_t i = 0; i <= c.k(); ++i) {
                for (Eigen::Index col = 0; col < sys.E.cols(); ++col) {
                    const cplx p = W.inner(sys.E.col(c.columns[i]), sys.G.col(col));
                    const double ex = col == c.columns[c.k() - i] ? 1.0 : 0.0;
                    worst = std::max(worst, std::abs(p - ex));
                }
            }
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("close eigenvalues merged by a loose tolerance fail chain extraction") {
    std::mt19937_64 gen(14);
    CMat V = CMat::Identity(3, 3) + random_cmat(3, gen, 0.2);
    CMat D = CMat::Zero(3, 3);
    D(0, 0) = 1.0;
    D(1, 1) = 1.0 + 1e-3;
    D(2, 2) = 3.0;
    auto W = OpMatrix::plain(V * D * V.inverse());
    CHECK_THROWS_AS((void)jordan_decompose(W, 1e-2), JordanError);
    CHECK(jordan_decompose(W, 1e-6).mu.size() == 3);
}

TEST_CASE("sector and growth audits") {
    auto pos = poly({{0, 1.0}, {1, 2.0}, {2, 0.5}});
    CHECK(sector_check(pos, kPi / 8).pass);
    auto rot = sector_check(poly({{0, 1.0}, {1, cplx(0, 1)}}), 0.1);
    CHECK_FALSE(rot.pass);
    CHECK(rot.witness == 1);
    CHECK_FALSE(sector_check(poly({{2, 1.0}}), kPi / 4).pass);

    auto phi = poly({{1, 1.0}, {2, 1.0}});
    phi.growth = GrowthCertificate{0.0, 0.5, 1.0, 0.0};
    std::vector<double> radii;
    for (int i = 0; i <= 30; ++i) radii.push_back(std::pow(10.0, -2 + 0.1 * i));
    auto ok = growth_check(phi, 0.0, radii);
    CHECK(ok.pass);
    CHECK(ok.C > 0);
    CHECK_FALSE(growth_check(phi, 3 * kPi / 4, radii).pass);
}

TEST_CASE("order one solution equals the matrix exponential") {
    std::mt19937_64 gen(15);
    CMat X = random_cmat(8, gen);
    CMat H = X * X.adjoint() / 8.0 + 0.5 * CMat::Identity(8, 8);
    auto [V, J] = jordan_form({{1.0, 2}, {2.5, 1}, {4.0, 3}}, gen);
    CMat D = V * J * V.inverse();
    for (const CMat& Wm : {H, D}) {
        CauchyProblem p;
        p.W = OpMatrix::plain(Wm);
        p.phi = poly({{1, 1.0}});
        p.alpha = 1.0;
        p.f = random_vec(Wm.rows(), gen);
        p.times = {0.0, 0.1, 1.0, 5.0};
        auto sol = solve_cauchy(p);
        for (std::size_t i = 0; i < p.times.size(); ++i) {
            const CVecE ex = CMat(-p.times[i] * Wm).exp() * p.f;
            CHECK((sol.values[i] - ex).norm() < 1e-8 * ex.norm());
        }
        CHECK((sol.values[0] - p.f).norm() < 1e-10 * p.f.norm());
    }
}

TEST_CASE("residual of the order one problem") {
    CauchyProblem p = reference_cauchy_problem(1.0, 1e-3, 2.0);
    auto sol = solve_cauchy(p);
    auto r = residual_check(sol, p);
    CHECK(r.max_residual < 1e-4);
    CHECK_FALSE(r.residuals.empty());
}

TEST_CASE("uniqueness proxy") {
    std::mt19937_64 gen(16);
    CMat X = random_cmat(5, gen);
    CauchyProblem p;
    p.phi = poly({{1, 1.0}});
    p.f = random_vec(5, gen);
    p.times = {0.0, 1.0};
    p.W = OpMatrix::plain(X * X.adjoint() + CMat::Identity(5, 5));
    CHECK(uniqueness_diagnostic(p).accretive);
    CMat Y = random_cmat(4, gen);
    p.W = OpMatrix::plain(Y - Y.adjoint());
    p.f = random_vec(4, gen);
    CHECK_FALSE(uniqueness_diagnostic(p).accretive);
}

TEST_CASE("decade blocks") {
    auto b = modulus_decade_blocks({1.0, 2.0, 5.0, 30.0, 200.0, cplx(0, 250.0)});
    CHECK(b == std::vector<std::size_t>{0, 3, 4, 6});
}
