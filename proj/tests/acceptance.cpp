// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "fracwb/kipriyanov.hpp"
#include "fracwb/opcalc.hpp"
#include "fracwb/spectral.hpp"
#include "fracwb/study.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace fracwb;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

CMat random_cmat(Eigen::Index n, std::mt19937_64& gen) {
    std::normal_distribution<double> N;
    CMat X(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) X(i, j) = cplx(N(gen), N(gen));
    return X;
}

double rel(const CMat& a, const CMat& b) { return (a - b).norm() / b.norm(); }

Outcome kernel_normalization() {
    double worst = 0;
    for (double a : {0.1, 0.25, 0.5, 0.75, 0.9}) worst = std::max(worst, std::abs(kernel_integral(a) - 1.0));
    return {worst < 1e-8, "max |int K - 1| = " + fmt(worst)};
}

Outcome integral_bound() {
    bool ok = true;
    std::string d;
    for (double a : {0.25, 0.5, 0.75}) {
        for (double p : {1.0, 2.0}) {
            auto r = integral_bound_study(a, p, {32, 64, 128, 256, 512});
            ok = ok && r.pass;
            d += "a=" + fmt(a) + ",p=" + fmt(p) + ":order " + (r.fit ? fmt(r.fit->order) : "-") + " ";
        }
    }
    return {ok, d};
}

Outcome constant_case() {
    const double a = 0.5;
    double worst = 0;
    for (int n : {1, 2, 3}) {
        RayMeshPtr m = n == 1 ? RayMesh::interval(0.0, 1.0, 256) : RayMesh::ball(n, 0.5, 12, 6, 128);
        auto one = RayFn::sample(m, [](const std::vector<double>&) { return cplx(1.0); });
        auto d = kipriyanov_apply(one, a).value;
        const double C = std::tgamma(static_cast<double>(n)) / std::tgamma(n - a);
        for (std::size_t k = 0; k < m->ray_count(); ++k) {
            const auto& r = m->rays()[k].r;
            for (std::size_t j = 1; j < r.size(); ++j) {
                const double ex = C * std::pow(r[j], -a);
                worst = std::max(worst, std::abs(d.ray(k)[j] - ex) / ex);
            }
        }
    }
    return {worst < 1e-10, "max rel err = " + fmt(worst)};
}

Outcome representation() {
    bool ok = true;
    std::string d;
    for (auto m : {RayMesh::interval(0.0, 1.0, 1024), RayMesh::ball(2, 0.5, 16, 0, 512)}) {
        auto r = representation_study(m, 0.5, {3, 4, 5, 6, 7, 8});
        ok = ok && r.pass;
        d += m->shape() + ": " + fmt(r.values.front()) + " -> " + fmt(r.values.back()) + " ";
    }
    return {ok, d};
}

Outcome accretivity() {
    bool ok = true;
    std::string d;
    for (int n : {1, 2}) {
        RayMeshPtr m = n == 1 ? RayMesh::interval(0.0, 1.0, 256) : RayMesh::ball(2, 0.5, 16, 0, 128);
        DirWeight rho;
        rho.rho = RayFn::sample(m, [](const std::vector<double>&) { return cplx(1.0); });
        rho.monotone = true;
        rho.lambda = 1.0;
        const double C = accretivity_constant(0.5, rho, m->diameter(), n);
        auto audit = accretivity_check(accretivity_suite(m, 20), 0.5, rho, 0.05 * C);
        ok = ok && audit.pass && audit.min_ratio >= 0.95 * C;
        d += "n=" + std::to_string(n) + ": min " + fmt(audit.min_ratio) + " vs C " + fmt(C) + " ";
    }
    return {ok, d};
}

Outcome balakrishnan() {
    std::mt19937_64 gen(2024);
    double sq = 0, orc = 0;
    for (int s = 0; s < 50; ++s) {
        CMat X = random_cmat(8, gen);
        CMat A = X * X.adjoint() / 8.0 + 0.1 * CMat::Identity(8, 8);
        OpMatrix op = OpMatrix::plain(A);
        CMat h = balakrishnan_power(op, 0.5).value.A;
        sq = std::max(sq, rel(h * h, A));
        Eigen::SelfAdjointEigenSolver<CMat> es(A);
        const double a = 0.3;
        CVecE d = es.eigenvalues().unaryExpr([a](double x) { return cplx(std::pow(x, a)); });
        CMat oracle = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
        orc = std::max(orc, rel(balakrishnan_power(op, a).value.A, oracle));
    }
    int violations = 0;
    for (int s = 0; s < 100; ++s) {
        CMat X = random_cmat(6, gen), Y = random_cmat(6, gen);
        CMat J = X * X.adjoint() / 6.0 + (Y - Y.adjoint()) / 6.0 + 0.1 * CMat::Identity(6, 6);
        const double a = 0.1 + 0.8 * s / 99.0;
        violations += neg_power_bound_check(OpMatrix::plain(J), a).pass ? 0 : 1;
    }
    return {sq < 1e-6 && orc < 1e-8 && violations == 0,
            "sqrt^2 " + fmt(sq) + ", oracle " + fmt(orc) + ", violations " + std::to_string(violations)};
}

Outcome bridge() {
    bool ok = true;
    double worst = 0;
    for (const auto& f : {SeriesFn::linear(), SeriesFn::expm1(), SeriesFn::sine()}) {
        for (double a : {0.3, 0.5, 0.7}) {
            auto r = generator_bridge_study(a, f, {128, 256, 512, 1024, 2048});
            ok = ok && r.pass;
            worst = std::max(worst, r.values.back());
        }
    }
    return {ok, "monotone in M, worst final rel err " + fmt(worst)};
}

Outcome contraction() {
    std::vector<OpMatrix> gens;
    for (std::size_t M : {16, 64, 256})
        for (auto o : {Orientation::Forward, Orientation::Backward}) gens.push_back(shift_generator(M + 1, 1.0 / M, o));
    gens.push_back(shift_generator(*IntervalGrid::uniform(0.0, 2.0, 100)));
    auto disk = RayMesh::ball(2, 0.5, 8, 0, 64);
    for (std::size_t k = 0; k < disk->ray_count(); ++k) gens.push_back(shift_generator(*disk, k));
    auto ball = RayMesh::ball(3, 0.5, 4, 4, 32);
    for (std::size_t k = 0; k < ball->ray_count(); k += 3) gens.push_back(shift_generator(*ball, k));
    for (const auto& A : GeneratorSystem::axis(2, 8).generators) gens.push_back(A);
    double worst = 0;
    for (const auto& A : gens) {
        const CMat U = A.unitary_form();
        for (double t : {0.001, 0.01, 0.1, 1.0, 10.0}) worst = std::max(worst, spectral_norm(CMat(-t * U).exp()));
    }
    return {worst <= 1.0 + 1e-12, std::to_string(gens.size()) + " generators, max |e^{-tA}| = " + fmt(worst)};
}

Outcome elliptic() {
    bool ok = true;
    std::string d;
    for (int n : {1, 2}) {
        for (bool var : {false, true}) {
            auto r = n == 1 ? elliptic_order_study(1, var, {16, 32, 64, 128}) : elliptic_order_study(2, var, {8, 16, 32});
            ok = ok && r.pass;
            d += "n=" + std::to_string(n) + (var ? " var" : " const") + ":" + (r.fit ? fmt(r.fit->order) : "-") + " ";
        }
    }
    return {ok, "orders " + d};
}

Outcome cauchy_oracle() {
    // 6x6 with one 2-chain; a mild similarity keeps the numerical range in a
    // sector narrow enough for the quadratic term
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    CMat J = CMat::Zero(6, 6), V = CMat::Identity(6, 6);
    const double ev[6] = {1.0, 2.0, 2.0, 3.0, 5.0, 8.0};
    for (int i = 0; i < 6; ++i) J(i, i) = ev[i];
    J(1, 2) = 1.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) V(i, j) += 0.05 * cplx(U(gen), U(gen));
    CauchyProblem p;
    p.W = OpMatrix::plain(V * J * V.inverse());
    p.phi.coeffs = {{1, 1.0}, {2, 0.1}};
    p.alpha = 1.0;
    p.f = random_cmat(6, gen).col(0);
    p.times = {0.0, 0.1, 1.0, 5.0};
    auto sol = solve_cauchy(p);
    const CMat phiW = p.phi.apply(p.W.A);
    double worst = 0;
    for (std::size_t i = 0; i < p.times.size(); ++i) {
        const CVecE ex = CMat(-p.times[i] * phiW).exp() * p.f;
        worst = std::max(worst, (sol.values[i] - ex).norm() / ex.norm());
    }
    bool chain = false;
    for (const auto& c : sol.system.chains) chain = chain || c.k() == 1;
    return {worst < 1e-8 && sol.sector.pass && chain,
            "max rel err " + fmt(worst) + (chain ? ", 2-chain found" : ", no 2-chain") + ", sector max(|arg c_n| + n theta) = " + fmt(sol.sector.value)};
}

Outcome residual() {
    bool ok = true;
    std::string d;
    for (double a : {1.5, 2.0}) {
        auto r = residual_study(a, {0.04, 0.02, 0.01, 0.005}, {10.0, 10.0, 10.0, 10.0});
        ok = ok && r.pass;
        d += "a=" + fmt(a) + ": " + fmt(r.values.front()) + " -> " + fmt(r.values.back()) + " ";
    }
    return {ok, d};
}

cplx contour(const OperatorFunction& phi, cplx z, double t, int j, double a) {
    const cplx z0 = 1.0 / z;
    const double rad = 0.3 * std::abs(z0);
    const int K = 256;
    cplx s = 0;
    for (int k = 0; k < K; ++k) {
        const cplx e = std::polar(1.0, 2 * kPi * k / K);
        s += std::exp(-std::pow(phi(1.0 / (z0 + rad * e)), a) * t) / std::pow(rad * e, j);
    }
    return s / double(K) * std::exp(std::pow(phi(z), a) * t);
}

Outcome h_machinery() {
    OperatorFunction lin;
    lin.coeffs = {{1, 1.0}};
    double h0 = 0, h1 = 0, cs = 0, ct = 0;
    for (cplx z : {cplx(0.3, 0.1), cplx(1.0, 0.0), cplx(4.0, -2.0)}) {
        for (double t : {0.01, 0.5, 2.0}) {
            auto H = H_series(lin, z, t, 1);
            h0 = std::max(h0, std::abs(H[0] - 1.0));
            h1 = std::max(h1, std::abs(H[1] - t * z * z) / std::abs(t * z * z));
        }
    }
    OperatorFunction q;
    q.coeffs = {{-1, 0.2}, {1, 1.0}, {2, 0.3}};
    for (double a : {1.0, 1.5, 2.0}) {
        // first coefficient by a complex step in zeta at real z
        for (double x : {0.5, 2.0}) {
            const double t = 0.4, h = 1e-30;
            const double g = std::exp(-std::pow(q(1.0 / cplx(1.0 / x, h)), a) * t).imag() / h;
            const double ex = g * std::exp(std::pow(q(x), a) * t).real();
            cs = std::max(cs, std::abs(H_j(q, x, t, 1, a).real() - ex) / std::abs(ex));
        }
        for (cplx z : {cplx(1.2, 0.4), cplx(0.6, -0.2)}) {
            auto H = H_series(q, z, 0.4, 4, a);
            for (int j = 0; j <= 4; ++j) {
                const cplx ex = contour(q, z, 0.4, j, a);
                ct = std::max(ct, std::abs(H[j] - ex) / std::max(1.0, std::abs(ex)));
            }
        }
    }
    return {h0 == 0.0 && h1 < 1e-12 && cs < 1e-8 && ct < 1e-8,
            "H0 " + fmt(h0) + ", H1 " + fmt(h1) + ", complex step " + fmt(cs) + ", contour j<=4 " + fmt(ct)};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_s; // 0: no runtime limit
    };
    const std::vector<Criterion> all{
        {"kernel normalization", kernel_normalization, 1.0},
        {"integral norm bound", integral_bound, 30.0},
        {"Kipriyanov constant case", constant_case, 0.0},
        {"representation convergence", representation, 60.0},
        {"accretivity lower bound", accretivity, 0.0},
        {"Balakrishnan powers", balakrishnan, 0.0},
        {"generator bridge", bridge, 120.0},
        {"shift semigroup contraction", contraction, 0.0},
        {"elliptic representation order", elliptic, 0.0},
        {"Cauchy solver vs matrix exponential", cauchy_oracle, 0.0},
        {"fractional residual", residual, 0.0},
        {"H_j machinery", h_machinery, 0.0},
    };
    int failed = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (all[i].budget_s > 0 && s > all[i].budget_s) {
            o.pass = false;
            o.detail += " [over budget " + fmt(all[i].budget_s) + " s]";
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %2zu %-36s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, all[i].name, o.detail.c_str(), s);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
