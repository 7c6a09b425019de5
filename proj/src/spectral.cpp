#include "fracwb/spectral.hpp"

#include "fracwb/opcalc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace fracwb {

namespace {

constexpr double kChainFail = 1e-6;

struct Cluster {
    cplx mu;
    std::size_t count = 0;
};

std::vector<Cluster> cluster_eigenvalues(const CVecE& ev, double tol) {
    const auto n = static_cast<std::size_t>(ev.size());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double scale = std::max({1.0, std::abs(ev[i]), std::abs(ev[j])});
            if (std::abs(ev[i] - ev[j]) <= tol * scale) parent[find(i)] = find(j);
        }
    }
    std::vector<Cluster> out;
    std::vector<std::size_t> root_of;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = find(i);
        auto it = std::find(root_of.begin(), root_of.end(), r);
        if (it == root_of.end()) {
            root_of.push_back(r);
            out.push_back({ev[i], 1});
        } else {
            auto& c = out[static_cast<std::size_t>(it - root_of.begin())];
            c.mu += ev[i];
            ++c.count;
        }
    }
    for (auto& c : out) c.mu /= static_cast<double>(c.count);
    // ascending |lambda| = descending |mu|
    std::stable_sort(out.begin(), out.end(),
                     [](const Cluster& a, const Cluster& b) { return std::abs(a.mu) > std::abs(b.mu); });
    return out;
}

// Orthonormal basis of the numerical null space (columns of V past the rank).
CMat null_basis(const CMat& M, double tau) {
    Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s[r] > tau) ++r;
    return svd.matrixV().rightCols(M.cols() - r);
}

Eigen::Index num_rank(const CMat& M, double tau) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<CMat> svd(M);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s[r] > tau) ++r;
    return r;
}

// Orthonormal basis of span(S), rank-revealing.
CMat range_basis(const CMat& S, double tau) {
    if (S.cols() == 0) return CMat(S.rows(), 0);
    Eigen::JacobiSVD<CMat> svd(S, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s[r] > tau) ++r;
    return svd.matrixU().leftCols(r);
}

void finish_system(JordanSystem& sys, const OpMatrix& W, const std::vector<CVecE>& cols) {
    const Eigen::Index N = W.size();
    require(static_cast<Eigen::Index>(cols.size()) == N, "jordan_decompose: chains do not span the space");
    sys.E.resize(N, N);
    for (Eigen::Index c = 0; c < N; ++c) sys.E.col(c) = cols[static_cast<std::size_t>(c)];
    sys.w = W.w;
    sys.blocks = modulus_decade_blocks(sys.lambda);
    Eigen::JacobiSVD<CMat> svd(sys.E);
    const auto& s = svd.singularValues();
    sys.condition = s[s.size() - 1] > 0 ? s[0] / s[s.size() - 1] : INFINITY;
}

} // namespace

std::vector<std::size_t> modulus_decade_blocks(const std::vector<cplx>& lambda) {
    std::vector<std::size_t> out{0};
    for (std::size_t i = 1; i < lambda.size(); ++i) {
        if (std::floor(std::log10(std::abs(lambda[i]))) != std::floor(std::log10(std::abs(lambda[i - 1]))))
            out.push_back(i);
    }
    out.push_back(lambda.size());
    if (lambda.empty()) out = {0};
    return out;
}

JordanSystem jordan_decompose(const OpMatrix& W, double tol) {
    W.validate();
    require(tol > 0.0, "jordan_decompose: tolerance must be positive");
    const Eigen::Index N = W.size();
    Eigen::FullPivLU<CMat> lu(W.A);
    require(lu.isInvertible(), "jordan_decompose: W must be invertible");
    const CMat B = lu.inverse();
    Eigen::ComplexEigenSolver<CMat> ces(B, false);
    require(ces.info() == Eigen::Success, "jordan_decompose: eigenvalue iteration failed");
    const auto clusters = cluster_eigenvalues(ces.eigenvalues(), tol);
    const double normB = spectral_norm(B);

    JordanSystem sys;
    std::vector<CVecE> cols;
    for (std::size_t q = 0; q < clusters.size(); ++q) {
        const cplx mu = clusters[q].mu;
        const auto ma = static_cast<Eigen::Index>(clusters[q].count);
        const CMat Nf = B - mu * CMat::Identity(N, N);
        CMat P = CMat::Identity(N, N);
        for (Eigen::Index k = 0; k < ma; ++k) P = Nf * P;
        Eigen::JacobiSVD<CMat> svd(P, Eigen::ComputeFullV);
        const CMat Q = svd.matrixV().rightCols(ma);
        const CMat M = Q.adjoint() * Nf * Q;
        const double tau = 1e-5 * std::max(1.0, normB);

        // r[k] = rank M^k
        std::vector<Eigen::Index> r(static_cast<std::size_t>(ma) + 2, 0);
        CMat Mk = CMat::Identity(ma, ma);
        r[0] = ma;
        for (Eigen::Index k = 1; k <= ma; ++k) {
            Mk = M * Mk;
            r[static_cast<std::size_t>(k)] = num_rank(Mk, tau * std::max(1.0, std::pow(normB, double(k - 1))));
        }
        std::vector<Eigen::Index> count(static_cast<std::size_t>(ma) + 1, 0);
        Eigen::Index total = 0;
        for (Eigen::Index s = 1; s <= ma; ++s) {
            auto u = static_cast<std::size_t>(s);
            count[u] = (r[u - 1] - r[u]) - (r[u] - r[u + 1]);
            if (count[u] < 0) throw JordanError("jordan_decompose: inconsistent rank profile", q, 0.0);
            total += s * count[u];
        }
        if (total != ma)
            throw JordanError("jordan_decompose: chain lengths do not match the multiplicity", q, 0.0);

        std::vector<std::vector<CVecE>> local; // chains in Q coordinates, top first
        for (Eigen::Index s = ma; s >= 1; --s) {
            auto u = static_cast<std::size_t>(s);
            if (count[u] == 0) continue;
            CMat Ms = CMat::Identity(ma, ma), Ms1;
            for (Eigen::Index k = 0; k < s; ++k) {
                Ms1 = Ms;
                Ms = M * Ms;
            }
            const double ts = tau * std::max(1.0, std::pow(normB, double(s - 1)));
            const double ts1 = tau * std::max(1.0, std::pow(normB, double(std::max<Eigen::Index>(s - 2, 0))));
            const CMat Ks = null_basis(Ms, ts);
            for (Eigen::Index b = 0; b < count[u]; ++b) {
                CMat S = (s > 1) ? null_basis(Ms1, ts1) : CMat(ma, 0);
                std::vector<CVecE> extra;
                for (const auto& ch : local) {
                    // height s vector of a longer or equal chain
                    if (static_cast<Eigen::Index>(ch.size()) >= s) extra.push_back(ch[ch.size() - u]);
                }
                CMat Sx(ma, S.cols() + static_cast<Eigen::Index>(extra.size()));
                Sx.leftCols(S.cols()) = S;
                for (std::size_t e = 0; e < extra.size(); ++e) Sx.col(S.cols() + Eigen::Index(e)) = extra[e];
                const CMat Sc = Ks.adjoint() * Sx;
                const CMat Sb = range_basis(Sc, 1e-8 * std::max(1.0, Sc.norm()));
                if (Sb.cols() >= Ks.cols())
                    throw JordanError("jordan_decompose: no admissible chain top", q, 0.0);
                // pick the coordinate direction with the largest residual
                CMat R = CMat::Identity(Ks.cols(), Ks.cols()) - Sb * Sb.adjoint();
                Eigen::Index best = 0;
                R.colwise().norm().maxCoeff(&best);
                CVecE y = R.col(best).normalized();
                CVecE v = Ks * y;
                std::vector<CVecE> ch{v};
                for (Eigen::Index k = 1; k < s; ++k) ch.push_back(M * ch.back());
                local.push_back(std::move(ch));
            }
        }

        std::size_t geo = 0;
        for (const auto& ch : local) {
            const auto s = static_cast<Eigen::Index>(ch.size());
            std::vector<CVecE> full(static_cast<std::size_t>(s));
            full[static_cast<std::size_t>(s - 1)] = Q * ch.front(); // top e_{q+k}
            for (Eigen::Index i = s - 1; i >= 1; --i)
                full[static_cast<std::size_t>(i - 1)] = Nf * full[static_cast<std::size_t>(i)];
            const double en = full[0].norm();
            if (!(en > 0)) throw JordanError("jordan_decompose: degenerate chain", q, INFINITY);
            for (auto& v : full) v /= en;
            const double res = (Nf * full[0]).norm() / std::max(1.0, normB);
            sys.chain_residual = std::max(sys.chain_residual, res);
            if (!(res <= kChainFail))
                throw JordanError("jordan_decompose: chain residual " + std::to_string(res) + " in cluster " +
                                      std::to_string(q),
                                  q, res);
            JordanChain jc;
            jc.cluster = q;
            for (auto& v : full) {
                jc.columns.push_back(static_cast<Eigen::Index>(cols.size()));
                cols.push_back(v);
            }
            sys.chains.push_back(std::move(jc));
            ++geo;
        }
        sys.mu.push_back(mu);
        sys.lambda.push_back(1.0 / mu);
        sys.multiplicity.push_back(geo);
    }
    finish_system(sys, W, cols);
    return sys;
}

JordanSystem jordan_decompose(const OpMatrix& W, const CMat& V, const CMat& J) {
    W.validate();
    const Eigen::Index N = W.size();
    require(V.rows() == N && V.cols() == N && J.rows() == N && J.cols() == N,
            "jordan_decompose: V and J must match W");
    const double res = (W.A * V - V * J).norm() / std::max(1.0, W.A.norm() * V.norm());
    require(res < 1e-10, "jordan_decompose: W V != V J");

    struct Blk {
        Eigen::Index start, size;
        cplx lambda;
    };
    std::vector<Blk> blks;
    for (Eigen::Index i = 0; i < N;) {
        Eigen::Index s = 1;
        while (i + s < N && std::abs(J(i + s - 1, i + s)) > 0.5) ++s;
        require(std::abs(J(i, i)) > 0, "jordan_decompose: zero characteristic value");
        blks.push_back({i, s, J(i, i)});
        i += s;
    }
    // group equal eigenvalues, order by modulus
    std::vector<cplx> lam;
    for (const auto& b : blks) {
        bool seen = false;
        for (auto l : lam) seen = seen || std::abs(l - b.lambda) <= 1e-12 * std::abs(l);
        if (!seen) lam.push_back(b.lambda);
    }
    std::stable_sort(lam.begin(), lam.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });

    JordanSystem sys;
    std::vector<CVecE> cols;
    for (std::size_t q = 0; q < lam.size(); ++q) {
        std::size_t geo = 0;
        for (const auto& b : blks) {
            if (std::abs(lam[q] - b.lambda) > 1e-12 * std::abs(lam[q])) continue;
            const CMat Jb = J.block(b.start, b.start, b.size, b.size);
            const CMat Nb = Jb.inverse() - (1.0 / b.lambda) * CMat::Identity(b.size, b.size);
            std::vector<CVecE> loc(static_cast<std::size_t>(b.size));
            CVecE u = CVecE::Zero(b.size);
            u[b.size - 1] = 1.0;
            loc[static_cast<std::size_t>(b.size - 1)] = u;
            for (Eigen::Index i = b.size - 1; i >= 1; --i)
                loc[static_cast<std::size_t>(i - 1)] = Nb * loc[static_cast<std::size_t>(i)];
            const CMat Vb = V.middleCols(b.start, b.size);
            JordanChain jc;
            jc.cluster = q;
            double en = (Vb * loc[0]).norm();
            for (const auto& l : loc) {
                jc.columns.push_back(static_cast<Eigen::Index>(cols.size()));
                cols.push_back(Vb * l / en);
            }
            sys.chains.push_back(std::move(jc));
            ++geo;
        }
        sys.lambda.push_back(lam[q]);
        sys.mu.push_back(1.0 / lam[q]);
        sys.multiplicity.push_back(geo);
    }
    finish_system(sys, W, cols);
    // chain relations against B = W^{-1}
    const CMat B = W.A.fullPivLu().inverse();
    const double nb = std::max(1.0, spectral_norm(B));
    for (const auto& ch : sys.chains) {
        const cplx mu = sys.mu[ch.cluster];
        for (std::size_t i = 0; i < ch.columns.size(); ++i) {
            CVecE lhs = B * sys.E.col(ch.columns[i]) - mu * sys.E.col(ch.columns[i]);
            if (i > 0) lhs -= sys.E.col(ch.columns[i - 1]);
            sys.chain_residual = std::max(sys.chain_residual, lhs.norm() / nb);
        }
    }
    return sys;
}

void biorthogonal_construct(JordanSystem& sys, const OpMatrix& W) {
    const Eigen::Index N = sys.E.rows();
    require(N == W.size(), "biorthogonal_construct: size mismatch");
    Eigen::FullPivLU<CMat> lu(sys.E);
    require(lu.isInvertible(), "biorthogonal_construct: root vectors are not complete");
    // D^H Dw E = I
    CMat D = lu.inverse().adjoint();
    for (Eigen::Index i = 0; i < N; ++i) D.row(i) /= W.w[i];
    sys.G.resize(N, N);
    for (const auto& ch : sys.chains) {
        const std::size_t k = ch.k();
        for (std::size_t i = 0; i <= k; ++i) sys.G.col(ch.columns[k - i]) = D.col(ch.columns[i]);
    }
    // P(j, i) = <e_i, g_j>
    CMat DwE = sys.E;
    for (Eigen::Index i = 0; i < N; ++i) DwE.row(i) *= W.w[i];
    const CMat P = sys.G.adjoint() * DwE;
    std::vector<std::size_t> cl(static_cast<std::size_t>(N));
    for (const auto& ch : sys.chains)
        for (auto c : ch.columns) cl[static_cast<std::size_t>(c)] = ch.cluster;
    sys.max_cross_pairing = 0.0;
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            if (cl[std::size_t(i)] != cl[std::size_t(j)])
                sys.max_cross_pairing = std::max(sys.max_cross_pairing, std::abs(P(j, i)));
    sys.min_pairing = INFINITY;
    for (const auto& ch : sys.chains) {
        const std::size_t k = ch.k();
        for (std::size_t i = 0; i <= k; ++i)
            sys.min_pairing = std::min(sys.min_pairing, std::abs(P(ch.columns[k - i], ch.columns[i])));
    }
}

// ---------------------------------------------------------------------------

cplx OperatorFunction::operator()(cplx z) const {
    cplx s{};
    for (const auto& [n, c] : coeffs) s += c * std::pow(z, n);
    return s;
}

CMat OperatorFunction::apply(const CMat& W) const {
    validate();
    const Eigen::Index N = W.rows();
    CMat out = CMat::Zero(N, N);
    if (highest() >= 0) {
        CMat P = CMat::Identity(N, N);
        for (int n = 0; n <= highest(); ++n) {
            auto it = coeffs.find(n);
            if (it != coeffs.end()) out += it->second * P;
            P = P * W;
        }
    }
    if (lowest() < 0) {
        Eigen::FullPivLU<CMat> lu(W);
        require(lu.isInvertible(), "OperatorFunction: negative powers need an invertible operator");
        const CMat Wi = lu.inverse();
        CMat P = Wi;
        for (int n = -1; n >= lowest(); --n) {
            auto it = coeffs.find(n);
            if (it != coeffs.end()) out += it->second * P;
            P = P * Wi;
        }
    }
    return out;
}

int OperatorFunction::lowest() const { return coeffs.empty() ? 0 : coeffs.begin()->first; }
int OperatorFunction::highest() const { return coeffs.empty() ? 0 : coeffs.rbegin()->first; }

void OperatorFunction::validate() const {
    require(!coeffs.empty(), "OperatorFunction: no coefficients");
    for (const auto& [n, c] : coeffs) {
        (void)n;
        require(std::isfinite(c.real()) && std::isfinite(c.imag()), "OperatorFunction: non-finite coefficient");
    }
    require(theta >= 0.0 && theta < kPi / 2, "OperatorFunction: theta must lie in [0, pi/2)");
}

namespace {

// Taylor coefficients of phi(1/zeta)^power about zeta = 1/z, in powers of zeta - 1/z.
template <class T>
std::vector<std::complex<T>> power_series_impl(const OperatorFunction& phi, std::complex<T> z, int J, T power) {
    using C = std::complex<T>;
    const auto n = static_cast<std::size_t>(J) + 1;
    auto mul = [n](const std::vector<C>& a, const std::vector<C>& b) {
        std::vector<C> c(n, C{});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; i + j < n; ++j) c[i + j] += a[i] * b[j];
        return c;
    };
    // w = 1/zeta about zeta0 = 1/z in powers of delta
    std::vector<C> w(n), zeta(n, C{});
    C zp = z;
    for (std::size_t k = 0; k < n; ++k) {
        w[k] = (k % 2 == 0 ? T(1) : T(-1)) * zp;
        zp *= z;
    }
    zeta[0] = T(1) / z;
    if (n > 1) zeta[1] = T(1);

    std::vector<C> P(n, C{});
    std::vector<C> pw(n, C{});
    pw[0] = T(1);
    for (int m = 0; m <= std::max(phi.highest(), 0); ++m) {
        auto it = phi.coeffs.find(m);
        if (m > 0 || it != phi.coeffs.end()) {
            if (it != phi.coeffs.end()) {
                C c(static_cast<T>(it->second.real()), static_cast<T>(it->second.imag()));
                for (std::size_t k = 0; k < n; ++k) P[k] += c * pw[k];
            }
        }
        pw = mul(pw, w);
    }
    std::fill(pw.begin(), pw.end(), C{});
    pw[0] = T(1);
    for (int m = 1; m <= -std::min(phi.lowest(), 0); ++m) {
        pw = mul(pw, zeta);
        auto it = phi.coeffs.find(-m);
        if (it != phi.coeffs.end()) {
            C c(static_cast<T>(it->second.real()), static_cast<T>(it->second.imag()));
            for (std::size_t k = 0; k < n; ++k) P[k] += c * pw[k];
        }
    }

    std::vector<C> Q = P;
    if (power != T(1)) {
        if (std::abs(P[0]) == T(0)) throw std::domain_error("H_series: phi vanishes at z, power undefined");
        Q[0] = std::pow(P[0], power);
        for (std::size_t k = 1; k < n; ++k) {
            C s{};
            for (std::size_t m = 1; m <= k; ++m)
                s += ((power + T(1)) * T(m) - T(k)) * P[m] * Q[k - m];
            Q[k] = s / (T(k) * P[0]);
        }
    }
    return Q;
}

template <class T>
std::vector<std::complex<T>> h_series_impl(const OperatorFunction& phi, std::complex<T> z, T t, int J, T power) {
    using C = std::complex<T>;
    const auto n = static_cast<std::size_t>(J) + 1;
    const auto Q = power_series_impl<T>(phi, z, J, power);
    std::vector<C> S(n, C{}), E(n, C{});
    for (std::size_t k = 1; k < n; ++k) S[k] = -t * Q[k];
    E[0] = T(1);
    for (std::size_t k = 1; k < n; ++k) {
        C s{};
        for (std::size_t m = 1; m <= k; ++m) s += T(m) * S[m] * E[k - m];
        E[k] = s / T(k);
    }
    return E;
}

template <class C>
bool all_finite(const std::vector<C>& v) {
    for (const auto& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

} // namespace

std::vector<cplx> H_series(const OperatorFunction& phi, cplx z, double t, int jmax, double power) {
    phi.validate();
    require(jmax >= 0, "H_series: jmax must be non-negative");
    require(std::abs(z) > 0, "H_series: z must be non-zero");
    auto h = h_series_impl<double>(phi, z, t, jmax, power);
    if (all_finite(h)) return h;
    using LC = std::complex<long double>;
    auto hl = h_series_impl<long double>(phi, LC(z.real(), z.imag()), t, jmax, power);
    std::vector<cplx> out;
    for (const auto& x : hl) out.emplace_back(static_cast<double>(x.real()), static_cast<double>(x.imag()));
    if (!all_finite(out)) throw std::overflow_error("H_series: coefficients overflow at |z| = " + std::to_string(std::abs(z)));
    return out;
}

cplx H_j(const OperatorFunction& phi, cplx z, double t, int j, double power) {
    return H_series(phi, z, t, j, power).back();
}

namespace {
cplx winner(const CVecE& u, const CVecE& v, const RVecE& w) {
    cplx s{};
    for (Eigen::Index i = 0; i < u.size(); ++i) s += w[i] * u[i] * std::conj(v[i]);
    return s;
}
} // namespace

CVecE block_A_nu(const JordanSystem& sys, const OperatorFunction& phi, double t, const CVecE& f, std::size_t nu,
                 double power) {
    require(nu + 1 < sys.blocks.size(), "block_A_nu: block index out of range");
    require(sys.G.cols() == sys.E.cols(), "block_A_nu: biorthogonal system not constructed");
    require(f.size() == sys.E.rows(), "block_A_nu: vector size mismatch");
    CVecE out = CVecE::Zero(f.size());
    for (const auto& ch : sys.chains) {
        if (ch.cluster < sys.blocks[nu] || ch.cluster >= sys.blocks[nu + 1]) continue;
        const cplx lam = sys.lambda[ch.cluster];
        const int k = static_cast<int>(ch.k());
        const auto H = H_series(phi, lam, t, k, power);
        const cplx psi = power == 1.0 ? phi(lam) : std::pow(phi(lam), power);
        const cplx damp = std::exp(-psi * t);
        std::vector<cplx> c(static_cast<std::size_t>(k) + 1);
        for (int i = 0; i <= k; ++i) {
            const CVecE& e = sys.E.col(ch.columns[std::size_t(i)]);
            const CVecE& g = sys.G.col(ch.columns[std::size_t(k - i)]);
            c[std::size_t(i)] = winner(f, g, sys.w) / winner(e, g, sys.w);
        }
        for (int i = 0; i <= k; ++i) {
            cplx ci{};
            for (int j = 0; j <= k - i; ++j) ci += H[std::size_t(j)] * c[std::size_t(i + j)];
            out += damp * ci * sys.E.col(ch.columns[std::size_t(i)]);
        }
    }
    return out;
}

SectorReport sector_check(const OperatorFunction& phi, double theta) {
    SectorReport r;
    r.value = -INFINITY;
    for (const auto& [n, c] : phi.coeffs) {
        if (n < 0 || std::abs(c) == 0.0) continue;
        double v = std::abs(std::arg(c)) + n * theta;
        if (v > r.value) {
            r.value = v;
            r.witness = n;
        }
    }
    r.pass = r.value < kPi / 2;
    return r;
}

GrowthReport growth_check(const OperatorFunction& phi, double theta0, const std::vector<double>& ray_samples) {
    require(phi.growth.has_value(), "growth_check: no growth certificate");
    require(!ray_samples.empty(), "growth_check: no radii");
    const auto& g = *phi.growth;
    GrowthReport r;
    double min_ratio = INFINITY;
    r.min_re = INFINITY;
    for (double rad : ray_samples) {
        require(rad > 0, "growth_check: radii must be positive");
        double re = phi(std::polar(rad, theta0)).real();
        r.radii.push_back(rad);
        r.re_phi.push_back(re);
        r.min_re = std::min(r.min_re, re);
        min_ratio = std::min(min_ratio, re / std::exp(g.H * std::pow(rad, g.varrho)));
    }
    r.pass = min_ratio > 0.0;
    r.C = r.pass ? 0.5 * min_ratio : 0.0;
    return r;
}

// ---------------------------------------------------------------------------

void CauchyProblem::validate() const {
    W.validate();
    phi.validate();
    require(alpha > 0.0 && std::isfinite(alpha), "CauchyProblem: alpha must be positive");
    require(f.size() == W.size(), "CauchyProblem: initial vector size mismatch");
    require(f.allFinite(), "CauchyProblem: initial vector must be finite");
    require(!times.empty(), "CauchyProblem: no output times");
    for (std::size_t i = 0; i < times.size(); ++i) {
        require(times[i] >= 0.0 && std::isfinite(times[i]), "CauchyProblem: times must be non-negative");
        if (i > 0) require(times[i] > times[i - 1], "CauchyProblem: times must increase");
    }
    require(tol > 0.0, "CauchyProblem: tol must be positive");
    if (structure) {
        require(structure->first.rows() == W.size() && structure->second.rows() == W.size(),
                "CauchyProblem: structure size mismatch");
    }
}

SeriesSolution solve_cauchy(const CauchyProblem& p) {
    p.validate();
    SeriesSolution sol;
    double theta = p.phi.theta;
    if (theta == 0.0) theta = numerical_range_sample(p.W, 64).theta;
    if (!p.phi.infinite_regular) {
        sol.sector = sector_check(p.phi, theta);
        if (!sol.sector.pass)
            throw std::domain_error("solve_cauchy: sector condition fails at n = " +
                                    std::to_string(sol.sector.witness) + " (" + std::to_string(sol.sector.value) +
                                    " >= pi/2)");
    } else {
        require(p.phi.growth.has_value(), "solve_cauchy: infinite regular part needs a growth certificate");
        std::vector<double> radii;
        for (int i = 0; i <= 40; ++i) radii.push_back(std::pow(10.0, -2.0 + 0.1 * i));
        auto g = growth_check(p.phi, p.phi.growth->theta0, radii);
        if (!g.pass) throw std::domain_error("solve_cauchy: growth condition fails on the certified ray");
        sol.sector.pass = true;
    }
    sol.system = p.structure ? jordan_decompose(p.W, p.structure->first, p.structure->second)
                             : jordan_decompose(p.W, p.jordan_tol);
    biorthogonal_construct(sol.system, p.W);

    const double power = p.alpha;
    const std::size_t nblocks = sol.system.blocks.size() - 1;
    for (double t : p.times) {
        CVecE u = CVecE::Zero(p.f.size());
        std::vector<double> norms, sums;
        double running = 0.0;
        int quiet = 0;
        std::size_t used = 0;
        for (std::size_t nu = 0; nu < nblocks; ++nu) {
            CVecE a = block_A_nu(sol.system, p.phi, t, p.f, nu, power);
            double an = p.W.norm(a);
            if (!std::isfinite(an)) throw ConvergenceError("solve_cauchy: non-finite block norm", sums);
            u += a;
            running += an;
            norms.push_back(an);
            sums.push_back(running);
            used = nu + 1;
            quiet = (an < p.tol * running) ? quiet + 1 : 0;
            if (quiet >= 3) break;
        }
        sol.times.push_back(t);
        sol.values.push_back(std::move(u));
        sol.block_norms.push_back(std::move(norms));
        sol.partial_sums.push_back(std::move(sums));
        sol.truncation.push_back(used);
    }
    return sol;
}

void write_csv(std::ostream& os, const SeriesSolution& s) {
    os << "t";
    const Eigen::Index N = s.values.empty() ? 0 : s.values.front().size();
    for (Eigen::Index i = 0; i < N; ++i) os << ",re" << i << ",im" << i;
    os << "\n";
    os.precision(17);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        os << s.times[k];
        for (Eigen::Index i = 0; i < N; ++i) os << "," << s.values[k][i].real() << "," << s.values[k][i].imag();
        os << "\n";
    }
}

ResidualReport residual_check(const SeriesSolution& sol, const CauchyProblem& p, double lo_frac, double hi_frac) {
    require(sol.times.size() >= 4, "residual_check: need at least four times");
    require(0.0 <= lo_frac && lo_frac < hi_frac && hi_frac <= 1.0, "residual_check: bad audit window");
    const double dt = sol.times[1] - sol.times[0];
    require(sol.times[0] == 0.0 && dt > 0, "residual_check: time grid must start at 0");
    for (std::size_t j = 0; j < sol.times.size(); ++j)
        require(std::abs(sol.times[j] - j * dt) <= 1e-9 * std::max(1.0, sol.times[j]),
                "residual_check: time grid must be uniform");
    TimeSeries ts;
    ts.dt = dt;
    for (const auto& v : sol.values) ts.samples.emplace_back(v.data(), v.data() + v.size());
    const auto D = frac_time_deriv(ts, 1.0 / p.alpha);
    const CMat phiW = p.phi.apply(p.W.A);
    const double T = sol.times.back();
    ResidualReport r;
    r.tail_bound = D.tail_bound;
    r.warnings = D.warnings;
    for (std::size_t j = 0; j < sol.times.size(); ++j) {
        const double t = sol.times[j];
        if (t < lo_frac * T || t > hi_frac * T) continue;
        CVecE Du = Eigen::Map<const CVecE>(D.values[j].data(), static_cast<Eigen::Index>(D.values[j].size()));
        const CVecE rhs = phiW * sol.values[j];
        double res = p.W.norm(Du - rhs) / std::max(p.W.norm(rhs), 1e-300);
        r.audit_times.push_back(t);
        r.residuals.push_back(res);
        r.max_residual = std::max(r.max_residual, res);
    }
    require(!r.audit_times.empty(), "residual_check: audit window contains no samples");
    return r;
}

UniquenessReport uniqueness_diagnostic(const CauchyProblem& p) {
    p.validate();
    OpMatrix phiW(p.phi.apply(p.W.A), p.W.w, Provenance::Assembled);
    auto nr = numerical_range_sample(phiW, 200);
    UniquenessReport r;
    r.min_re = nr.min_re;
    r.theta = nr.theta;
    r.accretive = nr.min_re > 1e-12 * std::max(1.0, phiW.op_norm()); // strict: skew phi(W) is rejected
    r.note = "proxy: accretivity of phi(W) in the weighted inner product; no full uniqueness proof is attempted";
    return r;
}

} // namespace fracwb
