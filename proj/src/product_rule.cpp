#include "fracwb/product_rule.hpp"

#include <cmath>
#include <limits>

namespace fracwb::detail {

namespace {

using ld = long double;

// A^p - B^p for 0 <= B < A without cancellation.
ld pow_diff(ld A, ld B, ld p) {
    if (B == 0) return std::pow(A, p);
    return -std::pow(A, p) * std::expm1(p * std::log1p(-(A - B) / A));
}

} // namespace

SegWeights abel_segment(ld A, ld B, ld alpha) {
    ld m0 = pow_diff(A, B, alpha) / alpha;
    ld m1 = pow_diff(A, B, alpha + 1) / (alpha + 1) - B * m0;
    ld wa = m1 / (A - B);
    return {wa, m0 - wa};
}

SegWeights marchaud_segment(ld A, ld B, ld alpha) {
    if (B == 0) {
        ld wa = std::pow(A, -alpha) / (1 - alpha);
        return {wa, std::numeric_limits<ld>::infinity()};
    }
    ld m0 = -pow_diff(A, B, -alpha) / alpha;
    ld m1 = pow_diff(A, B, 1 - alpha) / (1 - alpha) - B * m0;
    ld wa = m1 / (A - B);
    return {wa, m0 - wa};
}

bool uniformly_spaced(std::span<const double> r) {
    if (r.size() < 2) return true;
    double h = r[1] - r[0];
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        if (std::abs((r[i + 1] - r[i]) - h) > 1e-9 * h) return false;
    }
    return true;
}

CVec abel_left(std::span<const double> r, std::span<const cplx> v, double alpha) {
    require(r.size() == v.size(), "abel_left: size mismatch");
    require(!r.empty(), "abel_left: empty grid");
    const std::size_t n = r.size();
    CVec out(n, cplx{});
    if (n < 2) return out;

    if (uniformly_spaced(r)) {
        // Toeplitz weights on unit spacing, scaled by h^alpha.
        const ld h = static_cast<ld>(r[n - 1] - r[0]) / static_cast<ld>(n - 1);
        const ld scale = std::pow(h, static_cast<ld>(alpha));
        std::vector<double> wa(n), wfull(n);
        std::vector<ld> ca(n + 1, 0), cb(n + 1, 0);
        for (std::size_t m = 1; m < n; ++m) {
            auto w = abel_segment(static_cast<ld>(m), static_cast<ld>(m - 1), alpha);
            ca[m] = w.at_A;
            cb[m] = w.at_B;
        }
        for (std::size_t m = 0; m < n; ++m) {
            wa[m] = static_cast<double>(ca[m] * scale);
            ld full = (m >= 1 ? ca[m] : 0) + (m + 1 < n ? cb[m + 1] : 0);
            wfull[m] = static_cast<double>(full * scale);
        }
        for (std::size_t j = 1; j < n; ++j) {
            cplx acc = wa[j] * v[0];
            for (std::size_t k = 1; k < j; ++k) acc += wfull[j - k] * v[k];
            acc += static_cast<double>(cb[1] * scale) * v[j];
            out[j] = acc;
        }
        return out;
    }

    for (std::size_t j = 1; j < n; ++j) {
        cplx acc{};
        for (std::size_t k = 0; k < j; ++k) {
            auto w = abel_segment(static_cast<ld>(r[j]) - r[k], static_cast<ld>(r[j]) - r[k + 1], alpha);
            acc += static_cast<double>(w.at_A) * v[k] + static_cast<double>(w.at_B) * v[k + 1];
        }
        out[j] = acc;
    }
    return out;
}

CVec marchaud_diff_left(std::span<const double> r, std::span<const cplx> v,
                        std::span<const cplx> center, std::span<const double> scale,
                        double alpha, double eps) {
    const std::size_t n = r.size();
    require(v.size() == n && center.size() == n, "marchaud_diff_left: size mismatch");
    require(scale.empty() || scale.size() == n, "marchaud_diff_left: scale size mismatch");
    require(eps >= 0.0, "marchaud_diff_left: eps must be non-negative");
    CVec out(n, cplx{});
    if (n < 2) return out;

    auto s = [&](std::size_t k) { return scale.empty() ? 1.0 : scale[k]; };
    auto diff = [&](std::size_t j, std::size_t k) { return (center[j] - v[k]) * s(k); };

    const bool uniform = uniformly_spaced(r);
    std::vector<double> ta, tb;
    double h = 0.0;
    if (uniform) {
        h = (r[n - 1] - r[0]) / static_cast<double>(n - 1);
        const ld sc = std::pow(static_cast<ld>(h), -static_cast<ld>(alpha));
        ta.assign(n, 0.0);
        tb.assign(n, 0.0);
        for (std::size_t m = 1; m < n; ++m) {
            auto w = marchaud_segment(static_cast<ld>(m), static_cast<ld>(m - 1), alpha);
            ta[m] = static_cast<double>(w.at_A * sc);
            tb[m] = m >= 2 ? static_cast<double>(w.at_B * sc) : 0.0;
        }
    }

    for (std::size_t j = 1; j < n; ++j) {
        const double rj = r[j];
        if (rj < eps || rj <= 0.0) continue;
        const double cut = rj - eps;
        cplx acc{};
        std::size_t k = 0;
        // Full pieces [r_k, r_{k+1}] with r_{k+1} <= cut.
        for (; k < j && r[k + 1] <= cut; ++k) {
            const bool last = (k + 1 == j);
            if (uniform) {
                const std::size_t m = j - k;
                acc += ta[m] * diff(j, k);
                if (!last) acc += tb[m] * diff(j, k + 1);
            } else {
                auto w = marchaud_segment(static_cast<ld>(rj) - r[k], static_cast<ld>(rj) - r[k + 1], alpha);
                acc += static_cast<double>(w.at_A) * diff(j, k);
                if (!last) acc += static_cast<double>(w.at_B) * diff(j, k + 1);
            }
        }
        // Partial piece [r_k, cut].
        if (k < j && r[k] < cut) {
            const double theta = (cut - r[k]) / (r[k + 1] - r[k]);
            const cplx h_cut = (1.0 - theta) * diff(j, k) + theta * diff(j, k + 1);
            auto w = marchaud_segment(static_cast<ld>(rj) - r[k], static_cast<ld>(eps), alpha);
            acc += static_cast<double>(w.at_A) * diff(j, k) + static_cast<double>(w.at_B) * h_cut;
        }
        out[j] = acc;
    }
    return out;
}

} // namespace fracwb::detail
