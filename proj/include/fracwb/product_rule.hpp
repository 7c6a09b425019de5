#pragma once

// Product-integration kernels shared by the 1D and directional operators.
// Values are interpolated piecewise-linearly between radial nodes and the
// singular kernels are integrated exactly against each linear piece.

#include "fracwb/types.hpp"

#include <span>

namespace fracwb::detail {

/// out_j = integral_0^{r_j} v(t) (r_j - t)^{alpha-1} dt  (no 1/Gamma factor).
/// r must start at 0 and increase strictly.
CVec abel_left(std::span<const double> r, std::span<const cplx> v, double alpha);

/// out_j = integral_0^{r_j - eps} (c_j - v(t)) s(t) (r_j - t)^{-alpha-1} dt for nodes
/// with r_j >= eps and r_j > 0; other entries are left at zero. eps = 0 gives the
/// limit of the piecewise-linear model (the integrand vanishes at t = r_j).
/// `scale` may be empty, meaning s = 1.
CVec marchaud_diff_left(std::span<const double> r, std::span<const cplx> v,
                        std::span<const cplx> center, std::span<const double> scale,
                        double alpha, double eps);

/// Exact kernel moments over one linear piece, u = r_j - t in [B, A].
/// Returns weights for the values at u = A and u = B.
struct SegWeights {
    long double at_A;
    long double at_B;
};
SegWeights abel_segment(long double A, long double B, long double alpha);
SegWeights marchaud_segment(long double A, long double B, long double alpha);

bool uniformly_spaced(std::span<const double> r);

} // namespace fracwb::detail
