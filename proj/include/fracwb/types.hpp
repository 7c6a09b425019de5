#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracwb {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

constexpr double kPi = std::numbers::pi;

/// Raised when an iterative limit (epsilon sequence, quadrature, series)
/// does not settle within its budget. Carries the history it observed.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}

    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_domain(bool cond, const std::string& msg) {
    if (!cond) throw std::domain_error(msg);
}

} // namespace fracwb
