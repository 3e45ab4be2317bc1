#pragma once

#include "slowfast/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace slowfast {

// Concavity modulus family
//
//   rho_eta(x) = x log(1/x)                                   for x <= eta,
//                eta log(1/eta) + (log(1/eta) - 1)(x - eta)   for x >  eta,
//
// with 0 < eta < 1/e, plus the square transform
// rho_{0,eta}(x) = rho_eta(sqrt(x))^2, which is again concave, non-decreasing
// and vanishes at 0.
struct ModulusSpec {
    enum class Kind { rho_eta, rho_0_eta };
    double eta = 0.3;
    Kind kind = Kind::rho_eta;
};

inline constexpr double kInvE = 0.36787944117144233;  // 1/e

// Throws ConfigError unless 0 < eta < 1/e.
void validate_eta(double eta);

// Piecewise-exact evaluation; throws DomainError on x < 0 or NaN.
double rho(const ModulusSpec& spec, double x);
double rho_eta(double eta, double x);

// Comparison bound of the Bihari inequality
//   f(t) <= g^{-1}( g(f(0)) + int_0^t q(s) ds ),  g(x) = int_{x0}^x dy/rho(y),
// evaluated numerically (adaptive Simpson for g, bisection for g^{-1}).
// q is piecewise constant on a uniform grid over [0,T]; the bound is returned
// at the grid nodes. A disengaged `modulus` selects the linear rho(y) = y, in
// which case the bound reproduces Gronwall f(0)*exp(int q) through the same
// numeric path.
struct BihariBound {
    std::vector<double> times;
    std::vector<double> values;
};

BihariBound bihari_bound(double f0, const std::vector<double>& q,
                         const std::optional<ModulusSpec>& modulus, double T);

// Grid report for the rho_eta property set: monotonicity in eta and the power
// inequality x^p rho_eta(x) <= rho_eta(x^{1+p}), which holds for x in [0,1]
// and sharpens to equality times 1/(1+p) on the logarithmic branch.
struct RhoPropertyReport {
    double max_monotonicity_violation = 0.0;  // rho_{eta1} - rho_{eta2}, eta1 > eta2
    double max_power_violation = 0.0;         // x^p rho(x) - rho(x^{1+p}), x in [0,1]
    double max_power_sharp_violation = 0.0;   // x^p rho(x) - rho(x^{1+p})/(1+p), x <= eta^{1/(1+p)} branch
    std::size_t points_checked = 0;
    std::size_t power_points_checked = 0;
    bool pass = false;
};

RhoPropertyReport check_rho_properties(double eta1, double eta2, double p,
                                       const std::vector<double>& grid);

// Adaptive composite Simpson integration to absolute tolerance; exposed for
// reuse by tests that need independent quadrature oracles.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol);

}  // namespace slowfast
