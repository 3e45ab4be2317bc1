#pragma once

#include "slowfast/averaging.hpp"
#include "slowfast/control.hpp"
#include "slowfast/sde.hpp"
#include "slowfast/skeleton.hpp"
#include "slowfast/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace slowfast {

// Rate-function problem: minimize (1/2)||h||^2 over piecewise-constant
// controls subject to a constraint on the skeleton solution S(h). The fast
// channel hdot2 never enters the skeleton equation, so the minimizer keeps it
// at zero (it could only add norm).
struct RateProblem {
    AveragedDrift drift;
    Sigma1Fn sigma1;
    Vec x0;
    double T = 1.0;

    enum class ConstraintKind { terminal_point, terminal_halfspace, path_target };
    ConstraintKind kind = ConstraintKind::terminal_point;

    Vec target_z;       // terminal-point target
    double tol = 1e-4;  // admissible terminal-point / halfspace residual

    Vec halfspace_a;  // constraint a . X_T >= b
    double halfspace_b = 0.0;

    std::function<Vec(double)> path_target;  // target path f(t)
    double sup_tol = 1e-3;

    int M = 20;              // control intervals
    double norm_cap_N = 8.0; // multistart ball
    int euler_steps = 2048;  // inner fixed-grid solver resolution

    void validate() const;
    int dim() const { return static_cast<int>(x0.size()); }
};

struct RateResult {
    double value = std::numeric_limits<double>::infinity();
    Control minimizer;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int winner_start = -1;
    bool converged = false;
    std::string diagnostic;
};

// Penalized quasi-Newton minimization with finite-difference gradients and a
// quadratic penalty escalated over mu in {10, 10^2, ..., 10^6}; multistart
// over `starts` random controls in the ball of radius N/2 (start 0 is the
// zero control).
RateResult minimize_rate(const RateProblem& problem, int starts, std::uint64_t seed);

// Constraint residual of a given control under the problem, via the
// high-accuracy dyadic solver.
double rate_residual(const RateProblem& problem, const Control& control);

struct GradientCheckReport {
    double max_rel_deviation = 0.0;
    double max_abs_deviation = 0.0;
    int components = 0;
};

// Central finite differences of the full penalized objective against the
// gradient the optimizer uses internally. step must lie in [1e-7, 1e-3].
GradientCheckReport rate_gradient_check(const RateProblem& problem, const Control& control,
                                        double step, double mu);

using PathFunctional = std::function<double(const PathSample&)>;

// Monte Carlo check of the variational representation
//   -eps log E[exp(-F(X)/eps)] = inf_h E[ (1/2)||h||^2 + F(X^h) ]:
// the left side is estimated on coupled paths, the infimum is upper-bounded
// by the best of the supplied deterministic controls, and the report asserts
// the one direction finitely many controls can certify.
struct VariationalReport {
    double lhs = 0.0;
    double lhs_se = 0.0;
    bool lhs_reliable = true;
    std::vector<double> candidate_values;
    std::vector<double> candidate_ses;
    double min_candidate = 0.0;
    double min_candidate_se = 0.0;
    bool holds_within_3se = false;
};

VariationalReport variational_check(const ModelSpec& model, const SimConfig& config,
                                    const PathFunctional& F, const std::vector<Control>& controls,
                                    int n_paths, std::uint64_t seed);

}  // namespace slowfast
