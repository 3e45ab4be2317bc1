#pragma once

#include "slowfast/averaging.hpp"
#include "slowfast/control.hpp"
#include "slowfast/types.hpp"

#include <functional>
#include <vector>

namespace slowfast {

using Sigma1Fn = std::function<void(ConstVecRef, MatRef)>;

// Solution of the skeleton ODE
//   dX = fbar(X) dt + sigma1(X) hdot1(t) dt,  X_0 = x0,
// computed by the recursive dyadic Euler scheme: level n uses the grid with
// M * 2^n intervals and the estimated error is the sup-distance between
// consecutive levels (which decays geometrically for the built-in models).
struct SkeletonSolution {
    Vec times;  // finest-level grid
    Mat path;   // d x (K+1)
    int level = 0;
    double estimated_error = 0.0;
    std::vector<double> level_errors;

    double terminal(int component = 0) const { return path(component, path.cols() - 1); }
    // Value at time t by linear interpolation on the stored grid.
    Vec at(double t) const;
};

// Plain Euler pass on a fixed grid of K intervals (K must be a multiple of
// the control grid). Building block of the dyadic solver and of the rate
// optimizer's inner loop.
Mat skeleton_euler(const AveragedDrift& drift, const Sigma1Fn& sigma1, const Control& control,
                   ConstVecRef x0, int K);

SkeletonSolution solve_skeleton(const AveragedDrift& drift, const Sigma1Fn& sigma1,
                                const Control& control, ConstVecRef x0, int n_levels,
                                double tol = 1e-8);

// S(h) sampled on (time grid) x (initial-point grid).
struct SkeletonField {
    Vec times;
    std::vector<Mat> paths;  // one d x (K+1) block per initial point
    std::vector<Vec> x0_grid;
};

SkeletonField skeleton_map_S(const AveragedDrift& drift, const Sigma1Fn& sigma1,
                             const Control& control, const std::vector<Vec>& x0_grid,
                             int n_levels, double tol = 1e-8);

// Continuity and equicontinuity diagnostics for h -> S(h): sup-gap of S(h_n)
// against S(h) along a supplied sequence (expected from a mollification or
// 1/n-perturbation family), plus the log-log time-modulus slope of the target
// solution, which should sit near 1/2 or above.
struct SkeletonContinuityReport {
    std::vector<double> gaps;
    bool gaps_nonincreasing = false;
    double time_modulus_slope = 0.0;
    bool pass = false;
};

SkeletonContinuityReport check_skeleton_continuity(const AveragedDrift& drift,
                                                   const Sigma1Fn& sigma1,
                                                   const std::vector<Control>& sequence,
                                                   const Control& target, ConstVecRef x0,
                                                   double tol, int n_levels = 12);

}  // namespace slowfast
