#pragma once

#include "slowfast/model.hpp"
#include "slowfast/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace slowfast {

// Averaged slow drift fbar(a) = int f1(a, y) mu_a(dy), either analytic (for
// built-ins) or tabulated on a 1-d grid with piecewise-linear interpolation
// (linear extension beyond the end points).
struct AveragedDrift {
    std::function<void(ConstVecRef, VecRef)> analytic;
    std::vector<double> grid_x;               // sorted, 1-d tabulation
    std::vector<double> grid_f;
    std::vector<double> grid_se;
    std::string provenance;

    bool tabulated() const { return !grid_x.empty(); }
    void eval(ConstVecRef x, VecRef out) const;
    double eval1(double x) const;

    static AveragedDrift from_analytic(std::function<void(ConstVecRef, VecRef)> fn,
                                       std::string provenance = "analytic");
    static AveragedDrift from_table(std::vector<double> x, std::vector<double> f,
                                    std::vector<double> se, std::string provenance);
};

// Analytic averaged drift of a built-in model (LIN1D: (a1+b1) x, NONLIP1D:
// psi(x) + x; the frozen fast process is an OU centred at x in both cases).
AveragedDrift builtin_averaged_drift(const ModelSpec& model,
                                     const std::map<std::string, double>& params);

// Ergodic-average estimate of fbar over a slow-state grid: each replicate
// runs the frozen process and time-averages f1(x, Y_t) over the window
// (T_burn, T_burn + T_avg]; the tabulated SE is across replicates.
AveragedDrift estimate_fbar(const ModelSpec& model, const std::vector<double>& x_grid,
                            double T_burn, double T_avg, int n_reps, std::uint64_t seed,
                            double dt = 1e-2);

struct MomentEstimate {
    double value = 0.0;
    double se = 0.0;
    int n_reps = 0;
};

// Estimate of int |y|^p mu_x(dy) for p in {2, 4}.
MomentEstimate invariant_moments(const ModelSpec& model, ConstVecRef x, int p, double T_burn,
                                 double T_avg, int n_reps, std::uint64_t seed,
                                 double dt = 1e-2);

struct ErgodicityReport {
    double fitted_rate = 0.0;           // -slope of log E|Y^x(y1)-Y^x(y2)|^2 vs t
    double beta1_expected = 0.0;
    bool respects_beta1 = false;        // fitted_rate >= beta1
    MomentEstimate stationary_second_moment;
    double burn_in = 0.0;
    int points_used = 0;
    std::string warning;
};

// Common-noise contraction fit for the frozen process.
ErgodicityReport fit_contraction(const ModelSpec& model, ConstVecRef x, ConstVecRef y1,
                                 ConstVecRef y2, double T, int n_paths, std::uint64_t seed,
                                 double dt = 1e-2);

struct ModulusTableEntry {
    double separation = 0.0;
    double gamma_hat = 0.0;  // sup ratio |fbar(x1)-fbar(x2)| / |x1-x2| over pairs <= separation
};

// Empirical modulus of a tabulated averaged drift (diagnostic).
std::vector<ModulusTableEntry> fbar_modulus(const AveragedDrift& drift,
                                            const std::vector<double>& separations);

}  // namespace slowfast
