#pragma once

#include "slowfast/control.hpp"
#include "slowfast/model.hpp"
#include "slowfast/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slowfast {

// Scale and grid parameters for a coupled simulation. The slow grid has
// n_steps uniform steps on [0,T]; the fast equation is sub-stepped with
// ceil(10*h/delta) Euler substeps per slow step so the 1/delta drift stays
// resolved. khasminskii_delta is the block length used by the auxiliary
// process.
struct SimConfig {
    double epsilon = 0.1;
    double delta = 0.01;
    double T = 1.0;
    int n_steps = 100;
    double khasminskii_delta = 0.1;
    std::uint64_t seed = 0;

    double step() const { return T / static_cast<double>(n_steps); }
    int fast_substeps() const {
        const int n = static_cast<int>(std::ceil(10.0 * step() / delta));
        return n < 1 ? 1 : n;
    }
    void validate() const;

    // Default scale profile delta = epsilon^2 (any delta = o(epsilon) works).
    static SimConfig default_profile(double epsilon, double T, int n_steps,
                                     std::uint64_t seed);
};

enum class PathKind { coupled, frozen, controlled, auxiliary };

std::string to_string(PathKind k);

// One realized trajectory on the slow grid. noise_slow / noise_fast hold the
// raw Brownian increments per slow step (the fast entry is the sum of its
// substep increments, hence again an increment of W^2 over the slow step);
// they are what the Girsanov reweighting in the mc module consumes.
struct PathSample {
    Vec times;       // n_steps + 1
    Mat slow;        // d x (n_steps + 1)
    Mat fast;        // d x (n_steps + 1)
    Mat noise_slow;  // d x n_steps
    Mat noise_fast;  // d x n_steps
    SimConfig config;
    PathKind kind = PathKind::coupled;
    std::uint64_t path_index = 0;
};

// Euler-Maruyama for the coupled slow-fast system
//   dX = f1(X,Y) dt + sqrt(eps) sigma1(X) dW1
//   dY = (1/delta) f2(X,Y) dt + (1/sqrt(delta)) sigma2(X,Y) dW2.
PathSample simulate_coupled(const ModelSpec& model, const SimConfig& config, ConstVecRef x0,
                            ConstVecRef y0, std::uint64_t path_index = 0);

// Frozen fast process at unit scale: dY = f2(x,Y) dt + sigma2(x,Y) dW.
PathSample simulate_frozen(const ModelSpec& model, ConstVecRef x_frozen, ConstVecRef y0,
                           double T, int n_steps, std::uint64_t seed,
                           std::uint64_t path_index = 0);

// Controlled system: adds sigma1(X) hdot1 dt to the slow equation and
// (1/sqrt(delta*eps)) sigma2(X,Y) hdot2 dt to the fast one. With a zero
// control and the same seed this reproduces simulate_coupled bit-exactly.
PathSample simulate_controlled(const ModelSpec& model, const SimConfig& config, ConstVecRef x0,
                               ConstVecRef y0, const Control& control,
                               std::uint64_t path_index = 0);

// Khasminskii auxiliary pair: fast coefficients are evaluated at the
// controlled slow path frozen over blocks of length khasminskii_delta,
//   dXt = f1(Xhat_{t(D)}, Yt) dt + sigma1(Xt) hdot1 dt        (no noise)
//   dYt = (1/delta) f2(Xhat_{t(D)}, Yt) dt + (1/sqrt(delta)) sigma2(...) dW2.
// frozen_slow must be the controlled path produced with the same config and
// path_index so that both processes share one W^2 realization.
PathSample simulate_auxiliary(const ModelSpec& model, const SimConfig& config, ConstVecRef x0,
                              ConstVecRef y0, const Control& control,
                              const PathSample& frozen_slow);

// Smooth monotone truncation: identity below 1/4, constantly 1 above 2,
// quintic Hermite blend in between with derivative <= 1 throughout.
double truncation_map(double x);

// Common-noise flow harness: all initial conditions share one Brownian path
// per sample; reports E[ truncation_map(|X_T(x_i) - X_T(x_j)|)^p ] with a
// standard error for every pair i < j.
struct FlowMoments {
    struct Pair {
        int i = 0, j = 0;
        double separation = 0.0;
        double moment = 0.0;
        double se = 0.0;
    };
    std::vector<Pair> pairs;
    double p = 2.0;
    int n_paths = 0;
};

FlowMoments simulate_flow(const ModelSpec& model, const SimConfig& config,
                          const std::vector<Vec>& x0_grid, ConstVecRef y0, int n_paths,
                          double p);

}  // namespace slowfast
