#pragma once

#include "slowfast/control.hpp"
#include "slowfast/model.hpp"
#include "slowfast/sde.hpp"
#include "slowfast/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace slowfast {

// Terminal event on the slow state.
using EventFn = std::function<bool(ConstVecRef)>;

struct EventEstimate {
    double p_hat = 0.0;
    double se = 0.0;
    int n_paths = 0;
    std::string method;  // "naive" | "tilted"
    double effective_sample_size = 0.0;
    double mean_weight = 0.0;  // Girsanov weight average; 1 in expectation
    std::string warning;
};

// Rare-event probability estimator. naive: indicator mean over coupled
// paths. tilted: controlled paths driven by the tilt control, reweighted by
// the exact discrete Girsanov ratio
//   exp( -(1/sqrt(eps)) int hdot . dW - (1/(2 eps)) int |hdot|^2 dt )
// computed from the stored raw noise increments, which makes the estimator
// unbiased for the same discrete chain the naive method samples.
EventEstimate estimate_event(const ModelSpec& model, const SimConfig& config,
                             const EventFn& event, ConstVecRef x0, ConstVecRef y0, int n_paths,
                             const std::string& method, const std::optional<Control>& tilt,
                             std::uint64_t seed);

struct LdpSweepRow {
    double epsilon = 0.0;
    double delta = 0.0;
    double p_hat = 0.0;
    double se = 0.0;
    double eps_log_p = 0.0;
    double eps_log_p_se = 0.0;
    double gap = 0.0;  // | eps log p + I_ref |
    std::string method;
    int n_paths = 0;
    bool estimable = false;
};

struct LdpSweep {
    std::vector<LdpSweepRow> rows;
    double I_ref = 0.0;
    // max over consecutive estimable pairs of gap increase minus combined SE;
    // <= 0 means the gap shrinks monotonically within one standard error.
    double trend_stat = 0.0;
    bool monotone_within_1se = true;
    bool has_trend = false;  // ladders of length 1 carry no trend statistic
};

// Epsilon-ladder study of eps log P(event) against -I_ref. delta_rule maps
// epsilon to delta (default corresponds to delta = eps^2).
LdpSweep ldp_sweep(const ModelSpec& model, const SimConfig& base_config, const EventFn& event,
                   ConstVecRef x0, ConstVecRef y0, const std::vector<double>& epsilons,
                   const std::function<double(double)>& delta_rule, int n_paths_per_eps,
                   double I_ref, const std::string& method, const std::optional<Control>& tilt,
                   std::uint64_t seed);

}  // namespace slowfast
