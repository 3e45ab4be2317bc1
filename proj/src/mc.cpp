#include "slowfast/mc.hpp"

#include "slowfast/parallel.hpp"
#include "slowfast/rng.hpp"
#include "slowfast/stats.hpp"

#include <cmath>
#include <sstream>

namespace slowfast {

namespace {

struct TiltAccumulator {
    MeanVar estimate;   // indicator * weight
    MeanVar weight;     // weight alone
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    long hits = 0;

    void merge(const TiltAccumulator& o) {
        estimate.merge(o.estimate);
        weight.merge(o.weight);
        sum_w += o.sum_w;
        sum_w2 += o.sum_w2;
        hits += o.hits;
    }
};

double girsanov_log_weight(const PathSample& path, const Control& tilt) {
    const int n = path.config.n_steps;
    const int per = n / tilt.M;
    const double eps = path.config.epsilon;
    double stoch = 0.0;
    for (int k = 0; k < n; ++k) {
        const int ck = k / per;
        stoch += tilt.hdot1.col(ck).dot(path.noise_slow.col(k)) +
                 tilt.hdot2.col(ck).dot(path.noise_fast.col(k));
    }
    return -stoch / std::sqrt(eps) - tilt.norm_sq() / (2.0 * eps);
}

}  // namespace

EventEstimate estimate_event(const ModelSpec& model, const SimConfig& config,
                             const EventFn& event, ConstVecRef x0, ConstVecRef y0, int n_paths,
                             const std::string& method, const std::optional<Control>& tilt,
                             std::uint64_t seed) {
    config.validate();
    if (!event) throw ConfigError("estimate_event: event predicate missing");
    if (n_paths < 100) throw ConfigError("estimate_event: n_paths must be >= 100");
    if (method != "naive" && method != "tilted")
        throw ConfigError("estimate_event: method must be 'naive' or 'tilted'");
    if (method == "tilted" && !tilt)
        throw ConfigError("estimate_event: tilted method requires a tilt control");

    SimConfig cfg = config;
    cfg.seed = seed;

    EventEstimate out;
    out.method = method;
    out.n_paths = n_paths;

    if (method == "naive") {
        auto chunk = [&](std::size_t begin, std::size_t end, MeanVar& acc) {
            for (std::size_t p = begin; p < end; ++p) {
                PathSample path = simulate_coupled(model, cfg, x0, y0, p);
                acc.add(event(path.slow.col(path.slow.cols() - 1)) ? 1.0 : 0.0);
            }
        };
        MeanVar mv = parallel_chunked_reduce<MeanVar>(
            static_cast<std::size_t>(n_paths), 1024, MeanVar{}, chunk,
            [](MeanVar& a, const MeanVar& b) { a.merge(b); });
        out.p_hat = mv.mean;
        out.se = mv.standard_error();
        out.effective_sample_size = static_cast<double>(n_paths);
        out.mean_weight = 1.0;
        if (mv.mean == 0.0) out.warning = "no hits; event unestimable at this budget";
        return out;
    }

    const Control& h = *tilt;
    h.validate();
    if (config.n_steps % h.M != 0)
        throw ConfigError("estimate_event: tilt control grid incompatible with slow grid");

    auto chunk = [&](std::size_t begin, std::size_t end, TiltAccumulator& acc) {
        for (std::size_t p = begin; p < end; ++p) {
            PathSample path = simulate_controlled(model, cfg, x0, y0, h, p);
            const double w = std::exp(girsanov_log_weight(path, h));
            const bool in = event(path.slow.col(path.slow.cols() - 1));
            acc.estimate.add(in ? w : 0.0);
            acc.weight.add(w);
            acc.sum_w += w;
            acc.sum_w2 += w * w;
            if (in) ++acc.hits;
        }
    };
    TiltAccumulator acc = parallel_chunked_reduce<TiltAccumulator>(
        static_cast<std::size_t>(n_paths), 1024, TiltAccumulator{}, chunk,
        [](TiltAccumulator& a, const TiltAccumulator& b) { a.merge(b); });

    out.p_hat = acc.estimate.mean;
    out.se = acc.estimate.standard_error();
    out.mean_weight = acc.weight.mean;
    out.effective_sample_size = acc.sum_w2 > 0.0 ? acc.sum_w * acc.sum_w / acc.sum_w2 : 0.0;
    if (acc.hits == 0) {
        std::ostringstream os;
        os << "zero hits under tilting; effective sample size " << out.effective_sample_size;
        out.warning = os.str();
    }
    return out;
}

LdpSweep ldp_sweep(const ModelSpec& model, const SimConfig& base_config, const EventFn& event,
                   ConstVecRef x0, ConstVecRef y0, const std::vector<double>& epsilons,
                   const std::function<double(double)>& delta_rule, int n_paths_per_eps,
                   double I_ref, const std::string& method, const std::optional<Control>& tilt,
                   std::uint64_t seed) {
    if (epsilons.empty()) throw ConfigError("ldp_sweep: empty epsilon ladder");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw ConfigError("ldp_sweep: epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw ConfigError("ldp_sweep: epsilon ladder must be strictly decreasing");
    }

    LdpSweep sweep;
    sweep.I_ref = I_ref;
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        const double eps = epsilons[i];
        SimConfig cfg = base_config;
        cfg.epsilon = eps;
        cfg.delta = delta_rule ? delta_rule(eps) : eps * eps;
        cfg.validate();

        LdpSweepRow row;
        row.epsilon = eps;
        row.delta = cfg.delta;
        row.method = method;
        row.n_paths = n_paths_per_eps;
        const EventEstimate est = estimate_event(model, cfg, event, x0, y0, n_paths_per_eps,
                                                 method, tilt, mix_seed(seed, i));
        row.p_hat = est.p_hat;
        row.se = est.se;
        // probabilities below 1e-9 at desk scale are declared unestimable
        row.estimable = est.p_hat > 1e-9;
        if (row.estimable) {
            row.eps_log_p = eps * std::log(est.p_hat);
            row.eps_log_p_se = eps * est.se / est.p_hat;
            row.gap = std::abs(row.eps_log_p + I_ref);
        }
        sweep.rows.push_back(row);
    }

    // Trend of |gap| along the ladder, with one-standard-error slack.
    const LdpSweepRow* prev = nullptr;
    for (const auto& row : sweep.rows) {
        if (!row.estimable) continue;
        if (prev) {
            sweep.has_trend = true;
            const double slack = std::sqrt(row.eps_log_p_se * row.eps_log_p_se +
                                           prev->eps_log_p_se * prev->eps_log_p_se);
            const double increase = row.gap - prev->gap - slack;
            sweep.trend_stat = std::max(sweep.trend_stat, increase);
            if (increase > 0.0) sweep.monotone_within_1se = false;
        }
        prev = &row;
    }
    return sweep;
}

}  // namespace slowfast
