#include "slowfast/averaging.hpp"

#include "slowfast/parallel.hpp"
#include "slowfast/rng.hpp"
#include "slowfast/sde.hpp"
#include "slowfast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slowfast {

AveragedDrift AveragedDrift::from_analytic(std::function<void(ConstVecRef, VecRef)> fn,
                                           std::string provenance) {
    AveragedDrift d;
    d.analytic = std::move(fn);
    d.provenance = std::move(provenance);
    return d;
}

AveragedDrift AveragedDrift::from_table(std::vector<double> x, std::vector<double> f,
                                        std::vector<double> se, std::string provenance) {
    if (x.empty() || x.size() != f.size())
        throw ConfigError("averaged drift table needs matching (x, f) rows");
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) throw ConfigError("averaged drift table grid must be increasing");
    }
    AveragedDrift d;
    d.grid_x = std::move(x);
    d.grid_f = std::move(f);
    d.grid_se = std::move(se);
    d.provenance = std::move(provenance);
    return d;
}

double AveragedDrift::eval1(double x) const {
    if (analytic) {
        Vec in(1), out(1);
        in[0] = x;
        analytic(in, out);
        return out[0];
    }
    const auto& xs = grid_x;
    const auto& fs = grid_f;
    const std::size_t n = xs.size();
    if (n == 1) return fs[0];
    // Piecewise linear inside the grid, linear extension outside.
    std::size_t hi = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
    if (hi == 0) hi = 1;
    if (hi == n) hi = n - 1;
    const std::size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return fs[lo] + t * (fs[hi] - fs[lo]);
}

void AveragedDrift::eval(ConstVecRef x, VecRef out) const {
    if (analytic) {
        analytic(x, out);
        return;
    }
    if (x.size() != 1)
        throw ConfigError("tabulated averaged drift supports one-dimensional slow states");
    out[0] = eval1(x[0]);
}

AveragedDrift builtin_averaged_drift(const ModelSpec& model,
                                     const std::map<std::string, double>& params) {
    auto get = [&](const std::string& k, double fb) {
        auto it = params.find(k);
        return it == params.end() ? fb : it->second;
    };
    if (model.name == "LIN1D") {
        const double c = get("a1", 0.5) + get("b1", -0.5);
        return AveragedDrift::from_analytic(
            [c](ConstVecRef x, VecRef out) { out.noalias() = c * x; }, "analytic LIN1D");
    }
    if (model.name == "NONLIP1D") {
        const double floor = std::exp(-get("cap10", 10.0));
        return AveragedDrift::from_analytic(
            [floor](ConstVecRef x, VecRef out) {
                for (Eigen::Index i = 0; i < x.size(); ++i) {
                    const double mag = std::max(std::abs(x[i]), floor);
                    out[i] = x[i] * std::log(1.0 / mag) + x[i];
                }
            },
            "analytic NONLIP1D");
    }
    throw ConfigError("builtin_averaged_drift: no analytic drift for model " + model.name);
}

namespace {

// Time-average of a functional of the frozen path over (T_burn, T_burn+T_avg].
// value_of_state receives a per-worker scratch vector so chunk bodies stay
// race-free.
template <typename Fn>
MeanVar replicate_time_average(const ModelSpec& model, ConstVecRef x, ConstVecRef y0,
                               double T_burn, double T_avg, int n_reps, std::uint64_t seed,
                               double dt, Fn&& value_of_state) {
    if (!(T_avg > 0.0)) throw ConfigError("averaging: T_avg must be positive");
    if (T_burn < 0.0) throw ConfigError("averaging: T_burn must be nonnegative");
    if (n_reps < 1) throw ConfigError("averaging: n_reps must be >= 1");
    const double T = T_burn + T_avg;
    const int n_steps = static_cast<int>(std::ceil(T / dt));
    const int burn_steps = static_cast<int>(std::floor(T_burn / dt));

    auto per_chunk = [&](std::size_t begin, std::size_t end, MeanVar& acc) {
        Vec scratch(model.dim_slow);
        for (std::size_t rep = begin; rep < end; ++rep) {
            PathSample path = simulate_frozen(model, x, y0, T, n_steps, seed, rep);
            double sum = 0.0;
            int count = 0;
            for (int k = burn_steps + 1; k <= n_steps; ++k) {
                sum += value_of_state(path.fast.col(k), scratch);
                ++count;
            }
            acc.add(sum / static_cast<double>(count));
        }
    };
    return parallel_chunked_reduce<MeanVar>(
        static_cast<std::size_t>(n_reps), 8, MeanVar{}, per_chunk,
        [](MeanVar& a, const MeanVar& b) { a.merge(b); });
}

}  // namespace

AveragedDrift estimate_fbar(const ModelSpec& model, const std::vector<double>& x_grid,
                            double T_burn, double T_avg, int n_reps, std::uint64_t seed,
                            double dt) {
    if (x_grid.empty()) throw ConfigError("estimate_fbar: empty grid");
    if (model.dim_slow != 1)
        throw ConfigError("estimate_fbar: tabulation supports one-dimensional slow states");

    std::vector<double> xs = x_grid;
    std::sort(xs.begin(), xs.end());
    std::vector<double> fs(xs.size()), ses(xs.size());

    for (std::size_t i = 0; i < xs.size(); ++i) {
        Vec x(1);
        x[0] = xs[i];
        const Vec y0 = x;  // start at the invariant mean to shorten burn-in
        MeanVar mv = replicate_time_average(
            model, x, y0, T_burn, T_avg, n_reps, mix_seed(seed, i), dt,
            [&](ConstVecRef y, Vec& f1v) {
                model.f1(x, y, f1v);
                return f1v[0];
            });
        fs[i] = mv.mean;
        ses[i] = mv.standard_error();
    }
    AveragedDrift out = AveragedDrift::from_table(xs, fs, ses, "");
    std::ostringstream prov;
    prov << "ergodic-average(T_burn=" << T_burn << ", T_avg=" << T_avg << ", n_reps=" << n_reps
         << ", seed=" << seed << ")";
    out.provenance = prov.str();
    return out;
}

MomentEstimate invariant_moments(const ModelSpec& model, ConstVecRef x, int p, double T_burn,
                                 double T_avg, int n_reps, std::uint64_t seed, double dt) {
    if (p != 2 && p != 4) throw ConfigError("invariant_moments: p must be 2 or 4");
    const Vec y0 = Vec::Zero(model.dim_fast);
    MeanVar mv = replicate_time_average(model, x, y0, T_burn, T_avg, n_reps, seed, dt,
                                        [&](ConstVecRef y, Vec&) {
                                            const double n2 = y.squaredNorm();
                                            return p == 2 ? n2 : n2 * n2;
                                        });
    MomentEstimate est;
    est.value = mv.mean;
    est.se = mv.standard_error();
    est.n_reps = n_reps;
    return est;
}

ErgodicityReport fit_contraction(const ModelSpec& model, ConstVecRef x, ConstVecRef y1,
                                 ConstVecRef y2, double T, int n_paths, std::uint64_t seed,
                                 double dt) {
    if ((y1 - y2).norm() == 0.0) throw ConfigError("fit_contraction: y1 and y2 must differ");
    if (!(T > 0.0)) throw ConfigError("fit_contraction: T must be positive");
    if (n_paths < 1) throw ConfigError("fit_contraction: n_paths must be >= 1");

    const int n_steps = static_cast<int>(std::ceil(T / dt));
    // A fixed number of report times keeps the fit well conditioned.
    const int n_times = 8;
    std::vector<int> idx(n_times);
    for (int i = 0; i < n_times; ++i)
        idx[i] = std::max(1, (n_steps * (i + 1)) / n_times);

    using Acc = std::vector<MeanVar>;
    auto per_chunk = [&](std::size_t begin, std::size_t end, Acc& acc) {
        acc.assign(static_cast<std::size_t>(n_times), MeanVar{});
        for (std::size_t pth = begin; pth < end; ++pth) {
            // Common noise: same (seed, path) stream for both initial points.
            PathSample a = simulate_frozen(model, x, y1, T, n_steps, seed, pth);
            PathSample b = simulate_frozen(model, x, y2, T, n_steps, seed, pth);
            for (int i = 0; i < n_times; ++i) {
                const double d2 = (a.fast.col(idx[i]) - b.fast.col(idx[i])).squaredNorm();
                acc[static_cast<std::size_t>(i)].add(d2);
            }
        }
    };
    Acc mv = parallel_chunked_reduce<Acc>(
        static_cast<std::size_t>(n_paths), 16, {}, per_chunk, [&](Acc& a, const Acc& b) {
            if (a.empty()) a.assign(static_cast<std::size_t>(n_times), MeanVar{});
            for (std::size_t i = 0; i < b.size(); ++i) a[i].merge(b[i]);
        });

    ErgodicityReport rep;
    rep.beta1_expected = model.assumptions.beta1;
    std::vector<double> ts, logs;
    for (int i = 0; i < n_times; ++i) {
        const double m = mv[static_cast<std::size_t>(i)].mean;
        if (m > 1e-280) {
            ts.push_back(dt * idx[i]);
            logs.push_back(std::log(m));
        }
    }
    rep.points_used = static_cast<int>(ts.size());
    if (rep.points_used < 3)
        rep.warning = "distance underflow before 3 grid points; rate fitted from available points";
    if (rep.points_used >= 2) {
        rep.fitted_rate = -fit_line(ts, logs).slope;
    } else {
        rep.warning = "contraction fit degenerate: fewer than 2 usable points";
    }
    rep.respects_beta1 = rep.fitted_rate >= rep.beta1_expected - 1e-9;
    rep.burn_in = 0.0;
    rep.stationary_second_moment =
        invariant_moments(model, x, 2, 10.0 / model.assumptions.beta1, std::max(1.0, T),
                          std::min(n_paths, 64), seed ^ 0xabcdefULL, dt);
    return rep;
}

std::vector<ModulusTableEntry> fbar_modulus(const AveragedDrift& drift,
                                            const std::vector<double>& separations) {
    if (!drift.tabulated())
        throw ConfigError("fbar_modulus: requires a tabulated averaged drift");
    const auto& xs = drift.grid_x;
    const auto& fs = drift.grid_f;

    std::vector<ModulusTableEntry> out;
    for (double a : separations) {
        if (!(a > 0.0)) continue;
        double best = -1.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t j = i + 1; j < xs.size(); ++j) {
                const double sep = std::abs(xs[j] - xs[i]);
                if (sep <= a && sep > 0.0)
                    best = std::max(best, std::abs(fs[j] - fs[i]) / sep);
            }
        }
        if (best >= 0.0) out.push_back({a, best});  // empty bucket -> absent entry
    }
    return out;
}

}  // namespace slowfast
