#include "slowfast/sde.hpp"

#include "slowfast/parallel.hpp"
#include "slowfast/rng.hpp"
#include "slowfast/stats.hpp"

#include <cmath>
#include <sstream>

namespace slowfast {

namespace {
constexpr double kBlowupThreshold = 1e12;
}

void SimConfig::validate() const {
    if (!(epsilon > 0.0) || !(delta > 0.0))
        throw ConfigError("sim config: epsilon and delta must be positive");
    if (!(delta < epsilon)) throw ConfigError("sim config: require delta < epsilon");
    if (!(T > 0.0)) throw ConfigError("sim config: T must be positive");
    if (n_steps < 1) throw ConfigError("sim config: n_steps must be >= 1");
    if (!(khasminskii_delta > 0.0))
        throw ConfigError("sim config: khasminskii_delta must be positive");
}

SimConfig SimConfig::default_profile(double epsilon, double T, int n_steps,
                                     std::uint64_t seed) {
    SimConfig c;
    c.epsilon = epsilon;
    c.delta = epsilon * epsilon;
    c.T = T;
    c.n_steps = n_steps;
    c.khasminskii_delta = T / 10.0;
    c.seed = seed;
    c.validate();
    return c;
}

std::string to_string(PathKind k) {
    switch (k) {
        case PathKind::coupled: return "coupled";
        case PathKind::frozen: return "frozen";
        case PathKind::controlled: return "controlled";
        case PathKind::auxiliary: return "auxiliary";
    }
    return "unknown";
}

namespace {

void resize_sample(PathSample& out, int d, int n_steps, const SimConfig& config, PathKind kind,
                   std::uint64_t path_index) {
    out.times.resize(n_steps + 1);
    out.slow.resize(d, n_steps + 1);
    out.fast.resize(d, n_steps + 1);
    out.noise_slow.resize(d, n_steps);
    out.noise_fast.resize(d, n_steps);
    out.config = config;
    out.kind = kind;
    out.path_index = path_index;
}

[[noreturn]] void throw_blowup(const char* what, int step_index) {
    std::ostringstream os;
    os << what << ": state exceeded " << kBlowupThreshold << " or became non-finite; last finite step "
       << step_index;
    throw BlowupError(os.str(), static_cast<std::size_t>(step_index));
}

bool state_ok(const Vec& v) {
    return v.allFinite() && v.lpNorm<Eigen::Infinity>() <= kBlowupThreshold;
}

struct StepWorkspace {
    Vec drift, f2v, xnext, dw1, dw2sum, xi, sdw;
    Mat sig1, sig2;
    void resize(int d) {
        drift.resize(d);
        f2v.resize(d);
        xnext.resize(d);
        dw1.resize(d);
        dw2sum.resize(d);
        xi.resize(d);
        sdw.resize(d);
        sig1.resize(d, d);
        sig2.resize(d, d);
    }
};

// Shared core for the coupled / controlled / auxiliary dynamics. `control`
// may be null (coupled). `block_slow` non-null selects the auxiliary variant:
// fast coefficients are then evaluated at block_slow->col(block_start(k)) and
// the slow equation carries no Brownian term, while the noise stream is
// consumed exactly as in the controlled run so W^2 coincides.
void run_coupled_core(PathSample& out, const ModelSpec& model, const SimConfig& config,
                      ConstVecRef x0, ConstVecRef y0, const Control* control,
                      const Mat* block_slow, PathKind kind, std::uint64_t path_index) {
    config.validate();
    const int d = model.dim_slow;
    if (x0.size() != d || y0.size() != model.dim_fast)
        throw ConfigError("simulate: initial state dimension mismatch");
    if (!x0.allFinite() || !y0.allFinite())
        throw DomainError("simulate: initial state must be finite");

    const int n = config.n_steps;
    const double h = config.step();
    const int n_sub = config.fast_substeps();
    const double h_sub = h / static_cast<double>(n_sub);
    const double sq_h = std::sqrt(h);
    const double sq_hsub = std::sqrt(h_sub);
    const double sq_eps = std::sqrt(config.epsilon);
    const double inv_delta = 1.0 / config.delta;
    const double inv_sq_delta = 1.0 / std::sqrt(config.delta);
    const double ctrl_fast_scale = 1.0 / std::sqrt(config.delta * config.epsilon);

    bool use_h1 = false, use_h2 = false;
    int steps_per_interval = 0;
    if (control) {
        control->validate();
        if (control->dim() != d) throw ConfigError("simulate_controlled: control dimension mismatch");
        if (std::abs(control->T - config.T) > 1e-12 * std::max(1.0, config.T))
            throw ConfigError("simulate_controlled: control horizon differs from config");
        if (n % control->M != 0)
            throw ConfigError(
                "simulate_controlled: control step must be an integer multiple of the slow step");
        steps_per_interval = n / control->M;
        use_h1 = control->hdot1.squaredNorm() > 0.0;
        // The auxiliary fast equation carries no control drift; only the
        // controlled system is steered through hdot2.
        use_h2 = !block_slow && control->hdot2.squaredNorm() > 0.0;
    }

    int block_steps = 0;
    if (block_slow) {
        const double dk = config.khasminskii_delta;
        if (dk > config.T + 1e-12)
            throw ConfigError("simulate_auxiliary: khasminskii_delta exceeds horizon");
        const double ratio = dk / h;
        block_steps = static_cast<int>(std::llround(ratio));
        if (block_steps < 1 || std::abs(ratio - block_steps) > 1e-9)
            throw ConfigError(
                "simulate_auxiliary: khasminskii_delta must be an integer multiple of the slow step");
        if (block_slow->cols() != n + 1 || block_slow->rows() != d)
            throw ConfigError("simulate_auxiliary: frozen slow path grid mismatch");
    }

    resize_sample(out, d, n, config, kind, path_index);
    Rng rng(config.seed, path_index);

    StepWorkspace w;
    w.resize(d);
    Vec x = x0;
    Vec y = y0;
    Vec x_block(d);
    out.times[0] = 0.0;
    out.slow.col(0) = x;
    out.fast.col(0) = y;

    for (int k = 0; k < n; ++k) {
        const int ctrl_k = control ? k / steps_per_interval : 0;
        // Fast coefficients see the block-frozen controlled slow state in the
        // auxiliary variant, the current slow state otherwise.
        if (block_slow) x_block = block_slow->col((k / block_steps) * block_steps);
        const Vec& x_for_fast = block_slow ? x_block : x;

        for (int i = 0; i < d; ++i) w.dw1[i] = rng.next_normal() * sq_h;

        // Slow increment from the state at the step start.
        model.f1(x_for_fast, y, w.drift);
        model.sigma1(x, w.sig1);
        if (use_h1) w.drift.noalias() += w.sig1 * control->hdot1.col(ctrl_k);
        w.xnext = x + h * w.drift;
        if (!block_slow) w.xnext.noalias() += sq_eps * (w.sig1 * w.dw1);

        // Fast substeps with the slow state frozen over the step.
        w.dw2sum.setZero();
        for (int j = 0; j < n_sub; ++j) {
            for (int i = 0; i < d; ++i) w.xi[i] = rng.next_normal() * sq_hsub;
            w.dw2sum += w.xi;
            model.f2(x_for_fast, y, w.f2v);
            model.sigma2(x_for_fast, y, w.sig2);
            w.drift = inv_delta * w.f2v;
            if (use_h2) w.drift.noalias() += ctrl_fast_scale * (w.sig2 * control->hdot2.col(ctrl_k));
            w.sdw.noalias() = w.sig2 * w.xi;
            y += h_sub * w.drift + inv_sq_delta * w.sdw;
        }

        x = w.xnext;
        if (!state_ok(x) || !state_ok(y)) throw_blowup("simulate", k);
        out.times[k + 1] = config.T * static_cast<double>(k + 1) / static_cast<double>(n);
        out.slow.col(k + 1) = x;
        out.fast.col(k + 1) = y;
        out.noise_slow.col(k) = w.dw1;
        out.noise_fast.col(k) = w.dw2sum;
    }
}

}  // namespace

PathSample simulate_coupled(const ModelSpec& model, const SimConfig& config, ConstVecRef x0,
                            ConstVecRef y0, std::uint64_t path_index) {
    PathSample out;
    run_coupled_core(out, model, config, x0, y0, nullptr, nullptr, PathKind::coupled, path_index);
    return out;
}

PathSample simulate_controlled(const ModelSpec& model, const SimConfig& config, ConstVecRef x0,
                               ConstVecRef y0, const Control& control,
                               std::uint64_t path_index) {
    PathSample out;
    run_coupled_core(out, model, config, x0, y0, &control, nullptr, PathKind::controlled,
                     path_index);
    return out;
}

PathSample simulate_auxiliary(const ModelSpec& model, const SimConfig& config, ConstVecRef x0,
                              ConstVecRef y0, const Control& control,
                              const PathSample& frozen_slow) {
    PathSample out;
    run_coupled_core(out, model, config, x0, y0, &control, &frozen_slow.slow,
                     PathKind::auxiliary, frozen_slow.path_index);
    return out;
}

PathSample simulate_frozen(const ModelSpec& model, ConstVecRef x_frozen, ConstVecRef y0,
                           double T, int n_steps, std::uint64_t seed,
                           std::uint64_t path_index) {
    if (!(T > 0.0)) throw ConfigError("simulate_frozen: T must be positive");
    if (n_steps < 1) throw ConfigError("simulate_frozen: n_steps must be >= 1");
    if (!x_frozen.allFinite() || !y0.allFinite())
        throw DomainError("simulate_frozen: initial state must be finite");
    const int d = model.dim_fast;
    if (y0.size() != d || x_frozen.size() != model.dim_slow)
        throw ConfigError("simulate_frozen: state dimension mismatch");

    SimConfig meta;  // provenance only; the frozen equation runs at unit scale
    meta.epsilon = 1.0;
    meta.delta = 0.5;
    meta.T = T;
    meta.n_steps = n_steps;
    meta.khasminskii_delta = T;
    meta.seed = seed;

    PathSample out;
    resize_sample(out, d, n_steps, meta, PathKind::frozen, path_index);
    Rng rng(seed, path_index);

    const double h = T / static_cast<double>(n_steps);
    const double sq_h = std::sqrt(h);
    Vec y = y0;
    Vec f2v(d), dw(d), sdw(d);
    Mat sig2(d, d);

    out.times[0] = 0.0;
    out.slow.col(0) = x_frozen;
    out.fast.col(0) = y;
    for (int k = 0; k < n_steps; ++k) {
        for (int i = 0; i < d; ++i) dw[i] = rng.next_normal() * sq_h;
        model.f2(x_frozen, y, f2v);
        model.sigma2(x_frozen, y, sig2);
        sdw.noalias() = sig2 * dw;
        y += h * f2v + sdw;
        if (!state_ok(y)) throw_blowup("simulate_frozen", k);
        out.times[k + 1] = T * static_cast<double>(k + 1) / static_cast<double>(n_steps);
        out.slow.col(k + 1) = x_frozen;
        out.fast.col(k + 1) = y;
        out.noise_fast.col(k) = dw;
        out.noise_slow.col(k).setZero();
    }
    return out;
}

double truncation_map(double x) {
    if (std::isnan(x) || x < 0.0) throw DomainError("truncation_map: argument must be >= 0");
    constexpr double a = 0.25;
    constexpr double b = 2.0;
    if (x < a) return x;
    if (x >= b) return 1.0;
    // Quintic Hermite blend: value/slope/curvature (a: 1/4, 1, 0), (b: 1, 0, 0).
    const double L = b - a;
    const double t = (x - a) / L;
    const double t3 = t * t * t;
    const double h0 = 1.0 + t3 * (-10.0 + t * (15.0 - 6.0 * t));
    const double h1 = t + t3 * (-6.0 + t * (8.0 - 3.0 * t));
    const double h3 = t3 * (10.0 + t * (-15.0 + 6.0 * t));
    return a * h0 + L * h1 + 1.0 * h3;
}

FlowMoments simulate_flow(const ModelSpec& model, const SimConfig& config,
                          const std::vector<Vec>& x0_grid, ConstVecRef y0, int n_paths,
                          double p) {
    config.validate();
    if (x0_grid.empty()) throw ConfigError("simulate_flow: empty initial grid");
    if (n_paths < 1) throw ConfigError("simulate_flow: n_paths must be >= 1");
    if (!(p > 0.0)) throw ConfigError("simulate_flow: moment order p must be positive");

    const int d = model.dim_slow;
    const int g = static_cast<int>(x0_grid.size());
    for (const auto& x0 : x0_grid) {
        if (x0.size() != d) throw ConfigError("simulate_flow: grid state dimension mismatch");
        if (!x0.allFinite()) throw DomainError("simulate_flow: grid states must be finite");
    }

    const int n = config.n_steps;
    const double h = config.step();
    const int n_sub = config.fast_substeps();
    const double h_sub = h / static_cast<double>(n_sub);
    const double sq_h = std::sqrt(h);
    const double sq_hsub = std::sqrt(h_sub);
    const double sq_eps = std::sqrt(config.epsilon);
    const double inv_delta = 1.0 / config.delta;
    const double inv_sq_delta = 1.0 / std::sqrt(config.delta);

    const int n_pairs = g * (g - 1) / 2;
    using Acc = std::vector<MeanVar>;

    auto per_chunk = [&](std::size_t begin, std::size_t end, Acc& acc) {
        acc.assign(static_cast<std::size_t>(n_pairs), MeanVar{});
        Mat X(d, g), Y(d, g);
        Vec dw1(d), xi(d), f1v(d), f2v(d), tmp(d);
        Mat sig1(d, d), sig2(d, d);
        Mat Xn(d, g);
        for (std::size_t path = begin; path < end; ++path) {
            Rng rng(config.seed, path);
            for (int i = 0; i < g; ++i) {
                X.col(i) = x0_grid[static_cast<std::size_t>(i)];
                Y.col(i) = y0;
            }
            for (int k = 0; k < n; ++k) {
                for (int i = 0; i < d; ++i) dw1[i] = rng.next_normal() * sq_h;
                for (int i = 0; i < g; ++i) {
                    model.f1(X.col(i), Y.col(i), f1v);
                    model.sigma1(X.col(i), sig1);
                    Xn.col(i) = X.col(i) + h * f1v + sq_eps * (sig1 * dw1);
                }
                for (int j = 0; j < n_sub; ++j) {
                    for (int i = 0; i < d; ++i) xi[i] = rng.next_normal() * sq_hsub;
                    for (int i = 0; i < g; ++i) {
                        model.f2(X.col(i), Y.col(i), f2v);
                        model.sigma2(X.col(i), Y.col(i), sig2);
                        tmp.noalias() = sig2 * xi;
                        Y.col(i) += h_sub * inv_delta * f2v + inv_sq_delta * tmp;
                    }
                }
                X = Xn;
                for (int i = 0; i < g; ++i) {
                    if (!state_ok(X.col(i)) || !state_ok(Y.col(i))) throw_blowup("simulate_flow", k);
                }
            }
            int idx = 0;
            for (int i = 0; i < g; ++i) {
                for (int j = i + 1; j < g; ++j, ++idx) {
                    const double dist = (X.col(i) - X.col(j)).norm();
                    acc[static_cast<std::size_t>(idx)].add(std::pow(truncation_map(dist), p));
                }
            }
        }
    };
    auto merge = [&](Acc& into, const Acc& from) {
        if (into.empty()) into.assign(static_cast<std::size_t>(n_pairs), MeanVar{});
        for (std::size_t i = 0; i < from.size(); ++i) into[i].merge(from[i]);
    };
    Acc total = parallel_chunked_reduce<Acc>(static_cast<std::size_t>(n_paths), 256, {}, per_chunk,
                                             merge);

    FlowMoments out;
    out.p = p;
    out.n_paths = n_paths;
    int idx = 0;
    for (int i = 0; i < g; ++i) {
        for (int j = i + 1; j < g; ++j, ++idx) {
            FlowMoments::Pair pr;
            pr.i = i;
            pr.j = j;
            pr.separation =
                (x0_grid[static_cast<std::size_t>(i)] - x0_grid[static_cast<std::size_t>(j)]).norm();
            pr.moment = total[static_cast<std::size_t>(idx)].mean;
            pr.se = total[static_cast<std::size_t>(idx)].standard_error();
            out.pairs.push_back(pr);
        }
    }
    return out;
}

}  // namespace slowfast
