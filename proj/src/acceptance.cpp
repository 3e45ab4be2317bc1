#include "slowfast/acceptance.hpp"

#include "slowfast/averaging.hpp"
#include "slowfast/config.hpp"
#include "slowfast/csv.hpp"
#include "slowfast/mc.hpp"
#include "slowfast/model.hpp"
#include "slowfast/modulus.hpp"
#include "slowfast/parallel.hpp"
#include "slowfast/ratefn.hpp"
#include "slowfast/rng.hpp"
#include "slowfast/runner.hpp"
#include "slowfast/sde.hpp"
#include "slowfast/skeleton.hpp"
#include "slowfast/stats.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace slowfast {

namespace {

namespace fs = std::filesystem;

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!ok) detail << (detail.str().empty() ? "" : "; ") << "FAILED " << what;
    }
    void note(const std::string& s) {
        detail << (detail.str().empty() ? "" : "; ") << s;
    }
};

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] =
            std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
    return g;
}

// ---- 1. modulus suite ------------------------------------------------------
Check criterion_modulus() {
    Check c;
    const int n = 10000;
    const auto grid = log_grid(1e-4, 10.0, n);

    for (double eta : {0.3, 0.1}) {
        ModulusSpec plain{eta, ModulusSpec::Kind::rho_eta};
        ModulusSpec square{eta, ModulusSpec::Kind::rho_0_eta};

        // continuity at the branch point
        const double gap = std::abs(rho(plain, eta * (1.0 + 1e-13)) - rho(plain, eta * (1.0 - 1e-13)));
        c.require(gap <= 1e-10, "rho continuity at eta");

        // non-decreasing and concave along the grid, both kinds
        for (const auto& spec : {plain, square}) {
            double prev = rho(spec, grid[0]);
            double max_drop = 0.0, max_convexity = 0.0;
            for (int i = 1; i < n; ++i) {
                const double cur = rho(spec, grid[static_cast<std::size_t>(i)]);
                max_drop = std::max(max_drop, prev - cur);
                prev = cur;
            }
            for (int i = 1; i + 1 < n; ++i) {
                const double x1 = grid[static_cast<std::size_t>(i - 1)];
                const double x2 = grid[static_cast<std::size_t>(i)];
                const double x3 = grid[static_cast<std::size_t>(i + 1)];
                const double f1 = rho(spec, x1), f2 = rho(spec, x2), f3 = rho(spec, x3);
                const double chord = f1 + (f3 - f1) * (x2 - x1) / (x3 - x1);
                max_convexity = std::max(max_convexity, chord - f2);
            }
            c.require(max_drop <= 1e-12, "rho non-decreasing");
            c.require(max_convexity <= 1e-10, "rho concave");
        }
        c.require(rho(square, 0.0) == 0.0, "rho_0_eta(0) = 0");
    }

    const auto rep = check_rho_properties(0.3, 0.1, 2.0, grid);
    c.require(rep.pass, "monotonicity-in-eta and power inequality");

    // Gronwall reproduction through the numeric path
    {
        const std::vector<double> q(8, 1.0);
        const auto bound = bihari_bound(1.0, q, std::nullopt, 1.0);
        const double rel = std::abs(bound.values.back() - std::exp(1.0)) / std::exp(1.0);
        c.require(rel <= 1e-8, "bihari linear-rho vs Gronwall");
    }
    // exponent form of the log-branch bound
    {
        const std::vector<double> q(8, 1.0);
        ModulusSpec spec{0.3, ModulusSpec::Kind::rho_eta};
        const auto bound = bihari_bound(0.01, q, spec, 1.0);
        const double closed = std::pow(0.01, std::exp(-1.0));
        c.require(std::abs(bound.values.back() - closed) <= 1e-6,
                  "bihari exponent form (quadrature vs closed form)");
        std::ostringstream os;
        os << "exponent-form bound " << bound.values.back();
        c.note(os.str());
    }
    return c;
}

// ---- 2. frozen-process contraction and moment bound ------------------------
Check criterion_frozen() {
    Check c;
    const auto model = make_builtin("LIN1D", {{"a1", 0.5}, {"b1", -0.5}, {"s1", 1.0}, {"s2", 1.0}});
    Vec x(1), y1(1), y2(1);
    x[0] = 1.0;
    y1[0] = 2.0;
    y2[0] = 0.5;

    const auto erg = fit_contraction(model, x, y1, y2, 2.0, 256, 20250801, 0.01);
    c.require(std::abs(erg.fitted_rate - 2.0) <= 0.1, "contraction rate 2.0 +- 0.1");
    c.require(erg.fitted_rate >= model.assumptions.beta1, "rate respects beta1 envelope");
    {
        std::ostringstream os;
        os << "fitted rate " << erg.fitted_rate;
        c.note(os.str());
    }

    // E|Y_t|^2 <= e^{-beta2 t} |y|^2 + (gamma/beta2)(1+|x|^2) within 3 SE
    const int n_paths = 10000;
    const int n_steps = 200;
    const double T = 2.0;
    Vec y0(1);
    y0[0] = 2.0;
    const std::vector<int> at = {50, 100, 200};  // t = 0.5, 1, 2
    using Acc = std::vector<MeanVar>;
    auto chunk = [&](std::size_t begin, std::size_t end, Acc& acc) {
        acc.assign(at.size(), MeanVar{});
        for (std::size_t p = begin; p < end; ++p) {
            PathSample path = simulate_frozen(model, x, y0, T, n_steps, 555111, p);
            for (std::size_t i = 0; i < at.size(); ++i)
                acc[i].add(path.fast.col(at[i]).squaredNorm());
        }
    };
    Acc mv = parallel_chunked_reduce<Acc>(n_paths, 256, {}, chunk, [&](Acc& a, const Acc& b) {
        if (a.empty()) a.assign(at.size(), MeanVar{});
        for (std::size_t i = 0; i < b.size(); ++i) a[i].merge(b[i]);
    });
    const auto& as_ = model.assumptions;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double t = T * at[i] / n_steps;
        const double bound = std::exp(-as_.beta2 * t) * y0.squaredNorm() +
                             (as_.gamma / as_.beta2) * (1.0 + x.squaredNorm());
        c.require(mv[i].mean <= bound + 3.0 * mv[i].standard_error(), "moment bound at t");
    }
    return c;
}

// ---- 3. invariant measure --------------------------------------------------
Check criterion_invariant() {
    Check c;
    const auto model = make_builtin("LIN1D", {{"a1", 0.5}, {"b1", -0.5}, {"s1", 1.0}, {"s2", 1.0}});
    const double oracle[2] = {0.5, 1.5};  // OU stationary E|Y|^2 = x^2 + s2^2/2
    int i = 0;
    for (double xv : {0.0, 1.0}) {
        Vec x(1);
        x[0] = xv;
        const auto est = invariant_moments(model, x, 2, 10.0, 50.0, 200, 777001 + i, 0.01);
        const double err = std::abs(est.value - oracle[i]);
        c.require(err <= 3.0 * est.se, "p=2 invariant moment within 3 SE");
        std::ostringstream os;
        os << "x=" << xv << ": " << est.value << " +- " << est.se;
        c.note(os.str());
        ++i;
    }
    return c;
}

// ---- 4. averaged drift -----------------------------------------------------
Check criterion_fbar() {
    Check c;
    const auto model = make_builtin("LIN1D", {{"a1", 0.5}, {"b1", 0.5}, {"s1", 1.0}, {"s2", 1.0}});
    const std::vector<double> grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
    const auto drift = estimate_fbar(model, grid, 10.0, 50.0, 100, 424242, 0.01);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double err = std::abs(drift.grid_f[i] - grid[i]);  // fbar(x) = x
        c.require(err <= 3.0 * std::max(drift.grid_se[i], 1e-12), "fbar matches (a1+b1)x within 3 SE");
    }

    // SE ~ budget^{-1/2} across four replicate budgets (log-log slope)
    std::vector<double> budgets, ses;
    for (int reps : {25, 50, 100, 200}) {
        const auto d = estimate_fbar(model, grid, 5.0, 20.0, reps, 99100 + reps, 0.01);
        double se_avg = 0.0;
        for (double s : d.grid_se) se_avg += s;
        se_avg /= static_cast<double>(d.grid_se.size());
        budgets.push_back(static_cast<double>(reps) * 20.0);
        ses.push_back(se_avg);
    }
    const double slope = fit_loglog(budgets, ses).slope;
    c.require(std::abs(slope + 0.5) <= 0.15, "SE log-log slope -0.5 +- 0.15");
    std::ostringstream os;
    os << "se slope " << slope;
    c.note(os.str());
    return c;
}

// ---- 5. Khasminskii auxiliary error ----------------------------------------
Check criterion_khasminskii() {
    Check c;
    // f1 == 0 and hdot1 == 0 keep the two error sources clean:
    // E int |Yhat-Ytil|^2 dt ~ (eps s1^2/2) Delta + s2^2 hdot2^2 (delta/eps).
    const auto model = make_builtin("LIN1D", {{"a1", 0.0}, {"b1", 0.0}, {"s1", 2.0}, {"s2", 1.0}});
    const double eps = 0.5;
    const int n_steps = 400;
    const int n_paths = 2000;
    Vec x0 = Vec::Zero(1), y0 = Vec::Zero(1);

    std::vector<double> xs, ys;
    int design = 0;
    for (double Delta : {0.1, 0.02}) {
        for (double doe : {0.1, 0.03, 0.01}) {
            SimConfig cfg;
            cfg.epsilon = eps;
            cfg.delta = doe * eps;
            cfg.T = 1.0;
            cfg.n_steps = n_steps;
            cfg.khasminskii_delta = Delta;
            cfg.seed = mix_seed(31337, design++);
            cfg.validate();
            Control ctrl = Control::constant(1, 1, cfg.T, 0.0, 1.0);

            auto chunk = [&](std::size_t begin, std::size_t end, MeanVar& acc) {
                for (std::size_t p = begin; p < end; ++p) {
                    PathSample hat = simulate_controlled(model, cfg, x0, y0, ctrl, p);
                    PathSample til = simulate_auxiliary(model, cfg, x0, y0, ctrl, hat);
                    double integral = 0.0;
                    for (int k = 1; k <= n_steps; ++k)
                        integral += (hat.fast.col(k) - til.fast.col(k)).squaredNorm();
                    acc.add(integral * cfg.step());
                }
            };
            MeanVar mv = parallel_chunked_reduce<MeanVar>(
                n_paths, 128, MeanVar{}, chunk, [](MeanVar& a, const MeanVar& b) { a.merge(b); });
            xs.push_back(Delta + doe);
            ys.push_back(mv.mean);
        }
    }
    const double slope = fit_loglog(xs, ys).slope;
    c.require(std::abs(slope - 1.0) <= 0.25, "khasminskii log-log slope 1.0 +- 0.25");
    std::ostringstream os;
    os << "slope " << slope;
    c.note(os.str());
    return c;
}

// ---- 6. skeleton solver ----------------------------------------------------
Check criterion_skeleton() {
    Check c;
    // geometric level errors on LIN1D drift c = 1
    {
        auto drift = AveragedDrift::from_analytic(
            [](ConstVecRef x, VecRef out) { out = x; }, "linear test drift");
        Sigma1Fn sig = [](ConstVecRef, MatRef out) { out.setIdentity(); };
        Vec x0(1);
        x0[0] = 1.0;
        Control ctrl = Control::constant(1, 2, 1.0, 0.5);
        const auto sol = solve_skeleton(drift, sig, ctrl, x0, 10, 1e-14);
        bool geometric = sol.level_errors.size() >= 3;
        for (std::size_t i = 1; i < sol.level_errors.size(); ++i) {
            if (sol.level_errors[i] < 1e-13) break;
            geometric = geometric && sol.level_errors[i] <= 0.75 * sol.level_errors[i - 1];
        }
        c.require(geometric, "dyadic error ratio <= 0.75 per level");
    }
    // exact linear ODE: X_1 = e
    {
        auto drift = AveragedDrift::from_analytic(
            [](ConstVecRef x, VecRef out) { out = x; }, "linear test drift");
        Sigma1Fn sig = [](ConstVecRef, MatRef out) { out.setIdentity(); };
        Vec x0(1);
        x0[0] = 1.0;
        Control ctrl = Control::zero(1, 1, 1.0);
        const auto sol = solve_skeleton(drift, sig, ctrl, x0, 26, 1e-7);
        const double err = std::abs(sol.terminal() - std::exp(1.0));
        c.require(err <= 1e-6, "X_1 = e within 1e-6");
        std::ostringstream os;
        os << "|X_1 - e| = " << err;
        c.note(os.str());
    }
    // time-modulus slope on a bounded-control solution
    {
        const auto model = make_builtin("LIN1D", {{"a1", 0.5}, {"b1", -0.5}});
        auto drift = builtin_averaged_drift(model, {{"a1", 0.5}, {"b1", -0.5}});
        Vec x0(1);
        x0[0] = 0.0;
        Control target = Control::constant(1, 8, 1.0, 1.0);
        std::vector<Control> seq;
        for (int k = 1; k <= 4; ++k) {
            Control h = target;
            h.hdot1.array() += 1.0 / static_cast<double>(k * k);
            seq.push_back(h);
        }
        const auto rep =
            check_skeleton_continuity(drift, model.sigma1, seq, target, x0, 1e-12, 12);
        c.require(rep.gaps_nonincreasing, "continuity gaps non-increasing");
        c.require(rep.time_modulus_slope >= 0.4, "time-modulus slope >= 0.4");
    }
    return c;
}

// ---- 7. rate function ------------------------------------------------------
RateProblem lq_problem(double c_drift, double z) {
    RateProblem prob;
    prob.drift = AveragedDrift::from_analytic(
        [c_drift](ConstVecRef x, VecRef out) { out = c_drift * x; }, "LQ drift");
    prob.sigma1 = [](ConstVecRef, MatRef out) { out.setIdentity(); };
    prob.x0 = Vec::Zero(1);
    prob.T = 1.0;
    prob.kind = RateProblem::ConstraintKind::terminal_point;
    prob.target_z = Vec::Constant(1, z);
    prob.tol = 1e-4;
    prob.M = 20;
    prob.norm_cap_N = 8.0;
    prob.euler_steps = 1024;
    return prob;
}

double lq_oracle(double c, double s, double T, double x0, double z) {
    const double G = (c == 0.0) ? s * s * T : s * s * (std::exp(2.0 * c * T) - 1.0) / (2.0 * c);
    const double m = z - x0 * std::exp(c * T);
    return m * m / (2.0 * G);
}

Check criterion_rate() {
    Check c;
    {
        const auto res = minimize_rate(lq_problem(0.0, 1.0), 2, 1);
        c.require(res.converged, "LQ c=0 converged");
        c.require(std::abs(res.value - 0.5) <= 1e-3, "LQ c=0 rate 0.5 within 1e-3");
        std::ostringstream os;
        os << "I(c=0) = " << res.value;
        c.note(os.str());
    }
    for (double cd : {-1.0, 1.0}) {
        const double oracle = lq_oracle(cd, 1.0, 1.0, 0.0, 1.0);
        const auto res = minimize_rate(lq_problem(cd, 1.0), 2, 7);
        c.require(res.converged, "LQ general converged");
        c.require(std::abs(res.value - oracle) <= 0.01 * oracle, "LQ rate within 1% of oracle");
    }
    // richer control grids can only lower the infimum (up to tolerance)
    {
        RateProblem p20 = lq_problem(0.0, 1.0);
        RateProblem p40 = lq_problem(0.0, 1.0);
        p40.M = 40;
        const auto r20 = minimize_rate(p20, 2, 11);
        const auto r40 = minimize_rate(p40, 2, 11);
        c.require(r20.value >= r40.value - 1e-3, "grid refinement monotonicity");
    }
    return c;
}

// ---- 8. variational representation -----------------------------------------
Check criterion_variational() {
    Check c;
    const auto model = make_builtin("LIN1D", {{"a1", 0.0}, {"b1", 0.0}, {"s1", 1.0}, {"s2", 1.0}});
    auto terminal = [](const PathSample& p) { return p.slow(0, p.slow.cols() - 1); };

    std::vector<Control> controls;
    for (double v : {0.0, 0.5, 1.0}) controls.push_back(Control::constant(1, 1, 1.0, v));

    for (double eps : {0.5, 0.2}) {
        SimConfig cfg = SimConfig::default_profile(eps, 1.0, 100, 0);
        // F == 0: both sides vanish
        {
            PathFunctional F = [](const PathSample&) { return 0.0; };
            const auto rep = variational_check(model, cfg, F, {Control::zero(1, 1, 1.0)}, 2000, 5);
            c.require(std::abs(rep.lhs) <= 1e-12 && std::abs(rep.min_candidate) <= 1e-12,
                      "F=0 equality");
        }
        // F == const passes through exactly
        {
            PathFunctional F = [](const PathSample&) { return 0.7; };
            const auto rep = variational_check(model, cfg, F, {Control::zero(1, 1, 1.0)}, 2000, 6);
            c.require(std::abs(rep.lhs - 0.7) <= 1e-9 && std::abs(rep.min_candidate - 0.7) <= 1e-9,
                      "F=c equality");
        }
        // nontrivial bounded F
        {
            PathFunctional F = [&](const PathSample& p) {
                return std::min(1.0, std::max(0.0, 1.0 - terminal(p)));
            };
            const auto rep = variational_check(model, cfg, F, controls, 20000, 9);
            c.require(rep.lhs_reliable, "LHS estimate reliable");
            c.require(rep.holds_within_3se, "LHS <= min candidate + 3 SE");
            std::ostringstream os;
            os << "eps=" << eps << ": lhs " << rep.lhs << " min-cand " << rep.min_candidate;
            c.note(os.str());
        }
    }
    return c;
}

// ---- 9. LDP sweep -----------------------------------------------------------
Check criterion_sweep() {
    Check c;
    const auto model = make_builtin("LIN1D", {{"a1", 0.0}, {"b1", 0.0}, {"s1", 1.0}, {"s2", 1.0}});

    // Tilt and reference rate from the optimizer (the asymptotically optimal
    // exponential change of measure).
    const auto rate = minimize_rate(lq_problem(0.0, 1.0), 2, 3);
    c.require(rate.converged && std::abs(rate.value - 0.5) <= 1e-3, "I_ref = 0.5 within 1e-3");

    Control tilt = Control::zero(1, 1, 1.0);
    if (rate.converged) tilt = rate.minimizer.resampled(1);

    SimConfig base = SimConfig::default_profile(0.5, 1.0, 100, 0);
    EventFn event = [](ConstVecRef xT) { return xT[0] >= 1.0; };
    const std::vector<double> ladder = {0.5, 0.2, 0.1, 0.05};
    const auto sweep = ldp_sweep(model, base, event, Vec::Zero(1), Vec::Zero(1), ladder, {},
                                 20000, rate.value, "tilted", tilt, 60601);

    c.require(sweep.rows.size() == 4, "four ladder rows");
    for (const auto& row : sweep.rows) c.require(row.estimable, "row estimable");
    c.require(sweep.monotone_within_1se, "|eps log P + 1/2| non-increasing within 1 SE");
    if (!sweep.rows.empty() && sweep.rows.back().estimable) {
        c.require(sweep.rows.back().gap <= 0.15, "final gap <= 0.15");
        std::ostringstream os;
        os << "gaps:";
        for (const auto& row : sweep.rows) os << " " << row.gap;
        c.note(os.str());
    }
    return c;
}

// ---- 10. flow continuity ----------------------------------------------------
Check criterion_flow() {
    Check c;
    const auto model = make_builtin("NONLIP1D", {{"s1", 1.0}, {"s2", 1.0}});
    SimConfig cfg = SimConfig::default_profile(0.1, 1.0, 200, 0);
    cfg.seed = 90210;

    std::vector<Vec> grid;
    for (double x : {1.0, 1.4, 1.2, 1.1, 1.05}) grid.push_back(Vec::Constant(1, x));
    const auto fm = simulate_flow(model, cfg, grid, Vec::Zero(1), 1000, 4.0);

    std::vector<double> seps, moments;
    for (const auto& pr : fm.pairs) {
        if (pr.i != 0) continue;  // pairs against the base point
        seps.push_back(pr.separation);
        moments.push_back(pr.moment);
    }
    const double slope = fit_loglog(seps, moments).slope;
    c.require(seps.size() == 4, "four dyadic separations");
    c.require(slope >= 2.0, "flow moment log-log slope >= 2 (one-sided)");
    std::ostringstream os;
    os << "slope " << slope;
    c.note(os.str());
    return c;
}

// ---- 11. determinism --------------------------------------------------------
Check criterion_determinism() {
    Check c;
    const fs::path base = fs::temp_directory_path() / "slowfast-determinism";
    fs::remove_all(base);

    auto cfg_text = [&](const std::string& out, int par) {
        std::ostringstream os;
        os << "[run]\nout = " << (base / out).string() << "\nparallelism = " << par << "\n"
           << "[model]\nname = LIN1D\na1 = 0.5\nb1 = -0.5\ns1 = 1\ns2 = 1\n"
           << "[sim]\nepsilon = 0.2\nt = 1\nn_steps = 100\nseed = 17\nx0 = 0.1\ny0 = -0.2\n";
        return os.str();
    };
    const std::string sweep_extra =
        "[sweep]\nepsilons = 0.5,0.2\nn_paths = 500\ni_ref = 0.5\nmethod = tilted\ntilt_hdot1 = "
        "1\nm = 1\n";
    const std::string average_extra =
        "[average]\nx_grid = -1,0,1\nt_burn = 1\nt_avg = 4\nn_reps = 16\ndt = 0.02\n";
    const std::string flow_extra = "[flow]\nx0_grid = 1.0,1.1,1.2\nn_paths = 200\np = 2\n";
    const std::string rate_extra =
        "[rate]\nconstraint = terminal_point\nz = 1\ntol = 1e-4\nm = 8\nstarts = 3\neuler_steps = "
        "256\n[skeleton]\ndrift = analytic\n";

    struct RunSpec {
        std::string command;
        std::string artifact;
        std::string extra;
    };
    const RunSpec specs[] = {{"simulate", "path.csv", ""},
                             {"frozen", "path.csv", ""},
                             {"sweep", "sweep.csv", sweep_extra},
                             {"average", "fbar.csv", average_extra},
                             {"flow", "flow.csv", flow_extra},
                             {"rate", "rate.json", rate_extra}};
    for (const RunSpec& rs : specs) {
        std::vector<std::string> bytes;
        int variant = 0;
        for (int par : {1, 2, 4}) {
            const auto outcome = run_command(
                rs.command,
                Config::parse(cfg_text(rs.command + std::to_string(variant++), par) + rs.extra));
            if (outcome.exit_code != kExitOk) {
                c.require(false, rs.command + " run failed: " + outcome.message);
                continue;
            }
            bytes.push_back(read_text_file((fs::path(outcome.out_dir) / rs.artifact).string()));
        }
        for (std::size_t i = 1; i < bytes.size(); ++i)
            c.require(bytes[i] == bytes[0],
                      rs.command + " byte-identical across parallelism settings");
    }
    fs::remove_all(base);
    return c;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    Check (*fn)();
};

}  // namespace

std::vector<CriterionResult> run_acceptance(
    const std::function<void(const CriterionResult&)>& on_done) {
    static const Criterion criteria[] = {
        {1, "modulus suite", 5.0, criterion_modulus},
        {2, "frozen-process contraction and moment bound", 30.0, criterion_frozen},
        {3, "invariant measure moments", 60.0, criterion_invariant},
        {4, "averaged drift estimation", 120.0, criterion_fbar},
        {5, "khasminskii auxiliary error scaling", 300.0, criterion_khasminskii},
        {6, "skeleton solver", 10.0, criterion_skeleton},
        {7, "rate function LQ oracles", 60.0, criterion_rate},
        {8, "variational representation", 300.0, criterion_variational},
        {9, "ldp sweep trend", 600.0, criterion_sweep},
        {10, "flow continuity moment", 120.0, criterion_flow},
        {11, "determinism across parallelism", 120.0, criterion_determinism},
    };

    std::vector<CriterionResult> results;
    for (const auto& crit : criteria) {
        CriterionResult r;
        r.id = crit.id;
        r.name = crit.name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            Check c = crit.fn();
            r.pass = c.pass;
            r.detail = c.detail.str();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (r.seconds >= crit.budget_seconds) {
            r.pass = false;
            std::ostringstream os;
            os << r.detail << (r.detail.empty() ? "" : "; ") << "runtime " << r.seconds
               << " s exceeded budget " << crit.budget_seconds << " s";
            r.detail = os.str();
        }
        if (r.detail.empty()) r.detail = "ok";
        if (on_done) on_done(r);
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace slowfast
