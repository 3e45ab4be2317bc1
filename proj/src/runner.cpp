#include "slowfast/runner.hpp"

#include "slowfast/acceptance.hpp"
#include "slowfast/averaging.hpp"
#include "slowfast/csv.hpp"
#include "slowfast/mc.hpp"
#include "slowfast/model.hpp"
#include "slowfast/parallel.hpp"
#include "slowfast/ratefn.hpp"
#include "slowfast/sde.hpp"
#include "slowfast/skeleton.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>

namespace slowfast {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::map<std::string, double> model_params(const Config& cfg) {
    std::map<std::string, double> params;
    auto it = cfg.sections().find("model");
    if (it == cfg.sections().end()) return params;
    for (const auto& [key, value] : it->second) {
        if (key == "name") continue;
        params[key] = cfg.get_num("model", key);
    }
    return params;
}

ModelSpec model_from(const Config& cfg) {
    return make_builtin(cfg.get_str_or("model", "name", "LIN1D"), model_params(cfg));
}

SimConfig sim_from(const Config& cfg) {
    SimConfig sim;
    sim.epsilon = cfg.get_num_or("sim", "epsilon", 0.1);
    sim.delta = cfg.get_num_or("sim", "delta", sim.epsilon * sim.epsilon);
    sim.T = cfg.get_num_or("sim", "t", 1.0);
    sim.n_steps = static_cast<int>(cfg.get_int_or("sim", "n_steps", 200));
    sim.khasminskii_delta = cfg.get_num_or("sim", "khasminskii_delta", sim.T / 10.0);
    sim.seed = static_cast<std::uint64_t>(cfg.get_int_or("sim", "seed", 0));
    sim.validate();
    return sim;
}

Vec vec_from(const Config& cfg, const std::string& section, const std::string& key,
             double fallback) {
    if (!cfg.has(section, key)) {
        Vec v(1);
        v[0] = fallback;
        return v;
    }
    const auto list = cfg.get_list(section, key);
    Vec v(static_cast<Eigen::Index>(list.size()));
    for (std::size_t i = 0; i < list.size(); ++i) v[static_cast<Eigen::Index>(i)] = list[i];
    return v;
}

AveragedDrift drift_from(const Config& cfg, const ModelSpec& model) {
    const std::string source = cfg.get_str_or("skeleton", "drift", "analytic");
    if (source == "analytic") return builtin_averaged_drift(model, model_params(cfg));
    if (source == "estimate") {
        const auto grid = cfg.get_list("average", "x_grid");
        return estimate_fbar(model, grid, cfg.get_num_or("average", "t_burn", 10.0),
                             cfg.get_num_or("average", "t_avg", 50.0),
                             static_cast<int>(cfg.get_int_or("average", "n_reps", 100)),
                             static_cast<std::uint64_t>(cfg.get_int_or("sim", "seed", 0)),
                             cfg.get_num_or("average", "dt", 1e-2));
    }
    throw ConfigError("skeleton.drift must be 'analytic' or 'estimate'");
}

Control control_from(const Config& cfg, const std::string& section, int d, double T) {
    const int M = static_cast<int>(cfg.get_int_or(section, "m", 20));
    Control c = Control::zero(d, M, T);
    c.hdot1.setConstant(cfg.get_num_or(section, "control_hdot1", 0.0));
    c.hdot2.setConstant(cfg.get_num_or(section, "control_hdot2", 0.0));
    return c;
}

RateProblem rate_problem_from(const Config& cfg, const ModelSpec& model) {
    RateProblem prob;
    prob.drift = drift_from(cfg, model);
    prob.sigma1 = model.sigma1;
    prob.x0 = vec_from(cfg, "sim", "x0", 0.0);
    prob.T = cfg.get_num_or("sim", "t", 1.0);
    prob.M = static_cast<int>(cfg.get_int_or("rate", "m", 20));
    prob.tol = cfg.get_num_or("rate", "tol", 1e-4);
    prob.norm_cap_N = cfg.get_num_or("rate", "n_cap", 8.0);
    prob.euler_steps = static_cast<int>(cfg.get_int_or("rate", "euler_steps", 2048));
    const std::string kind = cfg.get_str_or("rate", "constraint", "terminal_point");
    if (kind == "terminal_point") {
        prob.kind = RateProblem::ConstraintKind::terminal_point;
        prob.target_z = vec_from(cfg, "rate", "z", 1.0);
    } else if (kind == "terminal_halfspace") {
        prob.kind = RateProblem::ConstraintKind::terminal_halfspace;
        prob.halfspace_a = vec_from(cfg, "rate", "a", 1.0);
        prob.halfspace_b = cfg.get_num_or("rate", "b", 1.0);
    } else {
        throw ConfigError("rate.constraint must be terminal_point or terminal_halfspace");
    }
    prob.validate();
    return prob;
}

json manifest_json(const std::string& command, const Config& cfg, double wall_seconds) {
    json m;
    m["command"] = command;
    m["config_hash"] = cfg.hash_hex();
    m["seed"] = cfg.get_int_or("sim", "seed", 0);
    m["version"] = kVersion;
    m["wall_time_s"] = wall_seconds;
    return m;
}

}  // namespace

RunOutcome run_command(const std::string& command, Config cfg) {
    RunOutcome outcome;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        cfg.set("run", "command", command);
        const int par = static_cast<int>(cfg.get_int_or("run", "parallelism", parallelism()));
        set_parallelism(par);

        // parallelism is execution metadata, not experiment identity: it must
        // not move the output directory.
        Config hash_cfg = cfg;
        hash_cfg.set("run", "parallelism", "0");
        const std::string hash = hash_cfg.hash_hex();

        const fs::path root = cfg.get_str_or("run", "out", "runs");
        const fs::path dir = root / (command + "-" + hash.substr(0, 12));
        fs::create_directories(dir);
        outcome.out_dir = dir.string();

        const ModelSpec model = model_from(cfg);

        if (command == "simulate" || command == "frozen") {
            const SimConfig sim = sim_from(cfg);
            const Vec x0 = vec_from(cfg, "sim", "x0", 0.0);
            const Vec y0 = vec_from(cfg, "sim", "y0", 0.0);
            PathSample path;
            if (command == "simulate") {
                path = simulate_coupled(model, sim, x0, y0);
            } else {
                path = simulate_frozen(model, x0, y0, sim.T, sim.n_steps, sim.seed);
            }
            write_text_file((dir / "path.csv").string(), path_to_csv(path));
        } else if (command == "average") {
            const auto grid = cfg.get_list("average", "x_grid");
            AveragedDrift drift = estimate_fbar(
                model, grid, cfg.get_num_or("average", "t_burn", 10.0),
                cfg.get_num_or("average", "t_avg", 50.0),
                static_cast<int>(cfg.get_int_or("average", "n_reps", 100)),
                static_cast<std::uint64_t>(cfg.get_int_or("sim", "seed", 0)),
                cfg.get_num_or("average", "dt", 1e-2));
            write_text_file((dir / "fbar.csv").string(), drift_table_to_csv(drift));
        } else if (command == "skeleton") {
            const AveragedDrift drift = drift_from(cfg, model);
            const Vec x0 = vec_from(cfg, "sim", "x0", 0.0);
            const Control ctrl =
                control_from(cfg, "skeleton", model.dim_slow, cfg.get_num_or("sim", "t", 1.0));
            SkeletonSolution sol =
                solve_skeleton(drift, model.sigma1, ctrl, x0,
                               static_cast<int>(cfg.get_int_or("skeleton", "n_levels", 20)));
            PathSample as_path;
            as_path.times = sol.times;
            as_path.slow = sol.path;
            as_path.fast = Mat::Zero(0, sol.path.cols());
            write_text_file((dir / "skeleton.csv").string(), path_to_csv(as_path));
        } else if (command == "rate") {
            const RateProblem prob = rate_problem_from(cfg, model);
            const RateResult res =
                minimize_rate(prob, static_cast<int>(cfg.get_int_or("rate", "starts", 8)),
                              static_cast<std::uint64_t>(cfg.get_int_or("sim", "seed", 0)));
            write_text_file((dir / "control.csv").string(), control_to_csv(res.minimizer));
            json j;
            j["value"] = res.value;
            j["residual"] = res.residual;
            j["iterations"] = res.iterations;
            j["winner_start"] = res.winner_start;
            j["converged"] = res.converged;
            j["control_csv"] = "control.csv";
            if (!res.diagnostic.empty()) j["diagnostic"] = res.diagnostic;
            write_text_file((dir / "rate.json").string(), j.dump(2) + "\n");
        } else if (command == "sweep") {
            const SimConfig sim = sim_from(cfg);
            const Vec x0 = vec_from(cfg, "sim", "x0", 0.0);
            const Vec y0 = vec_from(cfg, "sim", "y0", 0.0);
            const auto ladder = cfg.get_list("sweep", "epsilons");
            const double threshold = cfg.get_num_or("sweep", "event_threshold", 1.0);
            EventFn event = [threshold](ConstVecRef xT) { return xT[0] >= threshold; };
            const std::string method = cfg.get_str_or("sweep", "method", "tilted");

            double i_ref = 0.0;
            std::optional<Control> tilt;
            if (cfg.get_str_or("sweep", "i_ref", "rate") == "rate") {
                RateProblem prob = rate_problem_from(cfg, model);
                const RateResult res = minimize_rate(
                    prob, static_cast<int>(cfg.get_int_or("rate", "starts", 4)),
                    static_cast<std::uint64_t>(cfg.get_int_or("sim", "seed", 0)));
                if (!res.converged)
                    throw NumericError("sweep: rate problem did not converge: " + res.diagnostic);
                i_ref = res.value;
                // project the minimizer onto a control grid compatible with
                // the simulation grid
                int m_tilt = std::max(1, sim.n_steps / std::max(1, sim.n_steps / prob.M));
                while (sim.n_steps % m_tilt != 0) --m_tilt;
                tilt = res.minimizer.resampled(m_tilt);
            } else {
                i_ref = cfg.get_num("sweep", "i_ref");
                if (method == "tilted") {
                    Control c = control_from(cfg, "sweep", model.dim_slow, sim.T);
                    c.hdot1.setConstant(cfg.get_num_or("sweep", "tilt_hdot1", 1.0));
                    tilt = c;
                }
            }
            const LdpSweep sweep = ldp_sweep(
                model, sim, event, x0, y0, ladder, {},
                static_cast<int>(cfg.get_int_or("sweep", "n_paths", 10000)), i_ref, method, tilt,
                sim.seed);
            write_text_file((dir / "sweep.csv").string(), sweep_to_csv(sweep));
            json j;
            j["i_ref"] = sweep.I_ref;
            j["monotone_within_1se"] = sweep.monotone_within_1se;
            j["trend_stat"] = sweep.trend_stat;
            j["has_trend"] = sweep.has_trend;
            if (!sweep.rows.empty() && sweep.rows.back().estimable)
                j["final_gap"] = sweep.rows.back().gap;
            write_text_file((dir / "sweep_summary.json").string(), j.dump(2) + "\n");
        } else if (command == "flow") {
            const SimConfig sim = sim_from(cfg);
            const Vec y0 = vec_from(cfg, "sim", "y0", 0.0);
            const auto xs = cfg.get_list("flow", "x0_grid");
            std::vector<Vec> grid;
            for (double x : xs) {
                Vec v(1);
                v[0] = x;
                grid.push_back(v);
            }
            const FlowMoments fm =
                simulate_flow(model, sim, grid, y0,
                              static_cast<int>(cfg.get_int_or("flow", "n_paths", 2000)),
                              cfg.get_num_or("flow", "p", 4.0));
            write_text_file((dir / "flow.csv").string(), flow_to_csv(fm));
        } else if (command == "check") {
            bool all_pass = true;
            json rows = json::array();
            auto results = run_acceptance([&](const CriterionResult& r) {
                std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << ". " << r.name << " ("
                          << r.detail << ", " << r.seconds << " s)\n"
                          << std::flush;
            });
            for (const auto& r : results) {
                all_pass = all_pass && r.pass;
                json row;
                row["id"] = r.id;
                row["name"] = r.name;
                row["pass"] = r.pass;
                row["detail"] = r.detail;
                rows.push_back(row);
            }
            write_text_file((dir / "acceptance.json").string(), rows.dump(2) + "\n");
            if (!all_pass) {
                outcome.exit_code = kExitAcceptanceFailure;
                outcome.message = "acceptance criteria failed";
            }
        } else {
            throw ConfigError("unknown command: " + command);
        }

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_text_file((dir / "manifest.json").string(),
                        manifest_json(command, hash_cfg, wall).dump(2) + "\n");
        write_text_file((dir / "config.resolved").string(), hash_cfg.canonical());
    } catch (const ConfigError& e) {
        outcome.exit_code = kExitConfigError;
        outcome.message = e.what();
    } catch (const DomainError& e) {
        outcome.exit_code = kExitConfigError;
        outcome.message = e.what();
    } catch (const NumericError& e) {
        outcome.exit_code = kExitNumericError;
        outcome.message = e.what();
    }
    return outcome;
}

}  // namespace slowfast
