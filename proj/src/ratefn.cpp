#include "slowfast/ratefn.hpp"

#include "slowfast/parallel.hpp"
#include "slowfast/rng.hpp"
#include "slowfast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slowfast {

void RateProblem::validate() const {
    if (!(T > 0.0)) throw ConfigError("rate problem: T must be positive");
    if (M < 1) throw ConfigError("rate problem: M must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("rate problem: tol must be positive");
    if (x0.size() < 1) throw ConfigError("rate problem: x0 missing");
    if (kind == ConstraintKind::terminal_point && target_z.size() != x0.size())
        throw ConfigError("rate problem: terminal-point target dimension mismatch");
    if (kind == ConstraintKind::terminal_halfspace && halfspace_a.size() != x0.size())
        throw ConfigError("rate problem: halfspace normal dimension mismatch");
    if (kind == ConstraintKind::path_target && !path_target)
        throw ConfigError("rate problem: path target missing");
    if (!(norm_cap_N > 0.0)) throw ConfigError("rate problem: norm cap must be positive");
}

namespace {

Control control_from_params(const RateProblem& prob, const Vec& u) {
    Control c = Control::zero(prob.dim(), prob.M, prob.T);
    c.hdot1 = Eigen::Map<const Mat>(u.data(), prob.dim(), prob.M);
    return c;
}

// Constraint residual from a solved path on a fixed grid.
double residual_of_path(const RateProblem& prob, const Mat& path, double T) {
    switch (prob.kind) {
        case RateProblem::ConstraintKind::terminal_point:
            return (path.col(path.cols() - 1) - prob.target_z).norm();
        case RateProblem::ConstraintKind::terminal_halfspace:
            return std::max(0.0, prob.halfspace_b - prob.halfspace_a.dot(path.col(path.cols() - 1)));
        case RateProblem::ConstraintKind::path_target: {
            double sup = 0.0;
            const Eigen::Index K = path.cols() - 1;
            for (Eigen::Index k = 0; k <= K; ++k) {
                const double t = T * static_cast<double>(k) / static_cast<double>(K);
                sup = std::max(sup, (path.col(k) - prob.path_target(t)).norm());
            }
            return std::max(0.0, sup - prob.sup_tol);
        }
    }
    return 0.0;
}

struct PenalizedObjective {
    const RateProblem& prob;
    double mu;
    int K;  // inner Euler grid (multiple of M)

    double weight() const { return prob.T / static_cast<double>(prob.M); }

    // Richardson-corrected Euler pass: the O(tau) bias of the plain scheme
    // cancels between the K and 2K grids, so the inner constraint agrees with
    // the dyadic solver to second order.
    double residual(const Vec& u) const {
        const Control c = control_from_params(prob, u);
        const Mat coarse = skeleton_euler(prob.drift, prob.sigma1, c, prob.x0, K);
        const Mat fine = skeleton_euler(prob.drift, prob.sigma1, c, prob.x0, 2 * K);
        Mat corrected(coarse.rows(), coarse.cols());
        for (Eigen::Index k = 0; k < coarse.cols(); ++k)
            corrected.col(k) = 2.0 * fine.col(2 * k) - coarse.col(k);
        return residual_of_path(prob, corrected, prob.T);
    }

    double value(const Vec& u) const {
        const double r = residual(u);
        return 0.5 * u.squaredNorm() * weight() + mu * r * r;
    }

    // Exact gradient of the quadratic part plus central differences of the
    // penalty term. This is the gradient the optimizer descends.
    Vec gradient(const Vec& u) const {
        Vec g = u * weight();
        if (mu > 0.0) {
            Vec up = u;
            for (Eigen::Index i = 0; i < u.size(); ++i) {
                const double h = 1e-6 * std::max(1.0, std::abs(u[i]));
                up[i] = u[i] + h;
                const double rp = residual(up);
                up[i] = u[i] - h;
                const double rm = residual(up);
                up[i] = u[i];
                g[i] += mu * (rp * rp - rm * rm) / (2.0 * h);
                if (!std::isfinite(g[i])) {
                    std::ostringstream os;
                    os << "rate gradient non-finite in component " << i;
                    throw NumericError(os.str());
                }
            }
        }
        return g;
    }
};

struct BfgsOutcome {
    Vec x;
    double f = 0.0;
    int iterations = 0;
};

BfgsOutcome bfgs_minimize(const PenalizedObjective& obj, Vec x, int max_iters, double gtol) {
    const Eigen::Index n = x.size();
    Mat H = Mat::Identity(n, n);
    double f = obj.value(x);
    Vec g = obj.gradient(x);
    BfgsOutcome out;
    out.iterations = 0;

    for (int it = 0; it < max_iters; ++it) {
        if (g.lpNorm<Eigen::Infinity>() < gtol) break;
        Vec dir = -(H * g);
        double slope = g.dot(dir);
        if (slope >= 0.0) {  // reset on loss of descent
            H.setIdentity();
            dir = -g;
            slope = g.dot(dir);
        }
        double step = 1.0;
        double f_new = f;
        Vec x_new = x;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = x + step * dir;
            f_new = obj.value(x_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++out.iterations;
        if (!accepted) break;
        Vec g_new = obj.gradient(x_new);
        const Vec s = x_new - x;
        const Vec y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            const Mat I = Mat::Identity(n, n);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
                rho * s * s.transpose();
        }
        x = std::move(x_new);
        f = f_new;
        g = std::move(g_new);
        if (s.lpNorm<Eigen::Infinity>() < 1e-13) break;
    }
    out.x = std::move(x);
    out.f = f;
    return out;
}

int inner_grid(const RateProblem& prob) {
    const int mult = std::max(1, (prob.euler_steps + prob.M - 1) / prob.M);
    return prob.M * mult;
}

}  // namespace

double rate_residual(const RateProblem& problem, const Control& control) {
    problem.validate();
    SkeletonSolution sol = solve_skeleton(problem.drift, problem.sigma1, control, problem.x0, 24);
    return residual_of_path(problem, sol.path, problem.T);
}

RateResult minimize_rate(const RateProblem& problem, int starts, std::uint64_t seed) {
    problem.validate();
    if (starts < 1) throw ConfigError("minimize_rate: starts must be >= 1");

    const int n = problem.dim() * problem.M;
    const int K = inner_grid(problem);
    const double w = problem.T / static_cast<double>(problem.M);

    struct StartOutcome {
        double value = std::numeric_limits<double>::infinity();
        double residual = std::numeric_limits<double>::infinity();
        Vec u;
        int iterations = 0;
        bool ok = false;
    };

    std::vector<StartOutcome> outcomes(static_cast<std::size_t>(starts));
    auto run_start = [&](std::size_t begin, std::size_t end, int&) {
        for (std::size_t s = begin; s < end; ++s) {
            Vec u = Vec::Zero(n);
            if (s > 0) {
                // Uniform direction in the ball of radius N/2.
                Rng rng(mix_seed(seed, s));
                for (int i = 0; i < n; ++i) u[i] = rng.next_normal();
                const double norm_h = std::sqrt(u.squaredNorm() * w);
                const double radius = 0.5 * problem.norm_cap_N * rng.next_uniform_pos();
                if (norm_h > 0.0) u *= radius / norm_h;
            }
            StartOutcome& oc = outcomes[s];
            try {
                for (double mu : {1e1, 1e2, 1e3, 1e4, 1e5, 1e6}) {
                    PenalizedObjective obj{problem, mu, K};
                    BfgsOutcome bo = bfgs_minimize(obj, u, 200, 1e-8 * std::max(1.0, mu * 1e-4));
                    u = std::move(bo.x);
                    oc.iterations += bo.iterations;
                    PenalizedObjective probe{problem, 0.0, K};
                    if (probe.residual(u) <= 0.1 * problem.tol) break;
                }
                oc.u = u;
                oc.residual = rate_residual(problem, control_from_params(problem, u));
                oc.value = 0.5 * u.squaredNorm() * w;
                // Admissible controls live in the norm ball B_N.
                const bool in_ball = 2.0 * oc.value <= problem.norm_cap_N * problem.norm_cap_N;
                oc.ok = oc.residual <= problem.tol && in_ball;
            } catch (const NumericError&) {
                oc.ok = false;
            }
        }
    };
    parallel_chunked_reduce<int>(static_cast<std::size_t>(starts), 1, 0, run_start,
                                 [](int&, const int&) {});

    RateResult res;
    for (int s = 0; s < starts; ++s) {
        const auto& oc = outcomes[static_cast<std::size_t>(s)];
        res.iterations += oc.iterations;
        if (oc.ok && oc.value < res.value) {
            res.value = oc.value;
            res.residual = oc.residual;
            res.minimizer = control_from_params(problem, oc.u);
            res.winner_start = s;
            res.converged = true;
        }
    }
    if (!res.converged) {
        res.value = std::numeric_limits<double>::infinity();
        double best_r = std::numeric_limits<double>::infinity();
        for (const auto& oc : outcomes) best_r = std::min(best_r, oc.residual);
        std::ostringstream os;
        os << "no start met residual tolerance " << problem.tol << " inside B_N (N="
           << problem.norm_cap_N << ") after penalty escalation; best residual " << best_r
           << " (inf over empty admissible set)";
        res.diagnostic = os.str();
        res.minimizer = Control::zero(problem.dim(), problem.M, problem.T);
    }
    return res;
}

GradientCheckReport rate_gradient_check(const RateProblem& problem, const Control& control,
                                        double step, double mu) {
    problem.validate();
    control.validate();
    if (!(step >= 1e-7 && step <= 1e-3))
        throw ConfigError("rate_gradient_check: step must lie in [1e-7, 1e-3]");
    if (control.M != problem.M || control.dim() != problem.dim())
        throw ConfigError("rate_gradient_check: control grid mismatch");

    const int K = inner_grid(problem);
    PenalizedObjective obj{problem, mu, K};
    Vec u = Eigen::Map<const Vec>(control.hdot1.data(), control.hdot1.size());
    const Vec internal = obj.gradient(u);

    GradientCheckReport rep;
    rep.components = static_cast<int>(u.size());
    Vec up = u;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        up[i] = u[i] + step;
        const double fp = obj.value(up);
        up[i] = u[i] - step;
        const double fm = obj.value(up);
        up[i] = u[i];
        const double fd = (fp - fm) / (2.0 * step);
        const double dev = std::abs(fd - internal[i]);
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
        const double scale = std::max({1e-12, std::abs(fd), std::abs(internal[i])});
        rep.max_rel_deviation = std::max(rep.max_rel_deviation, dev / scale);
    }
    return rep;
}

VariationalReport variational_check(const ModelSpec& model, const SimConfig& config,
                                    const PathFunctional& F, const std::vector<Control>& controls,
                                    int n_paths, std::uint64_t seed) {
    config.validate();
    if (!F) throw ConfigError("variational_check: functional missing");
    if (n_paths < 2) throw ConfigError("variational_check: n_paths must be >= 2");
    const double eps = config.epsilon;
    const Vec x0 = Vec::Zero(model.dim_slow);
    const Vec y0 = Vec::Zero(model.dim_fast);

    // Left side: -eps log E exp(-F/eps) over uncontrolled paths.
    SimConfig lhs_cfg = config;
    lhs_cfg.seed = mix_seed(seed, 0);
    auto lhs_chunk = [&](std::size_t begin, std::size_t end, MeanVar& acc) {
        for (std::size_t p = begin; p < end; ++p) {
            PathSample path = simulate_coupled(model, lhs_cfg, x0, y0, p);
            acc.add(std::exp(-F(path) / eps));
        }
    };
    MeanVar lhs_mv = parallel_chunked_reduce<MeanVar>(
        static_cast<std::size_t>(n_paths), 512, MeanVar{}, lhs_chunk,
        [](MeanVar& a, const MeanVar& b) { a.merge(b); });

    VariationalReport rep;
    if (!(lhs_mv.mean > 0.0) || lhs_mv.standard_error() > 0.5 * lhs_mv.mean) {
        rep.lhs_reliable = false;
    }
    rep.lhs = -eps * std::log(lhs_mv.mean);
    rep.lhs_se = eps * lhs_mv.standard_error() / lhs_mv.mean;

    // Right side: each control gives the upper bound (1/2)||h||^2 + E F(X^h).
    rep.min_candidate = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < controls.size(); ++ci) {
        SimConfig cfg = config;
        cfg.seed = mix_seed(seed, 1 + ci);
        const Control& h = controls[ci];
        h.validate();
        auto chunk = [&](std::size_t begin, std::size_t end, MeanVar& acc) {
            for (std::size_t p = begin; p < end; ++p) {
                PathSample path = simulate_controlled(model, cfg, x0, y0, h, p);
                acc.add(F(path));
            }
        };
        MeanVar mv = parallel_chunked_reduce<MeanVar>(
            static_cast<std::size_t>(n_paths), 512, MeanVar{}, chunk,
            [](MeanVar& a, const MeanVar& b) { a.merge(b); });
        const double val = 0.5 * h.norm_sq() + mv.mean;
        rep.candidate_values.push_back(val);
        rep.candidate_ses.push_back(mv.standard_error());
        if (val < rep.min_candidate) {
            rep.min_candidate = val;
            rep.min_candidate_se = mv.standard_error();
        }
    }
    const double slack =
        3.0 * std::sqrt(rep.lhs_se * rep.lhs_se + rep.min_candidate_se * rep.min_candidate_se);
    rep.holds_within_3se = rep.lhs <= rep.min_candidate + slack;
    return rep;
}

}  // namespace slowfast
