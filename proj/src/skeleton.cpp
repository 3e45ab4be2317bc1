#include "slowfast/skeleton.hpp"

#include "slowfast/stats.hpp"

#include <cmath>
#include <sstream>

namespace slowfast {

Vec SkeletonSolution::at(double t) const {
    const Eigen::Index n = times.size();
    if (t <= times[0]) return path.col(0);
    if (t >= times[n - 1]) return path.col(n - 1);
    const double dt = times[1] - times[0];
    const Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(t / dt), n - 2);
    const double w = (t - times[k]) / dt;
    return (1.0 - w) * path.col(k) + w * path.col(k + 1);
}

Mat skeleton_euler(const AveragedDrift& drift, const Sigma1Fn& sigma1, const Control& control,
                   ConstVecRef x0, int K) {
    control.validate();
    if (K < control.M || K % control.M != 0)
        throw ConfigError("skeleton_euler: grid must refine the control grid");
    const int d = static_cast<int>(x0.size());
    const double tau = control.T / static_cast<double>(K);
    const int per = K / control.M;
    const bool use_h = control.hdot1.squaredNorm() > 0.0;

    Mat path(d, K + 1);
    Vec x = x0;
    Vec fx(d);
    Mat sig(d, d);
    path.col(0) = x;
    for (int k = 0; k < K; ++k) {
        drift.eval(x, fx);
        if (use_h) {
            sigma1(x, sig);
            fx.noalias() += sig * control.hdot1.col(k / per);
        }
        x += tau * fx;
        if (!x.allFinite()) {
            std::ostringstream os;
            os << "skeleton_euler: non-finite state at step " << k;
            throw NumericError(os.str());
        }
        path.col(k + 1) = x;
    }
    return path;
}

SkeletonSolution solve_skeleton(const AveragedDrift& drift, const Sigma1Fn& sigma1,
                                const Control& control, ConstVecRef x0, int n_levels,
                                double tol) {
    if (n_levels < 2) throw ConfigError("solve_skeleton: n_levels must be >= 2");
    control.validate();

    SkeletonSolution sol;
    Mat prev = skeleton_euler(drift, sigma1, control, x0, control.M);
    int K = control.M;
    for (int level = 1; level <= n_levels; ++level) {
        K *= 2;
        Mat cur = skeleton_euler(drift, sigma1, control, x0, K);
        // Compare on the coarse nodes (every second fine node).
        double err = 0.0;
        for (Eigen::Index c = 0; c < prev.cols(); ++c)
            err = std::max(err, (cur.col(2 * c) - prev.col(c)).template lpNorm<Eigen::Infinity>());
        sol.level_errors.push_back(err);
        sol.level = level;
        sol.estimated_error = err;
        prev = std::move(cur);
        if (err < tol) break;
    }

    if (sol.estimated_error >= tol) {
        // Accept anyway if the ladder is still contracting geometrically;
        // otherwise report non-convergence with the level history.
        const auto& e = sol.level_errors;
        bool contracting = e.size() >= 2;
        for (std::size_t i = 1; i < e.size(); ++i)
            contracting = contracting && e[i] <= 0.9 * e[i - 1] + 1e-300;
        if (!contracting) {
            std::ostringstream os;
            os << "solve_skeleton: dyadic refinement not contracting after " << sol.level
               << " levels; errors:";
            for (double v : e) os << " " << v;
            throw NumericError(os.str());
        }
    }

    const int Kf = static_cast<int>(prev.cols()) - 1;
    sol.times.resize(Kf + 1);
    for (int k = 0; k <= Kf; ++k)
        sol.times[k] = control.T * static_cast<double>(k) / static_cast<double>(Kf);
    sol.path = std::move(prev);
    return sol;
}

SkeletonField skeleton_map_S(const AveragedDrift& drift, const Sigma1Fn& sigma1,
                             const Control& control, const std::vector<Vec>& x0_grid,
                             int n_levels, double tol) {
    if (x0_grid.empty()) throw ConfigError("skeleton_map_S: empty initial grid");
    SkeletonField field;
    field.x0_grid = x0_grid;
    for (const auto& x0 : x0_grid) {
        SkeletonSolution sol = solve_skeleton(drift, sigma1, control, x0, n_levels, tol);
        if (field.paths.empty()) field.times = sol.times;
        if (sol.path.cols() != field.times.size()) {
            // Re-run at the common finest level so the field shares one grid.
            const int K = static_cast<int>(field.times.size()) - 1;
            field.paths.push_back(skeleton_euler(drift, sigma1, control, x0, K));
        } else {
            field.paths.push_back(std::move(sol.path));
        }
    }
    return field;
}

SkeletonContinuityReport check_skeleton_continuity(const AveragedDrift& drift,
                                                   const Sigma1Fn& sigma1,
                                                   const std::vector<Control>& sequence,
                                                   const Control& target, ConstVecRef x0,
                                                   double tol, int n_levels) {
    SkeletonContinuityReport rep;
    SkeletonSolution ref = solve_skeleton(drift, sigma1, target, x0, n_levels);

    for (const auto& h : sequence) {
        SkeletonSolution sol = solve_skeleton(drift, sigma1, h, x0, n_levels);
        // Sup distance over the coarser common grid.
        const Eigen::Index na = ref.path.cols() - 1;
        const Eigen::Index nb = sol.path.cols() - 1;
        const Eigen::Index nc = std::min(na, nb);
        double gap = 0.0;
        for (Eigen::Index k = 0; k <= nc; ++k) {
            const Eigen::Index ia = k * (na / nc);
            const Eigen::Index ib = k * (nb / nc);
            gap = std::max(gap,
                           (ref.path.col(ia) - sol.path.col(ib)).template lpNorm<Eigen::Infinity>());
        }
        rep.gaps.push_back(gap);
    }

    rep.gaps_nonincreasing = true;
    for (std::size_t i = 1; i < rep.gaps.size(); ++i)
        rep.gaps_nonincreasing = rep.gaps_nonincreasing && rep.gaps[i] <= rep.gaps[i - 1] + tol;

    // Equicontinuity modulus of the target solution: sup |X_{t+lag} - X_t|
    // against lag on dyadic lags, fitted in log-log.
    const Eigen::Index K = ref.path.cols() - 1;
    std::vector<double> lags, sups;
    for (int lv = 2; lv <= 5; ++lv) {
        const Eigen::Index lag = K >> lv;
        if (lag < 1) break;
        double sup = 0.0;
        for (Eigen::Index k = 0; k + lag <= K; ++k)
            sup = std::max(sup,
                           (ref.path.col(k + lag) - ref.path.col(k)).template lpNorm<Eigen::Infinity>());
        if (sup > 0.0) {
            lags.push_back(ref.times[lag] - ref.times[0]);
            sups.push_back(sup);
        }
    }
    rep.time_modulus_slope = lags.size() >= 2 ? fit_loglog(lags, sups).slope : 1.0;
    rep.pass = rep.gaps_nonincreasing && rep.time_modulus_slope >= 0.4;
    return rep;
}

}  // namespace slowfast
