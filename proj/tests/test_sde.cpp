#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slowfast/averaging.hpp"
#include "slowfast/model.hpp"
#include "slowfast/sde.hpp"
#include "slowfast/stats.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace slowfast;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

ModelSpec noise_off_lin1d(double a1, double b1) {
    auto m = make_builtin("LIN1D", {{"a1", a1}, {"b1", b1}, {"s1", 1.0}, {"s2", 1.0}});
    m.sigma1 = [](ConstVecRef, MatRef out) { out.setZero(); };
    m.sigma2 = [](ConstVecRef, ConstVecRef, MatRef out) { out.setZero(); };
    return m;
}

// Exact solution of the deterministic reduced system
//   x' = a1 x + b1 y,  y' = (x - y)/delta
// via the eigendecomposition of the 2x2 system matrix.
Eigen::Vector2d linear_system_exact(double a1, double b1, double delta, double x0, double y0,
                                    double t) {
    Eigen::Matrix2d A;
    A << a1, b1, 1.0 / delta, -1.0 / delta;
    Eigen::EigenSolver<Eigen::Matrix2d> es(A);
    const Eigen::Vector2cd lam = es.eigenvalues();
    const Eigen::Matrix2cd V = es.eigenvectors();
    Eigen::Vector2cd c = V.colPivHouseholderQr().solve(Eigen::Vector2cd(x0, y0));
    Eigen::Vector2cd sol = V * (c.array() * (lam.array() * t).exp()).matrix();
    return sol.real();
}

}  // namespace

TEST_CASE("sim config validation") {
    SimConfig cfg;
    cfg.epsilon = 0.0;  // positive scales required
    cfg.delta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.epsilon = 0.1;
    cfg.delta = 0.2;  // delta < epsilon required
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SimConfig::default_profile(0.1, 1.0, 100, 5);
    CHECK(cfg.delta == doctest::Approx(0.01));
    CHECK(cfg.n_steps * cfg.step() == doctest::Approx(cfg.T));
}

TEST_CASE("same seed gives bit-identical paths") {
    const auto m = make_builtin("LIN1D", {});
    const auto cfg = SimConfig::default_profile(0.2, 1.0, 50, 99);
    const auto a = simulate_coupled(m, cfg, scalar(0.3), scalar(-0.1));
    const auto b = simulate_coupled(m, cfg, scalar(0.3), scalar(-0.1));
    CHECK(a.slow == b.slow);
    CHECK(a.fast == b.fast);
    CHECK(a.noise_slow == b.noise_slow);
    CHECK(a.noise_fast == b.noise_fast);
}

TEST_CASE("noise-off coupled system tracks the averaged flow") {
    // a1 + b1 = 0 and x0 = y0 = 1 is an equilibrium of the reduced dynamics.
    const auto m = noise_off_lin1d(0.5, -0.5);
    SimConfig cfg;
    cfg.epsilon = 0.1;
    cfg.delta = 0.004;
    cfg.T = 1.0;
    cfg.n_steps = 250;
    cfg.seed = 1;
    const auto path = simulate_coupled(m, cfg, scalar(1.0), scalar(1.0));
    for (Eigen::Index k = 0; k < path.times.size(); ++k)
        CHECK(path.slow(0, k) == doctest::Approx(1.0).epsilon(1e-12));

    // Out of equilibrium, compare against the exact 2x2 linear solution.
    const auto path2 = simulate_coupled(m, cfg, scalar(1.0), scalar(0.0));
    const auto exact = linear_system_exact(0.5, -0.5, cfg.delta, 1.0, 0.0, cfg.T);
    CHECK(path2.slow(0, cfg.n_steps) == doctest::Approx(exact[0]).epsilon(0.02));
}

TEST_CASE("frozen process oracles") {
    // s2 = 0: relaxation toward the frozen slow value
    auto m = make_builtin("LIN1D", {});
    m.sigma2 = [](ConstVecRef, ConstVecRef, MatRef out) { out.setZero(); };
    const auto eq = simulate_frozen(m, scalar(1.0), scalar(1.0), 1.0, 200, 3);
    for (Eigen::Index k = 0; k < eq.times.size(); ++k)
        CHECK(eq.fast(0, k) == doctest::Approx(1.0).epsilon(1e-12));

    const auto decay = simulate_frozen(m, scalar(0.0), scalar(1.0), 1.0, 2000, 3);
    CHECK(decay.fast(0, 2000) == doctest::Approx(std::exp(-1.0)).epsilon(2e-3));  // O(h)

    // stationary variance s2^2/2 over the tail of a long run
    const auto full = make_builtin("LIN1D", {});
    MeanVar tail;
    for (std::uint64_t p = 0; p < 32; ++p) {
        const auto path = simulate_frozen(full, scalar(1.0), scalar(1.0), 30.0, 3000, 77, p);
        for (int k = 1500; k <= 3000; ++k) tail.add(path.fast(0, k));
    }
    CHECK(tail.variance() == doctest::Approx(0.5).epsilon(0.08));
}

TEST_CASE("frozen-process contraction is exact per path under common noise") {
    const auto m = make_builtin("LIN1D", {});
    const double t = 1.0;
    const int n = 1000;
    const auto a = simulate_frozen(m, scalar(1.0), scalar(2.0), t, n, 11, 4);
    const auto b = simulate_frozen(m, scalar(1.0), scalar(-1.0), t, n, 11, 4);
    const double d0 = 3.0;
    const double dT = std::abs(a.fast(0, n) - b.fast(0, n));
    CHECK(dT == doctest::Approx(d0 * std::exp(-t)).epsilon(1e-2));
    CHECK(dT * dT <= d0 * d0 * std::exp(-m.assumptions.beta1 * t) + 1e-9);
}

TEST_CASE("frozen-process Lipschitz dependence on the frozen point") {
    const auto m = make_builtin("LIN1D", {});
    const double t = 1.0;
    const int n = 1000;
    const auto a = simulate_frozen(m, scalar(1.0), scalar(0.5), t, n, 13, 9);
    const auto b = simulate_frozen(m, scalar(-0.5), scalar(0.5), t, n, 13, 9);
    const double dx = 1.5;
    const double dT = std::abs(a.fast(0, n) - b.fast(0, n));
    CHECK(dT == doctest::Approx(dx * (1.0 - std::exp(-t))).epsilon(1e-2));
    CHECK(dT <= m.assumptions.lip_const_C * dx + 1e-9);
}

TEST_CASE("stored noise increments are N(0, step I) in both channels") {
    const auto m = make_builtin("LIN1D", {});
    const auto cfg = SimConfig::default_profile(0.2, 1.0, 50, 1001);
    MeanVar slow_inc, fast_inc;
    for (std::uint64_t p = 0; p < 400; ++p) {
        const auto path = simulate_coupled(m, cfg, scalar(0.0), scalar(0.0), p);
        for (int k = 0; k < cfg.n_steps; ++k) {
            slow_inc.add(path.noise_slow(0, k));
            fast_inc.add(path.noise_fast(0, k));
        }
    }
    const double h = cfg.step();
    const double n = static_cast<double>(slow_inc.n);
    CHECK(std::abs(slow_inc.mean) <= 3.0 * std::sqrt(h / n));
    CHECK(slow_inc.variance() == doctest::Approx(h).epsilon(0.05));
    CHECK(std::abs(fast_inc.mean) <= 3.0 * std::sqrt(h / n));
    CHECK(fast_inc.variance() == doctest::Approx(h).epsilon(0.05));
}

TEST_CASE("zero control reproduces the coupled path bit-exactly") {
    const auto m = make_builtin("LIN1D", {});
    const auto cfg = SimConfig::default_profile(0.2, 1.0, 40, 1234);
    const auto coupled = simulate_coupled(m, cfg, scalar(0.5), scalar(0.0));
    const auto controlled =
        simulate_controlled(m, cfg, scalar(0.5), scalar(0.0), Control::zero(1, 8, 1.0));
    CHECK(coupled.slow == controlled.slow);
    CHECK(coupled.fast == controlled.fast);
}

TEST_CASE("controlled slow path follows s1 * t in the small-noise limit") {
    auto m = make_builtin("LIN1D", {{"a1", 0.5}, {"b1", -0.5}});
    m.sigma2 = [](ConstVecRef, ConstVecRef, MatRef out) { out.setZero(); };
    SimConfig cfg;
    cfg.epsilon = 1e-4;
    cfg.delta = 1e-5;
    cfg.T = 1.0;
    cfg.n_steps = 100;
    cfg.seed = 5;
    const auto path =
        simulate_controlled(m, cfg, scalar(0.0), scalar(0.0), Control::constant(1, 1, 1.0, 1.0));
    CHECK(path.slow(0, cfg.n_steps) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("NaN in control is rejected") {
    const auto m = make_builtin("LIN1D", {});
    const auto cfg = SimConfig::default_profile(0.2, 1.0, 40, 3);
    Control c = Control::zero(1, 4, 1.0);
    c.hdot1(0, 2) = std::nan("");
    CHECK_THROWS_AS(simulate_controlled(m, cfg, scalar(0.0), scalar(0.0), c), DomainError);
}

TEST_CASE("incompatible control grid is rejected") {
    const auto m = make_builtin("LIN1D", {});
    const auto cfg = SimConfig::default_profile(0.2, 1.0, 50, 3);
    CHECK_THROWS_AS(
        simulate_controlled(m, cfg, scalar(0.0), scalar(0.0), Control::zero(1, 7, 1.0)),
        ConfigError);
}

TEST_CASE("auxiliary equals controlled when fast coefficients ignore x") {
    auto m = make_builtin("LIN1D", {});
    m.f2 = [](ConstVecRef, ConstVecRef y, VecRef out) { out = -y; };
    const auto cfg = SimConfig::default_profile(0.2, 1.0, 40, 21);
    const Control zero = Control::zero(1, 4, 1.0);
    const auto hat = simulate_controlled(m, cfg, scalar(0.4), scalar(1.0), zero);
    SimConfig aux_cfg = cfg;
    aux_cfg.khasminskii_delta = cfg.step();  // every step its own block
    const auto til = simulate_auxiliary(m, aux_cfg, scalar(0.4), scalar(1.0), zero, hat);
    CHECK(hat.fast == til.fast);
}

TEST_CASE("auxiliary validates the block length") {
    const auto m = make_builtin("LIN1D", {});
    const auto cfg = SimConfig::default_profile(0.2, 1.0, 40, 2);
    const Control zero = Control::zero(1, 4, 1.0);
    const auto hat = simulate_controlled(m, cfg, scalar(0.0), scalar(0.0), zero);
    SimConfig bad = cfg;
    bad.khasminskii_delta = 2.0;  // exceeds horizon
    CHECK_THROWS_AS(simulate_auxiliary(m, bad, scalar(0.0), scalar(0.0), zero, hat), ConfigError);
    bad.khasminskii_delta = 0.013;  // not aligned to the slow grid
    CHECK_THROWS_AS(simulate_auxiliary(m, bad, scalar(0.0), scalar(0.0), zero, hat), ConfigError);
}

TEST_CASE("khasminskii error shrinks with the design size") {
    const auto m = make_builtin("LIN1D", {{"a1", 0.0}, {"b1", 0.0}, {"s1", 2.0}, {"s2", 1.0}});
    const Control ctrl = Control::constant(1, 1, 1.0, 0.0, 1.0);
    auto mean_err = [&](double Delta, double doe) {
        SimConfig cfg;
        cfg.epsilon = 0.5;
        cfg.delta = doe * 0.5;
        cfg.T = 1.0;
        cfg.n_steps = 200;
        cfg.khasminskii_delta = Delta;
        cfg.seed = 404;
        MeanVar mv;
        for (std::uint64_t p = 0; p < 400; ++p) {
            const auto hat = simulate_controlled(m, cfg, scalar(0.0), scalar(0.0), ctrl, p);
            const auto til = simulate_auxiliary(m, cfg, scalar(0.0), scalar(0.0), ctrl, hat);
            double integral = 0.0;
            for (int k = 1; k <= cfg.n_steps; ++k)
                integral += (hat.fast.col(k) - til.fast.col(k)).squaredNorm();
            mv.add(integral * cfg.step());
        }
        return mv.mean;
    };
    const double big = mean_err(0.1, 0.1);
    const double small = mean_err(0.05, 0.05);
    CHECK(small < big);
    CHECK(big / small == doctest::Approx(2.0).epsilon(0.35));  // halving the sum halves the error
}

TEST_CASE("truncation map matches its defining pieces") {
    CHECK(truncation_map(0.1) == doctest::Approx(0.1));
    CHECK(truncation_map(0.2499) == doctest::Approx(0.2499));
    CHECK(truncation_map(3.0) == doctest::Approx(1.0));
    CHECK(truncation_map(2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(truncation_map(-0.5), DomainError);

    // derivative <= 1 and monotone over a fine scan
    double prev = truncation_map(0.0);
    double max_deriv = 0.0;
    const int n = 10000;
    const double hi = 2.5, h = hi / n;
    for (int i = 1; i <= n; ++i) {
        const double cur = truncation_map(i * h);
        max_deriv = std::max(max_deriv, (cur - prev) / h);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
    CHECK(max_deriv <= 1.0 + 1e-9);
}

TEST_CASE("flow with identical initial points has exactly zero moments") {
    const auto m = make_builtin("LIN1D", {});
    const auto cfg = SimConfig::default_profile(0.2, 1.0, 40, 8);
    const auto fm = simulate_flow(m, cfg, {scalar(0.7), scalar(0.7)}, scalar(0.0), 50, 2.0);
    REQUIRE(fm.pairs.size() == 1);
    CHECK(fm.pairs[0].moment == 0.0);
    CHECK(fm.pairs[0].se == 0.0);
}

TEST_CASE("flow separation decays at the closed-form linear rate") {
    // b1 = 0 decouples the slow difference: |dX_t| = |dx| e^{a1 t} exactly.
    auto m = noise_off_lin1d(-0.5, 0.0);
    SimConfig cfg;
    cfg.epsilon = 0.1;
    cfg.delta = 0.01;
    cfg.T = 1.0;
    cfg.n_steps = 400;
    cfg.seed = 31;
    const double sep = 0.1;
    const auto fm = simulate_flow(m, cfg, {scalar(1.0), scalar(1.0 + sep)}, scalar(0.0), 20, 2.0);
    const double expected = std::pow(sep * std::exp(-0.5), 2.0);
    CHECK(fm.pairs[0].moment == doctest::Approx(expected).epsilon(5e-3));
}

TEST_CASE("blow-up raises a structured error") {
    auto m = make_builtin("LIN1D", {});
    m.f2 = [](ConstVecRef, ConstVecRef y, VecRef out) { out = y; };  // expanding fast drift
    SimConfig cfg;
    cfg.epsilon = 0.5;
    cfg.delta = 0.001;
    cfg.T = 1.0;
    cfg.n_steps = 100;
    cfg.seed = 6;
    CHECK_THROWS_AS(simulate_coupled(m, cfg, scalar(0.0), scalar(1.0)), BlowupError);
}

TEST_CASE("slow increment regularity has unit log-log slope") {
    const auto m = make_builtin("LIN1D", {});
    SimConfig cfg = SimConfig::default_profile(0.5, 1.0, 128, 2718);
    std::vector<int> lags = {2, 4, 8, 16, 32};
    std::vector<MeanVar> acc(lags.size());
    for (std::uint64_t p = 0; p < 400; ++p) {
        const auto path = simulate_coupled(m, cfg, scalar(0.0), scalar(0.0), p);
        for (std::size_t li = 0; li < lags.size(); ++li) {
            for (int k = 0; k + lags[li] <= cfg.n_steps; k += lags[li])
                acc[li].add((path.slow.col(k + lags[li]) - path.slow.col(k)).squaredNorm());
        }
    }
    std::vector<double> xs, ys;
    for (std::size_t li = 0; li < lags.size(); ++li) {
        xs.push_back(lags[li] * cfg.step());
        ys.push_back(acc[li].mean);
    }
    const double slope = fit_loglog(xs, ys).slope;
    CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("two-dimensional states work through the whole stepping core") {
    // rotation drift on the slow channel, isotropic relaxation on the fast
    ModelSpec m;
    m.dim_slow = 2;
    m.dim_fast = 2;
    m.name = "ROT2D";
    m.f1 = [](ConstVecRef x, ConstVecRef y, VecRef out) {
        out[0] = -0.3 * x[1] + 0.2 * y[0];
        out[1] = 0.3 * x[0] + 0.2 * y[1];
    };
    m.sigma1 = [](ConstVecRef, MatRef out) { out.setIdentity(); };
    m.f2 = [](ConstVecRef x, ConstVecRef y, VecRef out) { out = x - y; };
    m.sigma2 = [](ConstVecRef, ConstVecRef, MatRef out) { out.setIdentity(); };
    m.assumptions.beta1 = 1.0;

    const auto cfg = SimConfig::default_profile(0.2, 1.0, 50, 77);
    Vec x0(2), y0(2);
    x0 << 1.0, -0.5;
    y0 << 0.0, 0.5;
    const auto a = simulate_coupled(m, cfg, x0, y0);
    const auto b = simulate_coupled(m, cfg, x0, y0);
    CHECK(a.slow == b.slow);
    CHECK(a.fast == b.fast);

    const auto c = simulate_controlled(m, cfg, x0, y0, Control::zero(2, 5, 1.0));
    CHECK(c.slow == a.slow);

    // isotropic fast drift contracts pairs at rate one under common noise
    Vec y1(2), y2(2);
    y1 << 2.0, 0.0;
    y2 << 0.0, 1.0;
    const auto p = simulate_frozen(m, x0, y1, 1.0, 1000, 5, 2);
    const auto q = simulate_frozen(m, x0, y2, 1.0, 1000, 5, 2);
    const double d0 = (y1 - y2).norm();
    const double dT = (p.fast.col(1000) - q.fast.col(1000)).norm();
    CHECK(dT == doctest::Approx(d0 * std::exp(-1.0)).epsilon(1e-2));
}

TEST_CASE("controlled sup-moment stays bounded as epsilon halves") {
    const auto m = make_builtin("LIN1D", {});
    const Control ctrl = Control::constant(1, 4, 1.0, 0.8, 0.5);
    std::vector<double> sups;
    for (double eps : {0.4, 0.2, 0.1}) {
        SimConfig cfg = SimConfig::default_profile(eps, 1.0, 100, 515);
        MeanVar mv;
        for (std::uint64_t p = 0; p < 200; ++p) {
            const auto path = simulate_controlled(m, cfg, scalar(0.5), scalar(0.5), ctrl, p);
            double sup = 0.0;
            for (Eigen::Index k = 0; k < path.slow.cols(); ++k)
                sup = std::max(sup, path.slow.col(k).squaredNorm());
            mv.add(sup);
        }
        sups.push_back(mv.mean);
    }
    for (double s : sups) CHECK(std::isfinite(s));
    // no growth trend as the noise shrinks
    CHECK(sups[2] <= sups[0] * 1.5 + 0.1);
}
