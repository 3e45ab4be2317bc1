#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slowfast/ratefn.hpp"

#include <cmath>

using namespace slowfast;

namespace {

RateProblem lq_problem(double c, double z, double s1 = 1.0) {
    RateProblem prob;
    prob.drift =
        AveragedDrift::from_analytic([c](ConstVecRef x, VecRef out) { out = c * x; }, "LQ");
    prob.sigma1 = [s1](ConstVecRef, MatRef out) {
        out.setZero();
        out.diagonal().setConstant(s1);
    };
    prob.x0 = Vec::Zero(1);
    prob.T = 1.0;
    prob.kind = RateProblem::ConstraintKind::terminal_point;
    prob.target_z = Vec::Constant(1, z);
    prob.tol = 1e-4;
    prob.M = 20;
    prob.euler_steps = 1024;
    return prob;
}

double lq_oracle(double c, double s, double T, double x0, double z) {
    const double G = (c == 0.0) ? s * s * T : s * s * (std::exp(2.0 * c * T) - 1.0) / (2.0 * c);
    const double m = z - x0 * std::exp(c * T);
    return m * m / (2.0 * G);
}

}  // namespace

TEST_CASE("LQ terminal point with c = 0") {
    const auto res = minimize_rate(lq_problem(0.0, 1.0), 2, 42);
    REQUIRE(res.converged);
    CHECK(std::abs(res.value - 0.5) <= 1e-3);
    CHECK(res.residual <= 1e-4);
    // minimizer is close to the constant control hdot1 = 1
    CHECK(res.minimizer.hdot1.mean() == doctest::Approx(1.0).epsilon(0.02));
    CHECK((res.minimizer.hdot1.array() - 1.0).abs().maxCoeff() <= 0.05);
    // cached-norm identity ||h*||^2 = 2 value
    CHECK(std::abs(res.minimizer.norm_sq() - 2.0 * res.value) <= 1e-10);
}

TEST_CASE("reachable target gives zero rate") {
    const auto res = minimize_rate(lq_problem(0.0, 0.0), 1, 1);
    REQUIRE(res.converged);
    CHECK(res.value == doctest::Approx(0.0));
    CHECK(res.residual <= 1e-12);
}

TEST_CASE("LQ general-c oracle within one percent") {
    for (double c : {-1.0, 1.0}) {
        const double oracle = lq_oracle(c, 1.0, 1.0, 0.0, 1.0);
        const auto res = minimize_rate(lq_problem(c, 1.0), 2, 7);
        REQUIRE(res.converged);
        CHECK(std::abs(res.value - oracle) <= 0.01 * oracle);
    }
}

TEST_CASE("halfspace boundary is optimal") {
    RateProblem prob = lq_problem(0.0, 1.0);
    prob.kind = RateProblem::ConstraintKind::terminal_halfspace;
    prob.halfspace_a = Vec::Constant(1, 1.0);
    prob.halfspace_b = 1.0;
    const auto res = minimize_rate(prob, 2, 9);
    REQUIRE(res.converged);
    CHECK(std::abs(res.value - 0.5) <= 2e-3);
}

TEST_CASE("doubling sigma1 divides the rate by four") {
    const auto res = minimize_rate(lq_problem(0.0, 1.0, 2.0), 2, 5);
    REQUIRE(res.converged);
    CHECK(std::abs(res.value - 0.125) <= 0.01 * 0.125);
}

TEST_CASE("grid refinement can only lower the infimum") {
    RateProblem p20 = lq_problem(0.0, 1.0);
    RateProblem p40 = lq_problem(0.0, 1.0);
    p40.M = 40;
    const auto r20 = minimize_rate(p20, 1, 3);
    const auto r40 = minimize_rate(p40, 1, 3);
    REQUIRE(r20.converged);
    REQUIRE(r40.converged);
    CHECK(r20.value >= r40.value - 1e-3);
}

TEST_CASE("rate is continuous in the target") {
    const auto base = minimize_rate(lq_problem(0.0, 1.0), 1, 2);
    for (double zk : {0.95, 0.99}) {
        const auto res = minimize_rate(lq_problem(0.0, zk), 1, 2);
        REQUIRE(res.converged);
        CHECK(std::abs(res.value - base.value) <= std::abs(zk * zk - 1.0) / 2.0 + 1e-2);
    }
}

TEST_CASE("path-target constraint prices the tracking control") {
    RateProblem prob = lq_problem(0.0, 1.0);
    prob.kind = RateProblem::ConstraintKind::path_target;
    const double v = 0.5;
    prob.path_target = [v](double t) { return Vec::Constant(1, v * t); };
    prob.sup_tol = 1e-3;
    const auto res = minimize_rate(prob, 2, 23);
    REQUIRE(res.converged);
    // tracking f(t) = v t with zero drift costs (1/2) v^2 T
    CHECK(res.value == doctest::Approx(0.5 * v * v).epsilon(0.05));
}

TEST_CASE("exploding drifts surface as non-convergence, not crashes") {
    RateProblem prob = lq_problem(0.0, 1.0);
    prob.drift = AveragedDrift::from_analytic(
        [](ConstVecRef x, VecRef out) { out = x.array().pow(3.0).matrix() * 1e6; }, "cubic");
    prob.x0 = Vec::Constant(1, 2.0);
    const auto res = minimize_rate(prob, 1, 2);
    CHECK_FALSE(res.converged);
    CHECK(std::isinf(res.value));
}

TEST_CASE("unreachable targets report an empty infimum") {
    RateProblem prob = lq_problem(0.0, 50.0);  // far outside B_N reach
    prob.norm_cap_N = 1.0;
    const auto res = minimize_rate(prob, 2, 13);
    CHECK_FALSE(res.converged);
    CHECK(std::isinf(res.value));
    CHECK(!res.diagnostic.empty());
}

TEST_CASE("two-dimensional terminal-point rate splits across coordinates") {
    RateProblem prob;
    prob.drift = AveragedDrift::from_analytic(
        [](ConstVecRef, VecRef out) { out.setZero(); }, "zero");
    prob.sigma1 = [](ConstVecRef, MatRef out) { out.setIdentity(); };
    prob.x0 = Vec::Zero(2);
    prob.T = 1.0;
    prob.kind = RateProblem::ConstraintKind::terminal_point;
    prob.target_z = Vec(2);
    prob.target_z << 1.0, -0.5;
    prob.tol = 1e-4;
    prob.M = 10;
    prob.euler_steps = 512;
    const auto res = minimize_rate(prob, 2, 99);
    REQUIRE(res.converged);
    // independent coordinates: I = (1 + 0.25) / 2
    CHECK(res.value == doctest::Approx(0.625).epsilon(2e-3));
}

TEST_CASE("gradient check: exact quadratic case") {
    const RateProblem prob = lq_problem(0.0, 1.0);
    Control c = Control::constant(1, 20, 1.0, 0.3);
    c.hdot1(0, 3) = -0.7;
    const auto rep = rate_gradient_check(prob, c, 1e-4, 0.0);
    CHECK(rep.max_rel_deviation <= 1e-9);
}

TEST_CASE("gradient check: penalized objective") {
    const RateProblem prob = lq_problem(0.0, 1.0);
    const Control c = Control::constant(1, 20, 1.0, 0.5);
    const auto rep = rate_gradient_check(prob, c, 1e-4, 10.0);
    CHECK(rep.max_rel_deviation <= 1e-4);
}

TEST_CASE("gradient check rejects out-of-range steps") {
    const RateProblem prob = lq_problem(0.0, 1.0);
    const Control c = Control::zero(1, 20, 1.0);
    CHECK_THROWS_AS(rate_gradient_check(prob, c, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(rate_gradient_check(prob, c, 1e-8, 0.0), ConfigError);
}

TEST_CASE("variational equalities for constant functionals") {
    const auto model = make_builtin("LIN1D", {{"a1", 0.0}, {"b1", 0.0}});
    const auto cfg = SimConfig::default_profile(0.5, 1.0, 50, 0);
    const std::vector<Control> zero = {Control::zero(1, 1, 1.0)};
    {
        const auto rep = variational_check(model, cfg, [](const PathSample&) { return 0.0; },
                                           zero, 500, 3);
        CHECK(std::abs(rep.lhs) <= 1e-12);
        CHECK(std::abs(rep.min_candidate) <= 1e-12);
        CHECK(rep.holds_within_3se);
    }
    {
        const auto rep = variational_check(model, cfg, [](const PathSample&) { return 1.3; },
                                           zero, 500, 3);
        CHECK(rep.lhs == doctest::Approx(1.3).epsilon(1e-9));
        CHECK(rep.min_candidate == doctest::Approx(1.3).epsilon(1e-12));
        CHECK(rep.holds_within_3se);
    }
}

TEST_CASE("variational inequality for a bounded terminal functional") {
    const auto model = make_builtin("LIN1D", {{"a1", 0.0}, {"b1", 0.0}});
    const auto cfg = SimConfig::default_profile(0.2, 1.0, 50, 0);
    PathFunctional F = [](const PathSample& p) {
        return std::min(1.0, std::max(0.0, 1.0 - p.slow(0, p.slow.cols() - 1)));
    };
    std::vector<Control> controls;
    for (double v : {0.0, 0.5, 1.0}) controls.push_back(Control::constant(1, 1, 1.0, v));
    const auto rep = variational_check(model, cfg, F, controls, 8000, 17);
    CHECK(rep.lhs_reliable);
    CHECK(rep.holds_within_3se);
}
