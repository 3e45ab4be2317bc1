#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slowfast/model.hpp"

#include <cmath>

using namespace slowfast;

namespace {
Vec scalar(double v) { return Vec::Constant(1, v); }
}  // namespace

TEST_CASE("LIN1D coefficient evaluations") {
    const auto m = make_builtin("LIN1D", {{"a1", 0.5}, {"b1", -0.5}, {"s1", 1.0}, {"s2", 1.0}});
    Vec out(1);
    m.f2(scalar(0.0), scalar(2.0), out);
    CHECK(out[0] == doctest::Approx(-2.0));  // f2(x,y) = -(y-x)
    m.f1(scalar(1.0), scalar(1.0), out);
    CHECK(out[0] == doctest::Approx(0.0));   // 0.5*1 - 0.5*1
    Mat sig(1, 1);
    m.sigma1(scalar(3.0), sig);
    CHECK(sig(0, 0) == doctest::Approx(1.0));
    CHECK(m.assumptions.beta1 == doctest::Approx(1.0));
    CHECK(m.assumptions.beta2 == doctest::Approx(1.0));
    CHECK(m.assumptions.lip_const_C == doctest::Approx(1.0));
}

TEST_CASE("NONLIP1D psi evaluation at e^{-1}") {
    const auto m = make_builtin("NONLIP1D", {{"s1", 1.0}, {"s2", 1.0}});
    Vec out(1);
    m.f1(scalar(std::exp(-1.0)), scalar(0.0), out);
    CHECK(out[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));  // psi(e^-1) = e^-1
    // the cap keeps psi finite at zero
    m.f1(scalar(0.0), scalar(0.0), out);
    CHECK(std::isfinite(out[0]));
    CHECK(out[0] == doctest::Approx(0.0));
}

TEST_CASE("make_builtin validates inputs") {
    CHECK_THROWS_AS(make_builtin("NOSUCH", {}), ConfigError);
    CHECK_THROWS_AS(make_builtin("LIN1D", {{"s1", 0.0}}), ConfigError);
    CHECK_THROWS_AS(make_builtin("LIN1D", {{"s2", -1.0}}), ConfigError);
    CHECK_THROWS_AS(make_builtin("LIN1D", {{"a1", std::nan("")}}), ConfigError);
}

TEST_CASE("coefficient maps are pure") {
    const auto m = make_builtin("NONLIP1D", {});
    Vec a(1), b(1);
    m.f1(scalar(0.37), scalar(-1.2), a);
    m.f1(scalar(0.37), scalar(-1.2), b);
    CHECK(a[0] == b[0]);  // bit-identical re-evaluation
}

TEST_CASE("LIN1D dissipativity never violated") {
    const auto m = make_builtin("LIN1D", {});
    for (double radius : {1.0, 5.0, 50.0}) {
        const auto rep = check_dissipativity(m, 10000, radius, 2024);
        CHECK(rep.pass);
        CHECK(rep.max_violation <= 1e-12);
    }
}

TEST_CASE("anti-dissipative fast drift is caught") {
    auto m = make_builtin("LIN1D", {});
    m.f2 = [](ConstVecRef, ConstVecRef y, VecRef out) { out = y; };  // f2 = +y
    const auto rep = check_dissipativity(m, 2000, 5.0, 7);
    CHECK_FALSE(rep.pass);
    CHECK(rep.max_violation > 0.0);
}

TEST_CASE("sigma2 linear growth in the slow state on a sampled grid") {
    for (const char* name : {"LIN1D", "NONLIP1D"}) {
        const auto m = make_builtin(name, {{"s2", 1.5}});
        Mat sig(1, 1);
        for (double x = -5.0; x <= 5.0; x += 0.25) {
            for (double y = -5.0; y <= 5.0; y += 0.5) {
                m.sigma2(Vec::Constant(1, x), Vec::Constant(1, y), sig);
                const double c = m.assumptions.gamma;
                CHECK(sig.squaredNorm() <= c * (1.0 + x * x) + 1e-12);
            }
        }
    }
}

TEST_CASE("dissipativity check rejects empty sampling and non-finite maps") {
    const auto m = make_builtin("LIN1D", {});
    CHECK_THROWS_AS(check_dissipativity(m, 0, 5.0, 1), ConfigError);
    auto bad = m;
    bad.f2 = [](ConstVecRef, ConstVecRef, VecRef out) { out.setConstant(std::nan("")); };
    CHECK_THROWS_AS(check_dissipativity(bad, 10, 5.0, 1), ModelError);
}
