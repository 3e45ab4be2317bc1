#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slowfast/modulus.hpp"

#include <cmath>

using namespace slowfast;

namespace {
std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}
}  // namespace

TEST_CASE("rho_eta closed-form values") {
    ModulusSpec spec{0.3, ModulusSpec::Kind::rho_eta};
    CHECK(rho(spec, 0.0) == 0.0);
    // 0.1 <= eta branch: x log(1/x)
    CHECK(rho(spec, 0.1) == doctest::Approx(0.23025850929940457).epsilon(1e-12));
    // x > eta branch: tangent extension
    CHECK(rho(spec, 0.5) == doctest::Approx(0.401986402162968).epsilon(1e-12));
}

TEST_CASE("rho domain and eta validation") {
    ModulusSpec spec{0.3, ModulusSpec::Kind::rho_eta};
    CHECK_THROWS_AS(rho(spec, -1.0), DomainError);
    CHECK_THROWS_AS(rho(spec, std::nan("")), DomainError);
    CHECK_THROWS_AS(rho_eta(0.5, 0.1), ConfigError);   // eta >= 1/e
    CHECK_THROWS_AS(rho_eta(0.0, 0.1), ConfigError);
    CHECK_THROWS_AS(rho_eta(-0.1, 0.1), ConfigError);
}

TEST_CASE("rho_0_eta is the squared transform and vanishes at zero") {
    ModulusSpec sq{0.3, ModulusSpec::Kind::rho_0_eta};
    CHECK(rho(sq, 0.0) == 0.0);
    const double x = 0.04;
    const double direct = rho_eta(0.3, std::sqrt(x));
    CHECK(rho(sq, x) == doctest::Approx(direct * direct).epsilon(1e-14));
}

TEST_CASE("rho continuity, monotonicity and concavity on a log grid") {
    const auto grid = log_grid(1e-4, 10.0, 2000);
    for (double eta : {0.3, 0.1}) {
        for (auto kind : {ModulusSpec::Kind::rho_eta, ModulusSpec::Kind::rho_0_eta}) {
            ModulusSpec spec{eta, kind};
            const double gap =
                std::abs(rho(spec, eta * (1 + 1e-13)) - rho(spec, eta * (1 - 1e-13)));
            CHECK(gap <= 1e-10);
            double prev = rho(spec, grid[0]);
            for (std::size_t i = 1; i < grid.size(); ++i) {
                const double cur = rho(spec, grid[i]);
                CHECK(cur >= prev - 1e-12);
                prev = cur;
            }
            for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
                const double x1 = grid[i - 1], x2 = grid[i], x3 = grid[i + 1];
                const double chord =
                    rho(spec, x1) + (rho(spec, x3) - rho(spec, x1)) * (x2 - x1) / (x3 - x1);
                CHECK(rho(spec, x2) >= chord - 1e-10);
            }
        }
    }
}

TEST_CASE("check_rho_properties passes on the reference grid") {
    const auto rep = check_rho_properties(0.3, 0.1, 2.0, log_grid(1e-4, 10.0, 2000));
    CHECK(rep.pass);
    CHECK(rep.max_monotonicity_violation <= 1e-12);
    CHECK(rep.max_power_violation <= 1e-12);
    CHECK(rep.max_power_sharp_violation <= 1e-12);
}

TEST_CASE("check_rho_properties boundary grid and ordering errors") {
    // single point at eta: equality boundary handled
    const auto rep = check_rho_properties(0.3, 0.1, 2.0, {0.3});
    CHECK(rep.pass);
    CHECK_THROWS_AS(check_rho_properties(0.1, 0.3, 2.0, {0.5}), ConfigError);
    CHECK_THROWS_AS(check_rho_properties(0.3, 0.1, 0.5, {0.5}), ConfigError);
}

TEST_CASE("bihari bound reproduces Gronwall for linear rho") {
    const std::vector<double> q(16, 1.0);
    const auto bound = bihari_bound(1.0, q, std::nullopt, 1.0);
    CHECK(bound.values.front() == doctest::Approx(1.0));
    CHECK(bound.values.back() ==
          doctest::Approx(std::exp(1.0)).epsilon(1e-8));  // f(0) exp(int q) = e
}

TEST_CASE("bihari bound with zero forcing is flat") {
    const std::vector<double> q(8, 0.0);
    ModulusSpec spec{0.3, ModulusSpec::Kind::rho_eta};
    const auto bound = bihari_bound(1e-2, q, spec, 2.0);
    for (double v : bound.values) CHECK(v == doctest::Approx(1e-2).epsilon(1e-10));
}

TEST_CASE("bihari bound matches the exponent closed form on the log branch") {
    const std::vector<double> q(16, 1.0);
    ModulusSpec spec{0.3, ModulusSpec::Kind::rho_eta};
    const auto bound = bihari_bound(0.01, q, spec, 1.0);
    const double closed = std::pow(0.01, std::exp(-1.0));  // 0.18375582613757511
    CHECK(std::abs(bound.values.back() - closed) <= 1e-6);
    CHECK(closed == doctest::Approx(0.1838).epsilon(5e-3));
    // intermediate nodes follow f0^{exp(-t)}
    for (std::size_t k = 0; k < bound.times.size(); ++k) {
        const double expected = std::pow(0.01, std::exp(-bound.times[k]));
        CHECK(std::abs(bound.values[k] - expected) <= 1e-6);
    }
}

TEST_CASE("bihari bound with the square-transform modulus matches reference quadrature") {
    // reference values from an independent high-precision quadrature + root
    // find (tanh-sinh, 30 digits) for f0 = 0.04, q == 1, eta = 0.3
    const std::vector<double> q(16, 1.0);
    ModulusSpec spec{0.3, ModulusSpec::Kind::rho_0_eta};
    const auto bound = bihari_bound(0.04, q, spec, 1.0);
    const struct {
        std::size_t node;
        double value;
    } expected[] = {{4, 0.0685794737979}, {8, 0.100738238026}, {16, 0.170992419334}};
    for (const auto& e : expected)
        CHECK(std::abs(bound.values[e.node] - e.value) <= 1e-6);
}

TEST_CASE("bihari bound stays bounded under constant small forcing") {
    // qualitative form of the C(f0 + f0^{exp(-dT)}) bound: the curve stays
    // finite and modest on [0,T] when the forcing is a small constant
    const double d = 0.5;
    const std::vector<double> q(16, d);
    ModulusSpec spec{0.3, ModulusSpec::Kind::rho_eta};
    const auto bound = bihari_bound(1e-4, q, spec, 2.0);
    for (double v : bound.values) {
        CHECK(std::isfinite(v));
        CHECK(v < 1.0);
    }
    // monotone in t for nonnegative forcing
    for (std::size_t k = 1; k < bound.values.size(); ++k)
        CHECK(bound.values[k] >= bound.values[k - 1] - 1e-12);
}

TEST_CASE("bihari rejects bad inputs") {
    CHECK_THROWS_AS(bihari_bound(0.0, {1.0}, std::nullopt, 1.0), ConfigError);
    CHECK_THROWS_AS(bihari_bound(1.0, {}, std::nullopt, 1.0), ConfigError);
    CHECK_THROWS_AS(bihari_bound(1.0, {-1.0}, std::nullopt, 1.0), ConfigError);
}

TEST_CASE("adaptive quadrature sanity") {
    const double v = integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
    CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
}
