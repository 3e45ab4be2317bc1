#include "slowfast/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace slowfast {

void validate_eta(double eta) {
    if (!(eta > 0.0) || !(eta < kInvE)) {
        std::ostringstream os;
        os << "eta must lie in (0, 1/e), got " << eta;
        throw ConfigError(os.str());
    }
}

double rho_eta(double eta, double x) {
    if (std::isnan(x) || x < 0.0) throw DomainError("rho: argument must be a nonnegative real");
    validate_eta(eta);
    if (x == 0.0) return 0.0;
    if (x <= eta) return x * std::log(1.0 / x);
    const double log_inv_eta = std::log(1.0 / eta);
    return eta * log_inv_eta + (log_inv_eta - 1.0) * (x - eta);
}

double rho(const ModulusSpec& spec, double x) {
    if (spec.kind == ModulusSpec::Kind::rho_0_eta) {
        const double r = rho_eta(spec.eta, std::sqrt(x));
        return r * r;
    }
    return rho_eta(spec.eta, x);
}

namespace {

double simpson(double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, fa, flm, m, fm);
    const double right = simpson(m, fm, frm, b, fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw NumericError("adaptive Simpson quadrature failed to converge");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = simpson(a, fa, fm, b, fb);
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, abs_tol, 52);
}

BihariBound bihari_bound(double f0, const std::vector<double>& q,
                         const std::optional<ModulusSpec>& modulus, double T) {
    if (!(f0 > 0.0)) throw ConfigError("bihari_bound: f0 must be positive");
    if (!(T > 0.0)) throw ConfigError("bihari_bound: T must be positive");
    if (q.empty()) throw ConfigError("bihari_bound: q must be nonempty");
    for (double v : q) {
        if (std::isnan(v) || v < 0.0)
            throw ConfigError("bihari_bound: q must be nonnegative and finite");
    }
    if (modulus) validate_eta(modulus->eta);

    // x0 is free in the lemma; it cancels in g^{-1}(g(.)+.). eta/2 keeps the
    // base point inside the logarithmic branch of rho_eta.
    const double x0 = modulus ? 0.5 * modulus->eta : 1.0;
    auto rho_fn = [&](double y) -> double {
        return modulus ? rho(*modulus, y) : y;
    };
    auto inv_rho = [&](double y) { return 1.0 / rho_fn(y); };

    constexpr double quad_tol = 1e-10;
    auto g = [&](double x) -> double {
        if (x == x0) return 0.0;
        return integrate_adaptive(inv_rho, x0, x, quad_tol);
    };

    // g is strictly increasing; invert by bisection after geometric bracketing.
    auto g_inverse = [&](double target) -> double {
        double lo = x0, hi = x0;
        if (target >= 0.0) {
            while (g(hi) < target) {
                hi *= 2.0;
                if (hi > 1e300) throw NumericError("bihari_bound: bound diverged");
            }
        } else {
            while (g(lo) > target) {
                lo *= 0.5;
                if (lo < 1e-300) throw NumericError("bihari_bound: bound underflowed");
            }
        }
        while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
            const double mid = 0.5 * (lo + hi);
            if (g(mid) < target) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    const std::size_t m = q.size();
    const double dt = T / static_cast<double>(m);
    const double g_f0 = g(f0);

    BihariBound out;
    out.times.resize(m + 1);
    out.values.resize(m + 1);
    double q_int = 0.0;
    out.times[0] = 0.0;
    out.values[0] = f0;
    for (std::size_t k = 0; k < m; ++k) {
        q_int += q[k] * dt;
        out.times[k + 1] = dt * static_cast<double>(k + 1);
        out.values[k + 1] = g_inverse(g_f0 + q_int);
    }
    return out;
}

RhoPropertyReport check_rho_properties(double eta1, double eta2, double p,
                                       const std::vector<double>& grid) {
    if (!(eta1 > eta2) || !(eta2 > 0.0) || !(eta1 < 1.0))
        throw ConfigError("check_rho_properties: need 1 > eta1 > eta2 > 0");
    validate_eta(eta1);
    validate_eta(eta2);
    if (!(p > 1.0)) throw ConfigError("check_rho_properties: need p > 1");
    if (grid.empty()) throw ConfigError("check_rho_properties: empty grid");

    RhoPropertyReport rep;
    for (double x : grid) {
        if (!(x > 0.0)) throw ConfigError("check_rho_properties: grid must be positive");
        ++rep.points_checked;
        // Monotonicity in eta: rho_{eta1} <= rho_{eta2} when eta1 > eta2.
        const double viol_mono = rho_eta(eta1, x) - rho_eta(eta2, x);
        rep.max_monotonicity_violation = std::max(rep.max_monotonicity_violation, viol_mono);

        for (double eta : {eta1, eta2}) {
            const double xp = std::pow(x, 1.0 + p);
            if (x <= 1.0) {
                ++rep.power_points_checked;
                const double lhs = std::pow(x, p) * rho_eta(eta, x);
                const double rhs = rho_eta(eta, xp);
                rep.max_power_violation = std::max(rep.max_power_violation, lhs - rhs);
                // On the logarithmic branch the inequality is an identity with
                // the extra 1/(1+p) factor.
                if (x <= eta && xp <= eta) {
                    rep.max_power_sharp_violation =
                        std::max(rep.max_power_sharp_violation, lhs - rhs / (1.0 + p));
                }
            }
        }
    }
    rep.pass = rep.max_monotonicity_violation <= 1e-12 && rep.max_power_violation <= 1e-12 &&
               rep.max_power_sharp_violation <= 1e-12;
    return rep;
}

}  // namespace slowfast
