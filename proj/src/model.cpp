#include "slowfast/model.hpp"

#include "slowfast/modulus.hpp"
#include "slowfast/rng.hpp"

#include <cmath>
#include <sstream>

namespace slowfast {

void AssumptionProfile::validate() const {
    if (!(beta1 > 0.0) || !(beta2 > 0.0))
        throw ConfigError("assumption profile: beta1 and beta2 must be positive");
    if (gamma < 0.0 || lip_const_C < 0.0 || lambda < 0.0)
        throw ConfigError("assumption profile: gamma, C, lambda must be nonnegative");
    validate_eta(eta);
}

namespace {

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (!std::isfinite(it->second))
        throw ConfigError("make_builtin: parameter " + key + " must be finite");
    return it->second;
}

ModelSpec make_lin1d(const std::map<std::string, double>& params) {
    const double a1 = param_or(params, "a1", 0.5);
    const double b1 = param_or(params, "b1", -0.5);
    const double s1 = param_or(params, "s1", 1.0);
    const double s2 = param_or(params, "s2", 1.0);
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw ConfigError("LIN1D: s1 and s2 must be positive");

    ModelSpec m;
    m.name = "LIN1D";
    m.dim_slow = 1;
    m.dim_fast = 1;
    m.f1 = [a1, b1](ConstVecRef x, ConstVecRef y, VecRef out) {
        out.noalias() = a1 * x + b1 * y;
    };
    m.sigma1 = [s1](ConstVecRef x, MatRef out) {
        out.setZero();
        out.diagonal().setConstant(s1);
        (void)x;
    };
    m.f2 = [](ConstVecRef x, ConstVecRef y, VecRef out) { out.noalias() = x - y; };
    m.sigma2 = [s2](ConstVecRef x, ConstVecRef y, MatRef out) {
        out.setZero();
        out.diagonal().setConstant(s2);
        (void)x;
        (void)y;
    };
    // Analytic constants: the dissipativity computation gives beta1 = 1, C = 1;
    // 2<y,f2> + s2^2 <= -|y|^2 + |x|^2 + s2^2 gives beta2 = 1, gamma = max(1, s2^2).
    m.assumptions.beta1 = 1.0;
    m.assumptions.beta2 = 1.0;
    m.assumptions.lip_const_C = 1.0;
    m.assumptions.gamma = std::max(1.0, s2 * s2);
    m.assumptions.lambda = 0.0;  // sigma1 constant
    m.assumptions.eta = 0.25;
    m.assumptions.validate();
    return m;
}

ModelSpec make_nonlip1d(const std::map<std::string, double>& params) {
    const double s1 = param_or(params, "s1", 1.0);
    const double s2 = param_or(params, "s2", 1.0);
    const double cap10 = param_or(params, "cap10", 10.0);
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw ConfigError("NONLIP1D: s1 and s2 must be positive");
    if (!(cap10 > 0.0)) throw ConfigError("NONLIP1D: cap10 must be positive");
    const double floor = std::exp(-cap10);

    ModelSpec m;
    m.name = "NONLIP1D";
    m.dim_slow = 1;
    m.dim_fast = 1;
    m.f1 = [floor](ConstVecRef x, ConstVecRef y, VecRef out) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double xi = x[i];
            const double mag = std::max(std::abs(xi), floor);
            out[i] = xi * std::log(1.0 / mag) + y[i];
        }
    };
    m.sigma1 = [s1](ConstVecRef x, MatRef out) {
        out.setZero();
        out.diagonal().setConstant(s1);
        (void)x;
    };
    m.f2 = [](ConstVecRef x, ConstVecRef y, VecRef out) { out.noalias() = x - y; };
    m.sigma2 = [s2](ConstVecRef x, ConstVecRef y, MatRef out) {
        out.setZero();
        out.diagonal().setConstant(s2);
        (void)x;
        (void)y;
    };
    m.assumptions.beta1 = 1.0;
    m.assumptions.beta2 = 1.0;
    m.assumptions.lip_const_C = 1.0;
    m.assumptions.gamma = std::max(1.0, s2 * s2);
    m.assumptions.lambda = 0.0;  // recorded as a modeling choice; sigma1 constant
    m.assumptions.eta = 0.25;
    m.assumptions.validate();
    return m;
}

}  // namespace

ModelSpec make_builtin(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "LIN1D") return make_lin1d(params);
    if (name == "NONLIP1D") return make_nonlip1d(params);
    throw ConfigError("make_builtin: unknown model name '" + name + "'");
}

DissipativityReport check_dissipativity(const ModelSpec& model, int sample_count,
                                        double box_radius, std::uint64_t seed) {
    if (sample_count < 1) throw ConfigError("check_dissipativity: sample_count must be >= 1");
    if (!(box_radius > 0.0)) throw ConfigError("check_dissipativity: box_radius must be > 0");

    const int d = model.dim_fast;
    const int dx = model.dim_slow;
    Rng rng(seed);

    Vec x1(dx), x2(dx), y1(d), y2(d);
    Vec f21(d), f22(d);
    Mat s21(d, d), s22(d, d);

    DissipativityReport rep;
    rep.samples = sample_count;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    const double beta1 = model.assumptions.beta1;
    const double cc = model.assumptions.lip_const_C;

    auto check_finite = [](const auto& v, const Vec& at_x, const Vec& at_y) {
        if (!v.allFinite()) {
            std::ostringstream os;
            os << "coefficient returned non-finite value at x=[" << at_x.transpose()
               << "] y=[" << at_y.transpose() << "]";
            throw ModelError(os.str());
        }
    };

    for (int s = 0; s < sample_count; ++s) {
        for (int i = 0; i < dx; ++i) {
            x1[i] = rng.next_uniform(-box_radius, box_radius);
            x2[i] = rng.next_uniform(-box_radius, box_radius);
        }
        for (int i = 0; i < d; ++i) {
            y1[i] = rng.next_uniform(-box_radius, box_radius);
            y2[i] = rng.next_uniform(-box_radius, box_radius);
        }
        model.f2(x1, y1, f21);
        model.f2(x2, y2, f22);
        model.sigma2(x1, y1, s21);
        model.sigma2(x1, y2, s22);
        check_finite(f21, x1, y1);
        check_finite(f22, x2, y2);
        check_finite(s21, x1, y1);
        check_finite(s22, x1, y2);

        const double lhs = 2.0 * (y1 - y2).dot(f21 - f22) + (s21 - s22).squaredNorm();
        const double rhs = -beta1 * (y1 - y2).squaredNorm() + cc * (x1 - x2).squaredNorm();
        const double violation = lhs - rhs;
        if (violation > rep.max_violation) {
            rep.max_violation = violation;
            rep.worst_x1 = x1;
            rep.worst_x2 = x2;
            rep.worst_y1 = y1;
            rep.worst_y2 = y2;
        }
    }
    rep.pass = rep.max_violation <= 1e-12;
    return rep;
}

}  // namespace slowfast
