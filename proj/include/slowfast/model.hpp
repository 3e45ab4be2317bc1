#pragma once

#include "slowfast/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>

namespace slowfast {

// Constants from the standing assumptions on a slow-fast system: beta1 is the
// dissipativity rate of the fast drift, beta2/gamma the self-dissipativity
// pair, lip_const_C the cross term constant, lambda the small-x limit of the
// sigma1 modulus, and eta the working modulus threshold in (0, 1/e).
struct AssumptionProfile {
    double beta1 = 1.0;
    double beta2 = 1.0;
    double gamma = 1.0;
    double lip_const_C = 1.0;
    double lambda = 0.0;
    double eta = 0.25;

    void validate() const;
};

// One slow-fast system: coefficient maps are total, deterministic, and write
// into caller-provided storage so hot loops stay allocation-free.
struct ModelSpec {
    int dim_slow = 1;
    int dim_fast = 1;
    std::function<void(ConstVecRef x, ConstVecRef y, VecRef out)> f1;
    std::function<void(ConstVecRef x, MatRef out)> sigma1;
    std::function<void(ConstVecRef x, ConstVecRef y, VecRef out)> f2;
    std::function<void(ConstVecRef x, ConstVecRef y, MatRef out)> sigma2;
    AssumptionProfile assumptions;
    std::string name;
};

// Built-in analytically solvable models.
//
// LIN1D:    f1(x,y) = a1 x + b1 y, sigma1 = s1, f2(x,y) = -(y - x),
//           sigma2 = s2. Dissipative with beta1 = 1, C = 1 (the inequality
//           -2|dy|^2 + 2 dy dx <= -|dy|^2 + |dx|^2 holds identically).
// NONLIP1D: f1(x,y) = psi(x) + y with psi(x) = x log(1/(|x| v e^-cap10)),
//           same fast dynamics; psi carries a log-type modulus at 0. The cap
//           keeps psi finite at machine zero without touching the modulus on
//           the test range.
ModelSpec make_builtin(const std::string& name, const std::map<std::string, double>& params);

struct DissipativityReport {
    double max_violation = 0.0;
    bool pass = false;
    Vec worst_x1, worst_x2, worst_y1, worst_y2;
    int samples = 0;
};

// Empirical check of
//   2<y1-y2, f2(x1,y1)-f2(x2,y2)> + ||sigma2(x1,y1)-sigma2(x1,y2)||^2
//     <= -beta1 |y1-y2|^2 + C |x1-x2|^2
// over random tuples in a box of the given radius. pass iff the maximal
// violation is <= 1e-12.
DissipativityReport check_dissipativity(const ModelSpec& model, int sample_count,
                                        double box_radius, std::uint64_t seed);

}  // namespace slowfast
