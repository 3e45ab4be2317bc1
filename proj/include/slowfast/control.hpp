#pragma once

#include "slowfast/types.hpp"

namespace slowfast {

// Cameron-Martin element h = (h1, h2) stored through its derivative samples:
// hdot1/hdot2 are d x M, piecewise constant on M uniform intervals of [0,T]
// (hence h itself is piecewise linear). norm_sq caches int_0^T |hdot|^2 dt
// exactly as sum |hdot_i|^2 * (T/M).
struct Control {
    double T = 1.0;
    int M = 1;
    Mat hdot1;  // d x M
    Mat hdot2;  // d x M

    static Control zero(int d, int M, double T) {
        Control c;
        c.T = T;
        c.M = M;
        c.hdot1 = Mat::Zero(d, M);
        c.hdot2 = Mat::Zero(d, M);
        return c;
    }

    static Control constant(int d, int M, double T, double hdot1_value,
                            double hdot2_value = 0.0) {
        Control c = zero(d, M, T);
        c.hdot1.setConstant(hdot1_value);
        c.hdot2.setConstant(hdot2_value);
        return c;
    }

    int dim() const { return static_cast<int>(hdot1.rows()); }
    double interval() const { return T / static_cast<double>(M); }

    double norm_sq() const {
        return (hdot1.squaredNorm() + hdot2.squaredNorm()) * interval();
    }

    bool in_ball(double N) const { return norm_sq() <= N * N; }

    // Interval index covering time t.
    int interval_index(double t) const {
        int k = static_cast<int>(t / interval());
        if (k < 0) k = 0;
        if (k >= M) k = M - 1;
        return k;
    }

    void validate() const {
        if (M < 1) throw ConfigError("control: M must be >= 1");
        if (!(T > 0.0)) throw ConfigError("control: T must be positive");
        if (hdot1.cols() != M || hdot2.cols() != M || hdot1.rows() != hdot2.rows())
            throw ConfigError("control: derivative sample shape mismatch");
        if (!hdot1.allFinite() || !hdot2.allFinite())
            throw DomainError("control: derivative samples must be finite");
    }

    // L2 projection onto a piecewise-constant grid with M_new intervals:
    // each new derivative sample is the overlap-weighted average of the old
    // ones. Exact when the grids nest.
    Control resampled(int M_new) const {
        Control c;
        c.T = T;
        c.M = M_new;
        c.hdot1 = Mat::Zero(hdot1.rows(), M_new);
        c.hdot2 = Mat::Zero(hdot2.rows(), M_new);
        const double dt_old = interval();
        const double dt_new = T / static_cast<double>(M_new);
        for (int j = 0; j < M_new; ++j) {
            const double a = j * dt_new, b = a + dt_new;
            for (int k = 0; k < M; ++k) {
                const double ka = k * dt_old, kb = ka + dt_old;
                const double overlap = std::min(b, kb) - std::max(a, ka);
                if (overlap <= 0.0) continue;
                const double w = overlap / dt_new;
                c.hdot1.col(j) += w * hdot1.col(k);
                c.hdot2.col(j) += w * hdot2.col(k);
            }
        }
        return c;
    }

    // Same derivative values on a grid split into `factor` pieces per interval.
    Control refined(int factor) const {
        Control c;
        c.T = T;
        c.M = M * factor;
        c.hdot1.resize(hdot1.rows(), c.M);
        c.hdot2.resize(hdot2.rows(), c.M);
        for (int k = 0; k < M; ++k) {
            for (int j = 0; j < factor; ++j) {
                c.hdot1.col(k * factor + j) = hdot1.col(k);
                c.hdot2.col(k * factor + j) = hdot2.col(k);
            }
        }
        return c;
    }
};

}  // namespace slowfast
