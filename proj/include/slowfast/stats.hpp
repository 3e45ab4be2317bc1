#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace slowfast {

// Streaming mean/variance (Welford) with a merge usable as a chunk fold.
struct MeanVar {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const MeanVar& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const double nn = static_cast<double>(n + o.n);
        mean += d * static_cast<double>(o.n) / nn;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nn;
        n += o.n;
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double standard_error() const {
        return n > 1 ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0;
    }
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Ordinary least squares y ~ slope*x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit out;
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return out;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    out.slope = sxx > 0 ? sxy / sxx : 0.0;
    out.intercept = my - out.slope * mx;
    return out;
}

inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i] > 0 && y[i] > 0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    return fit_line(lx, ly);
}

}  // namespace slowfast
