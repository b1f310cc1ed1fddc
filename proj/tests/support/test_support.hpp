#pragma once

#include "nrpp/intensity.hpp"
#include "nrpp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace nrpp::test {

/// Plain left-to-right Riemann midpoint sum, independent of the library quadrature.
inline double riemann(const std::function<double(double)>& f, double lo, double hi, int points = 1000000) {
    const double h = (hi - lo) / points;
    double sum = 0.0;
    for (int i = 0; i < points; ++i) {
        sum += f(lo + (i + 0.5) * h);
    }
    return sum * h;
}

inline Sample sample_of(std::vector<std::vector<double>> events, double horizon = 1.0) {
    Sample s;
    s.horizon = horizon;
    for (auto& e : events) {
        s.trajectories.push_back(Trajectory{std::move(e)});
    }
    return s;
}

inline double mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(x.size() - 1);
}

/// Two-sample Kolmogorov-Smirnov distance, written directly from the empirical CDFs.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

} // namespace nrpp::test
