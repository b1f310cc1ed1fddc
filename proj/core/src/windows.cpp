#include "nrpp/windows.hpp"

#include "nrpp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace nrpp {

namespace {

std::string num(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

struct Integrand {
    const IntensityModel& model;
    double theta;

    double operator()(double t) const {
        const double lam = model.value(theta, t);
        if (!(lam > 0.0)) {
            fail(ErrorKind::singularity, "intensity vanishes at t = " + num(t));
        }
        const double d = model.derivative(theta, t, 1, Side::none);
        return d * d / lam;
    }
};

struct LevelGrid {
    std::vector<double> t;
    std::vector<double> f;
    double peak{0.0};
};

LevelGrid sample_integrand(const IntensityModel& model, double theta, double mu_star) {
    const double tau = model.horizon();
    if (!(mu_star > 0.0 && mu_star < tau)) {
        fail(ErrorKind::domain, "mu_star must lie in (0, tau), got " + num(mu_star));
    }
    (void)model.theta_derivative(theta, 0.0, 1, Side::none);
    const Integrand f{model, theta};
    LevelGrid grid;
    grid.t.resize(kLevelGridPoints);
    grid.f.resize(kLevelGridPoints);
    for (int i = 0; i < kLevelGridPoints; ++i) {
        grid.t[i] = tau * i / (kLevelGridPoints - 1);
        grid.f[i] = f(grid.t[i]);
        grid.peak = std::max(grid.peak, grid.f[i]);
    }
    if (!(grid.peak > 0.0)) {
        fail(ErrorKind::degenerate, "Fisher integrand vanishes identically");
    }
    return grid;
}

// Measure of {f >= r} with f linear between grid points.
double level_measure(const LevelGrid& grid, double r) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid.t.size(); ++i) {
        const double a = grid.f[i];
        const double b = grid.f[i + 1];
        const double h = grid.t[i + 1] - grid.t[i];
        if (a >= r && b >= r) {
            total += h;
        } else if (a >= r || b >= r) {
            const double cross = (r - a) / (b - a);
            total += a >= r ? h * cross : h * (1.0 - cross);
        }
    }
    return total;
}

double threshold_on(const LevelGrid& grid, double mu_star) {
    double lo = 0.0;
    double hi = grid.peak;
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * grid.peak; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (level_measure(grid, mid) >= mu_star) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

// Boundary of {f >= r} between a and b, where the membership flips.
double refine_crossing(const Integrand& f, double a, double b, double r) {
    const bool inside_a = f(a) >= r;
    for (int iter = 0; iter < 200 && b - a > 1e-12; ++iter) {
        const double mid = 0.5 * (a + b);
        if ((f(mid) >= r) == inside_a) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

std::vector<Interval> superlevel(const LevelGrid& grid, const Integrand& f, double r) {
    std::vector<Interval> out;
    const std::size_t m = grid.t.size();
    bool inside = grid.f[0] >= r;
    double start = grid.t[0];
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const bool next = grid.f[i + 1] >= r;
        if (next != inside) {
            const double edge = refine_crossing(f, grid.t[i], grid.t[i + 1], r);
            if (inside) {
                out.push_back({start, edge});
            } else {
                start = edge;
            }
            inside = next;
        }
    }
    if (inside) {
        out.push_back({start, grid.t[m - 1]});
    }
    return out;
}

} // namespace

double level_threshold(const IntensityModel& model, double theta, double mu_star) {
    const LevelGrid grid = sample_integrand(model, theta, mu_star);
    return threshold_on(grid, mu_star);
}

Window optimal_window(const IntensityModel& model, double theta, double mu_star) {
    const LevelGrid grid = sample_integrand(model, theta, mu_star);
    const double r = threshold_on(grid, mu_star);
    const Integrand f{model, theta};
    Window level(superlevel(grid, f, r));
    constexpr double kMeasureSlack = 1e-6;
    if (level.measure() <= mu_star + kMeasureSlack) {
        return level;
    }
    // A plateau sits at the threshold: keep the strict part, then fill from the left.
    const Window strict(superlevel(grid, f, r + 1e-12 * grid.peak));
    double fill = mu_star - strict.measure();
    std::vector<Interval> pieces = strict.intervals();
    for (const Interval& extra : strict.complement(0.0, model.horizon()).intervals()) {
        for (const Interval& plateau : level.clip(extra.lo, extra.hi).intervals()) {
            if (fill <= 0.0) {
                break;
            }
            const double take = std::min(fill, plateau.length());
            pieces.push_back({plateau.lo, plateau.lo + take});
            fill -= take;
        }
    }
    return Window(std::move(pieces));
}

Window sufficient_window(double preliminary, int n, double horizon) {
    if (n < 2) {
        fail(ErrorKind::domain, "sufficient window needs n >= 2");
    }
    const double half = std::pow(static_cast<double>(n), -0.125);
    const double lo = std::max(0.0, preliminary - half);
    const double hi = std::min(horizon, preliminary + half);
    if (!(hi > lo)) {
        fail(ErrorKind::estimation, "sufficient window around " + num(preliminary) + " misses [0, tau]");
    }
    return Window({{lo, hi}});
}

Window jump_sufficient_window(const ParameterInterval& theta, double jump_location, double horizon) {
    const double lo = theta.alpha + jump_location;
    const double hi = theta.beta + jump_location;
    if (lo < 0.0 || hi > horizon) {
        fail(ErrorKind::domain, "window [" + num(lo) + ", " + num(hi) + "] leaves [0, " + num(horizon) + "]");
    }
    return Window({{lo, hi}});
}

Window jump_sufficient_window(const catalog::JumpShift& model) {
    const ParameterInterval& theta = model.theta_interval();
    const double lo = model.s_star() - theta.beta;
    const double hi = model.s_star() - theta.alpha;
    if (lo < 0.0 || hi > model.horizon()) {
        fail(ErrorKind::domain, "window [" + num(lo) + ", " + num(hi) + "] leaves [0, tau]");
    }
    return Window({{lo, hi}});
}

} // namespace nrpp
