#include "nrpp/analysis.hpp"

#include "nrpp/catalog.hpp"
#include "nrpp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace nrpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

double positive_or_throw(double lambda, double t) {
    if (!(lambda > 0.0)) {
        fail(ErrorKind::singularity, "intensity vanishes at t = " + num(t));
    }
    return lambda;
}

std::vector<Interval> pieces_of(const IntensityModel& model, const std::optional<Window>& window) {
    if (!window) {
        return {{0.0, model.horizon()}};
    }
    if (!window->within(model.horizon() * (1.0 + 1e-12))) {
        fail(ErrorKind::domain, "window " + window->to_json() + " is not inside [0, tau]");
    }
    return window->intervals();
}

// Validates order and side once, so inner loops can call the unchecked derivative.
void check_derivative(const IntensityModel& model, double theta, int order, Side side) {
    (void)model.theta_derivative(theta, 0.0, order, side);
}

template <class F>
double window_integral(F&& f, const std::vector<Interval>& pieces, const std::vector<double>& breaks,
                       const QuadratureRule& rule) {
    double total = 0.0;
    for (const Interval& piece : pieces) {
        total += integrate(f, piece.lo, piece.hi, breaks, rule);
    }
    return total;
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) {
        f *= i;
    }
    return f;
}

double golden_minimize(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? c : d;
}

double safe_kl(const TrueIntensity& truth, const IntensityModel& model, double theta, const QuadratureRule& rule) {
    try {
        return kl_objective(truth, model, theta, rule);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::singularity) {
            return kInf;
        }
        throw;
    }
}

std::size_t argmin_first(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[best]) {
            best = i;
        }
    }
    return best;
}

// Cumulative integrals of g - lambda* ln g on the theta grid.
std::vector<double> cumulative_on_grid(const std::vector<double>& grid, const std::function<double(double)>& f,
                                       const std::vector<double>& breaks) {
    std::vector<double> out(grid.size(), 0.0);
    double running = 0.0;
    if (grid.front() > 0.0) {
        running = integrate(f, 0.0, grid.front(), breaks, QuadratureRule{4096});
    }
    out[0] = running;
    const QuadratureRule cell{4};
    for (std::size_t i = 1; i < grid.size(); ++i) {
        running += integrate(f, grid[i - 1], grid[i], breaks, cell);
        out[i] = running;
    }
    return out;
}

double changepoint_theta_star(const TrueIntensity& truth, const catalog::Changepoint& model) {
    const ParameterInterval& theta = model.theta_interval();
    const double tau = model.horizon();
    std::vector<double> grid(kThetaStarJumpGrid);
    for (int i = 0; i < kThetaStarJumpGrid; ++i) {
        grid[i] = theta.alpha + theta.width() * i / (kThetaStarJumpGrid - 1);
    }
    const std::vector<double> breaks = truth.breakpoints();
    auto piece = [&](auto g) {
        return [&truth, g](double t) {
            const double star = truth.value(t);
            const double lam = g(t);
            return lam - (star > 0.0 ? star * std::log(lam) : 0.0);
        };
    };
    const auto f1 = piece([&model](double t) { return model.g1(t); });
    const auto f2 = piece([&model](double t) { return model.g2(t); });
    const std::vector<double> c1 = cumulative_on_grid(grid, f1, breaks);
    const std::vector<double> c2 = cumulative_on_grid(grid, f2, breaks);
    const double f2_total = c2.back() + (tau > grid.back() ? integrate(f2, grid.back(), tau, breaks) : 0.0);
    std::vector<double> objective(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        objective[i] = c1[i] + f2_total - c2[i];
    }
    return grid[argmin_first(objective)];
}

} // namespace

double fisher_information(const IntensityModel& model, double theta, const std::optional<Window>& window, Side side,
                          const QuadratureRule& rule) {
    rule.validate();
    check_derivative(model, theta, 1, side);
    const auto pieces = pieces_of(model, window);
    const auto breaks = model.t_breakpoints(theta);
    return window_integral(
        [&](double t) {
            const double lam = positive_or_throw(model.value(theta, t, side), t);
            const double d = model.derivative(theta, t, 1, side);
            return d * d / lam;
        },
        pieces, breaks, rule);
}

double higher_order_information(const IntensityModel& model, double theta, int order, const QuadratureRule& rule) {
    rule.validate();
    check_derivative(model, theta, order, Side::none);
    const double scale = factorial(order) * factorial(order);
    const auto breaks = model.t_breakpoints(theta);
    return integrate(
        [&](double t) {
            const double lam = positive_or_throw(model.value(theta, t), t);
            const double d = model.derivative(theta, t, order, Side::none);
            return d * d / (scale * lam);
        },
        0.0, model.horizon(), breaks, rule);
}

double score_correlation(const IntensityModel& model, double theta_a, Side side_a, double theta_b, Side side_b,
                         const QuadratureRule& rule) {
    const double ia = fisher_information(model, theta_a, std::nullopt, side_a, rule);
    const double ib = fisher_information(model, theta_b, std::nullopt, side_b, rule);
    if (!(ia > 0.0) || !(ib > 0.0)) {
        fail(ErrorKind::singularity, "score correlation needs positive Fisher information");
    }
    const auto breaks = merged(model.t_breakpoints(theta_a), model.t_breakpoints(theta_b));
    const double cross = integrate(
        [&](double t) {
            const double lam = positive_or_throw(model.value(theta_b, t, side_b), t);
            return model.derivative(theta_a, t, 1, side_a) * model.derivative(theta_b, t, 1, side_b) / lam;
        },
        0.0, model.horizon(), breaks, rule);
    return cross / std::sqrt(ia * ib);
}

double hellinger_sq(const IntensityModel& model, double theta1, double theta2, const QuadratureRule& rule) {
    rule.validate();
    (void)model.evaluate(theta1, 0.0);
    (void)model.evaluate(theta2, 0.0);
    if (theta1 == theta2) {
        return 0.0;
    }
    // Symmetric by construction: order the arguments.
    const double a = std::min(theta1, theta2);
    const double b = std::max(theta1, theta2);
    const auto breaks = merged(model.t_breakpoints(a), model.t_breakpoints(b));
    return integrate(
        [&](double t) {
            const double diff = std::sqrt(model.value(b, t)) - std::sqrt(model.value(a, t));
            return diff * diff;
        },
        0.0, model.horizon(), breaks, rule);
}

double kl_objective(const TrueIntensity& truth, const IntensityModel& model, double theta, const QuadratureRule& rule) {
    rule.validate();
    (void)model.evaluate(theta, 0.0);
    const auto breaks = merged(truth.breakpoints(), model.t_breakpoints(theta));
    return integrate(
        [&](double t) {
            const double star = truth.value(t);
            const double lam = model.value(theta, t);
            if (!(star > 0.0)) {
                return lam;
            }
            if (!(lam > 0.0)) {
                fail(ErrorKind::singularity,
                     "model intensity vanishes at t = " + num(t) + " where the true intensity is positive");
            }
            return lam - star - star * std::log(lam / star);
        },
        0.0, model.horizon(), breaks, rule);
}

double theta_star(const TrueIntensity& truth, const IntensityModel& model, const QuadratureRule& rule) {
    if (const auto* cp = dynamic_cast<const catalog::Changepoint*>(&model)) {
        return changepoint_theta_star(truth, *cp);
    }
    const ParameterInterval& interval = model.theta_interval();
    const bool smooth = model.theta_regularity() == ThetaRegularity::smooth;
    const int points = smooth ? kThetaStarSmoothGrid : kThetaStarJumpGrid;
    std::vector<double> grid(points);
    std::vector<double> values(points);
    for (int i = 0; i < points; ++i) {
        grid[i] = interval.alpha + interval.width() * i / (points - 1);
        values[i] = safe_kl(truth, model, grid[i], rule);
    }
    const std::size_t best = argmin_first(values);
    if (!std::isfinite(values[best])) {
        fail(ErrorKind::singularity, "Kullback-Leibler objective is infinite on the whole grid");
    }
    if (!smooth) {
        return grid[best];
    }
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min<std::size_t>(best + 1, grid.size() - 1)];
    const auto objective = [&](double th) { return safe_kl(truth, model, th, rule); };
    const double refined = golden_minimize(objective, lo, hi, 1e-10 * std::max(1.0, interval.width()));
    return objective(refined) < values[best] ? refined : grid[best];
}

MisspecAsymptotics misspec_asymptotics(const TrueIntensity& truth, const IntensityModel& model,
                                       const QuadratureRule& rule) {
    if (model.smoothness_order() < 2) {
        fail(ErrorKind::capability, std::string(to_string(model.id())) + " lacks the second theta-derivative");
    }
    MisspecAsymptotics out;
    out.theta_star = theta_star(truth, model, rule);
    if (!model.theta_interval().contains_open(out.theta_star)) {
        fail(ErrorKind::precondition, "pseudo-true value " + num(out.theta_star) + " lies on the border of Theta");
    }
    const double th = out.theta_star;
    const auto breaks = merged(truth.breakpoints(), model.t_breakpoints(th));
    const double tau = model.horizon();
    out.d_star_sq = integrate(
        [&](double t) {
            const double lam = positive_or_throw(model.value(th, t), t);
            const double d = model.derivative(th, t, 1, Side::none);
            return d * d * truth.value(t) / (lam * lam);
        },
        0.0, tau, breaks, rule);
    const double correction = integrate(
        [&](double t) {
            const double lam = model.value(th, t);
            return model.derivative(th, t, 2, Side::none) * (1.0 - truth.value(t) / lam);
        },
        0.0, tau, breaks, rule);
    out.i_star = out.d_star_sq + correction;
    if (!(out.i_star > 1e-14)) {
        fail(ErrorKind::degenerate, "curvature I* = " + num(out.i_star) + " is not positive");
    }
    out.d_big_sq = out.d_star_sq / (out.i_star * out.i_star);
    return out;
}

std::pair<double, double> consistency_region(double x) {
    if (!(x > 1.0) || !std::isfinite(x)) {
        fail(ErrorKind::domain, "consistency region needs x > 1, got " + num(x));
    }
    const double e = x - 1.0;
    const double ratio = e < 1e-9 ? 1.0 + e / 2.0 : e / std::log(x);
    return {ratio - 1.0, ratio - x};
}

NonIdentCovariance nonident_covariance(const IntensityModel& model, const std::vector<double>& roots,
                                       const QuadratureRule& rule) {
    if (roots.empty()) {
        fail(ErrorKind::domain, "at least one root is required");
    }
    constexpr int kCheckPoints = 1001;
    const double tau = model.horizon();
    for (std::size_t l = 1; l < roots.size(); ++l) {
        for (int j = 0; j < kCheckPoints; ++j) {
            const double t = tau * j / (kCheckPoints - 1);
            const double a = model.evaluate(roots[0], t);
            const double b = model.evaluate(roots[l], t);
            if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
                fail(ErrorKind::precondition, "intensities at theta = " + num(roots[0]) + " and " + num(roots[l]) +
                                                  " differ at t = " + num(t));
            }
        }
    }
    NonIdentCovariance out;
    out.roots = roots;
    const std::size_t k = roots.size();
    for (double r : roots) {
        const double info = fisher_information(model, r, std::nullopt, Side::none, rule);
        if (!(info > 0.0)) {
            fail(ErrorKind::singularity, "Fisher information vanishes at theta = " + num(r));
        }
        out.informations.push_back(info);
    }
    out.rho = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t l = 0; l < k; ++l) {
        for (std::size_t i = l + 1; i < k; ++i) {
            const auto breaks = merged(model.t_breakpoints(roots[l]), model.t_breakpoints(roots[i]));
            const double cross = integrate(
                [&](double t) {
                    const double lam = positive_or_throw(model.value(roots[i], t), t);
                    return model.derivative(roots[l], t, 1, Side::none) *
                           model.derivative(roots[i], t, 1, Side::none) / lam;
                },
                0.0, tau, breaks, rule);
            const double value = cross / std::sqrt(out.informations[l] * out.informations[i]);
            out.rho(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) = value;
            out.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = value;
        }
    }
    return out;
}

} // namespace nrpp
