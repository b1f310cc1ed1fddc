#include "nrpp/likelihood.hpp"

#include "nrpp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nrpp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string num(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

double finite_or_neg_inf(double v) { return std::isnan(v) ? kNegInf : v; }

} // namespace

LikelihoodEvaluator::LikelihoodEvaluator(const IntensityModel& model, const Sample& sample,
                                         const std::optional<Window>& window)
    : model_(model), n_(sample.size()) {
    const double tau = model.horizon();
    if (std::abs(sample.horizon - tau) > 1e-9 * std::max(1.0, tau)) {
        fail(ErrorKind::domain, "sample horizon " + num(sample.horizon) + " differs from the model horizon " + num(tau));
    }
    if (window) {
        if (!window->within(tau * (1.0 + 1e-12))) {
            fail(ErrorKind::domain, "window " + window->to_json() + " is not inside [0, tau]");
        }
        pieces_ = window->intervals();
    } else {
        pieces_ = {{0.0, tau}};
    }
    events_.reserve(sample.total_events());
    for (const Trajectory& tr : sample.trajectories) {
        for (double t : tr.events) {
            if (!window || window->contains(t)) {
                events_.push_back(t);
            }
        }
    }
    std::sort(events_.begin(), events_.end());
    term_ = model_.prepare(events_);
}

double LikelihoodEvaluator::log_likelihood(double theta, Side side) const {
    double compensator = 0.0;
    for (const Interval& piece : pieces_) {
        compensator += model_.integral(theta, piece.lo, piece.hi) - piece.length();
    }
    const double events = term_->log_sum(theta, side);
    return finite_or_neg_inf(events - static_cast<double>(n_) * compensator);
}

double LikelihoodEvaluator::score(double theta, Side side) const {
    double compensator = 0.0;
    for (const Interval& piece : pieces_) {
        compensator += model_.integral_derivative(theta, piece.lo, piece.hi, side);
    }
    return term_->score_sum(theta, side) - static_cast<double>(n_) * compensator;
}

std::vector<double> LikelihoodEvaluator::theta_breakpoints() const {
    const ParameterInterval& interval = model_.theta_interval();
    std::vector<double> out;
    for (double b : model_.theta_breakpoints()) {
        if (interval.contains_closed(b)) {
            out.push_back(b);
        }
    }
    if (model_.has_event_breakpoints()) {
        for (double t : events_) {
            model_.event_theta_breakpoints(t, out);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double log_likelihood(const IntensityModel& model, double theta, const Sample& sample,
                      const std::optional<Window>& window) {
    (void)model.evaluate(theta, 0.0);
    LikelihoodEvaluator evaluator(model, sample, window);
    return evaluator.log_likelihood(theta);
}

double normalized_lr(const IntensityModel& model, double theta0, double u, double rate_exponent, const Sample& sample,
                     bool log_space) {
    if (sample.size() == 0) {
        fail(ErrorKind::domain, "normalized likelihood ratio needs a nonempty sample");
    }
    if (u == 0.0) {
        return log_space ? 0.0 : 1.0;
    }
    const ParameterInterval& interval = model.theta_interval();
    const double phi = std::pow(static_cast<double>(sample.size()), -rate_exponent);
    const double theta = theta0 + phi * u;
    if (!interval.contains_closed(theta) || !interval.contains_closed(theta0)) {
        fail(ErrorKind::domain, "u = " + num(u) + " outside U_n = [" + num((interval.alpha - theta0) / phi) + ", " +
                                    num((interval.beta - theta0) / phi) + "]");
    }
    LikelihoodEvaluator evaluator(model, sample);
    const double log_z = evaluator.log_likelihood(theta) - evaluator.log_likelihood(theta0);
    return log_space ? log_z : std::exp(log_z);
}

double LogLikelihoodCurve::best_at(std::size_t i) const noexcept {
    return std::max({values[i], left[i], right[i]});
}

LogLikelihoodCurve evaluate_curve(const LikelihoodEvaluator& evaluator, std::vector<double> points,
                                  const std::vector<double>& breaks) {
    const ParameterInterval& interval = evaluator.model().theta_interval();
    LogLikelihoodCurve curve;
    curve.thetas = std::move(points);
    const std::size_t m = curve.thetas.size();
    curve.values.resize(m);
    curve.left.resize(m);
    curve.right.resize(m);
    curve.breakpoint.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const double theta = curve.thetas[i];
        const double v = evaluator.log_likelihood(theta);
        curve.values[i] = v;
        curve.left[i] = v;
        curve.right[i] = v;
        if (std::binary_search(breaks.begin(), breaks.end(), theta)) {
            curve.breakpoint[i] = 1;
            if (theta > interval.alpha) {
                curve.left[i] = evaluator.log_likelihood(theta, Side::left);
            }
            if (theta < interval.beta) {
                curve.right[i] = evaluator.log_likelihood(theta, Side::right);
            }
        }
    }
    return curve;
}

LogLikelihoodCurve likelihood_curve(const IntensityModel& model, const Sample& sample, int grid_size,
                                    const std::optional<Window>& window) {
    if (grid_size < 3) {
        fail(ErrorKind::configuration, "grid_size must be at least 3");
    }
    LikelihoodEvaluator evaluator(model, sample, window);
    const ParameterInterval& interval = model.theta_interval();
    std::vector<double> points;
    points.reserve(static_cast<std::size_t>(grid_size));
    for (int i = 0; i < grid_size; ++i) {
        points.push_back(interval.alpha + interval.width() * i / (grid_size - 1));
    }
    points.back() = interval.beta;
    const std::vector<double> breaks = evaluator.theta_breakpoints();
    points.insert(points.end(), breaks.begin(), breaks.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return evaluate_curve(evaluator, std::move(points), breaks);
}

} // namespace nrpp
