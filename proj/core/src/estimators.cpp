#include "nrpp/estimators.hpp"

#include "nrpp/catalog.hpp"
#include "nrpp/errors.hpp"
#include "nrpp/quadrature.hpp"
#include "nrpp/windows.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
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

bool degenerate_interval(const ParameterInterval& interval) {
    return interval.width() <= 1e-9 * std::max(1.0, std::abs(interval.midpoint()));
}

std::vector<double> uniform_points(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    }
    out.back() = hi;
    return out;
}

std::size_t argmax_first(const LogLikelihoodCurve& curve) {
    std::size_t best = 0;
    double best_value = curve.best_at(0);
    for (std::size_t i = 1; i < curve.thetas.size(); ++i) {
        const double v = curve.best_at(i);
        if (v > best_value) {
            best = i;
            best_value = v;
        }
    }
    return best;
}

double golden_maximize(const LikelihoodEvaluator& evaluator, double lo, double hi) {
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = evaluator.log_likelihood(c);
    double fd = evaluator.log_likelihood(d);
    const double tol = 1e-13 * std::max(1.0, std::abs(hi));
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = evaluator.log_likelihood(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = evaluator.log_likelihood(d);
        }
    }
    return fc >= fd ? c : d;
}

// Candidate maximizer inside the open cell (a, b), if any.
std::optional<double> refine_cell(const LikelihoodEvaluator& evaluator, double a, double b) {
    if (!(b > a)) {
        return std::nullopt;
    }
    const IntensityModel& model = evaluator.model();
    if (model.smoothness_order() >= 1) {
        const double sa = evaluator.score(a, Side::right);
        const double sb = evaluator.score(b, Side::left);
        if (!(sa > 0.0 && sb < 0.0)) {
            return std::nullopt;
        }
        std::uintmax_t iterations = 200;
        const auto score = [&](double th) { return evaluator.score(th); };
        const auto root = boost::math::tools::toms748_solve(score, a, b, sa, sb,
                                                            boost::math::tools::eps_tolerance<double>(52), iterations);
        return 0.5 * (root.first + root.second);
    }
    return golden_maximize(evaluator, a, b);
}

} // namespace

std::string_view to_string(Method method) noexcept {
    switch (method) {
    case Method::mle: return "mle";
    case Method::bayes: return "bayes";
    case Method::moments: return "moments";
    case Method::two_stage: return "two-stage";
    }
    return "unknown";
}

Prior::Prior(std::vector<double> thetas, std::vector<double> density)
    : thetas_(std::move(thetas)), density_(std::move(density)) {
    if (thetas_.size() != density_.size() || thetas_.size() < 2) {
        fail(ErrorKind::configuration, "prior grid needs at least two (theta, density) pairs of equal length");
    }
    for (std::size_t i = 1; i < thetas_.size(); ++i) {
        if (!(thetas_[i] > thetas_[i - 1])) {
            fail(ErrorKind::configuration, "prior grid thetas must be strictly increasing");
        }
    }
}

double Prior::operator()(double theta) const noexcept {
    if (thetas_.empty()) {
        return 1.0;
    }
    if (theta <= thetas_.front()) {
        return density_.front();
    }
    if (theta >= thetas_.back()) {
        return density_.back();
    }
    const auto it = std::upper_bound(thetas_.begin(), thetas_.end(), theta);
    const std::size_t i = static_cast<std::size_t>(it - thetas_.begin());
    const double w = (theta - thetas_[i - 1]) / (thetas_[i] - thetas_[i - 1]);
    return density_[i - 1] + w * (density_[i] - density_[i - 1]);
}

void Prior::validate(const ParameterInterval& interval) const {
    if (thetas_.empty()) {
        return;
    }
    if (thetas_.front() > interval.alpha || thetas_.back() < interval.beta) {
        fail(ErrorKind::configuration, "prior grid must cover the closure of Theta");
    }
    for (double d : density_) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            fail(ErrorKind::configuration, "prior density must be positive and finite");
        }
    }
}

void EstimatorSettings::validate() const {
    if (grid_size < 3) {
        fail(ErrorKind::configuration, "grid_size must be at least 3");
    }
    if (bayes_panels < 2 || bayes_panels % 2 != 0) {
        fail(ErrorKind::configuration, "bayes_panels must be even and positive");
    }
    if (zoom_levels < 0 || zoom_points < 3) {
        fail(ErrorKind::configuration, "zoom_levels must be >= 0 and zoom_points >= 3");
    }
}

Estimate mle(const LikelihoodEvaluator& evaluator, const EstimatorSettings& settings) {
    settings.validate();
    const IntensityModel& model = evaluator.model();
    const ParameterInterval& interval = model.theta_interval();
    if (degenerate_interval(interval)) {
        const double mid = interval.midpoint();
        return {mid, evaluator.log_likelihood(mid), Method::mle};
    }
    const std::vector<double> breaks = evaluator.theta_breakpoints();
    auto with_breaks = [&](std::vector<double> points, double lo, double hi) {
        const auto first = std::lower_bound(breaks.begin(), breaks.end(), lo);
        const auto last = std::upper_bound(breaks.begin(), breaks.end(), hi);
        points.insert(points.end(), first, last);
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        return points;
    };

    LogLikelihoodCurve curve =
        evaluate_curve(evaluator, with_breaks(uniform_points(interval.alpha, interval.beta, settings.grid_size),
                                              interval.alpha, interval.beta),
                       breaks);
    std::size_t k = argmax_first(curve);
    if (!std::isfinite(curve.best_at(k))) {
        fail(ErrorKind::estimation, "log-likelihood is -inf on the whole grid");
    }
    for (int level = 0; level < settings.zoom_levels; ++level) {
        const double lo = curve.thetas[k == 0 ? 0 : k - 1];
        const double hi = curve.thetas[std::min(k + 1, curve.thetas.size() - 1)];
        std::vector<double> points = uniform_points(lo, hi, settings.zoom_points);
        points.push_back(curve.thetas[k]);
        curve = evaluate_curve(evaluator, with_breaks(std::move(points), lo, hi), breaks);
        k = argmax_first(curve);
    }

    double best_theta = curve.thetas[k];
    double best_value = curve.best_at(k);
    if (settings.refine && model.theta_regularity() != ThetaRegularity::rough) {
        const std::size_t last = curve.thetas.size() - 1;
        const std::pair<std::size_t, std::size_t> cells[2] = {{k == 0 ? 0 : k - 1, k}, {k, std::min(k + 1, last)}};
        for (const auto& [i, j] : cells) {
            const auto candidate = refine_cell(evaluator, curve.thetas[i], curve.thetas[j]);
            if (!candidate) {
                continue;
            }
            const double v = evaluator.log_likelihood(*candidate);
            if (v > best_value || (v == best_value && *candidate < best_theta)) {
                best_value = v;
                best_theta = *candidate;
            }
        }
    }
    return {std::clamp(best_theta, interval.alpha, interval.beta), best_value, Method::mle};
}

Estimate mle(const IntensityModel& model, const Sample& sample, const EstimatorSettings& settings,
             const std::optional<Window>& window) {
    if (sample.size() == 0) {
        fail(ErrorKind::domain, "estimation needs a nonempty sample");
    }
    const LikelihoodEvaluator evaluator(model, sample, window);
    return mle(evaluator, settings);
}

Estimate bayes(const LikelihoodEvaluator& evaluator, const EstimatorSettings& settings) {
    settings.validate();
    const IntensityModel& model = evaluator.model();
    const ParameterInterval& interval = model.theta_interval();
    settings.prior.validate(interval);
    if (degenerate_interval(interval)) {
        const double mid = interval.midpoint();
        return {mid, evaluator.log_likelihood(mid), Method::bayes};
    }
    const std::vector<double> breaks = evaluator.theta_breakpoints();
    const std::vector<double> edges = detail::piece_edges(interval.alpha, interval.beta, breaks);

    struct Node {
        double theta;
        double weight;
        double log_value;
    };
    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(settings.bayes_panels) + 4 * edges.size());
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p];
        const double b = edges[p + 1];
        const int m = detail::piece_panels(settings.bayes_panels, b - a, interval.width(), 2, 2);
        const double h = (b - a) / m;
        for (int i = 0; i <= m; ++i) {
            const double theta = i == m ? b : a + h * i;
            const Side side = i == 0 ? Side::right : (i == m ? Side::left : Side::none);
            const double coefficient = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            nodes.push_back({theta, coefficient * h / 3.0, evaluator.log_likelihood(theta, side)});
        }
    }
    double peak = kNegInf;
    for (const Node& node : nodes) {
        peak = std::max(peak, node.log_value);
    }
    if (!std::isfinite(peak)) {
        fail(ErrorKind::estimation, "posterior is identically zero (max log-likelihood " + num(peak) + ")");
    }
    double numerator = 0.0;
    double denominator = 0.0;
    for (const Node& node : nodes) {
        const double mass = node.weight * settings.prior(node.theta) * std::exp(node.log_value - peak);
        numerator += mass * node.theta;
        denominator += mass;
    }
    if (!(denominator > 0.0) || !std::isfinite(numerator / denominator)) {
        fail(ErrorKind::estimation, "posterior normalizer underflowed (max log-likelihood " + num(peak) + ")");
    }
    const double value = std::clamp(numerator / denominator, interval.alpha, interval.beta);
    return {value, evaluator.log_likelihood(value), Method::bayes};
}

Estimate bayes(const IntensityModel& model, const Sample& sample, const EstimatorSettings& settings,
               const std::optional<Window>& window) {
    if (sample.size() == 0) {
        fail(ErrorKind::domain, "estimation needs a nonempty sample");
    }
    const LikelihoodEvaluator evaluator(model, sample, window);
    return bayes(evaluator, settings);
}

double moments_formula(double a, double b, double tau, double lambda_hat) noexcept {
    return tau - (lambda_hat - a * tau * tau) / b;
}

Estimate moments_preliminary(const IntensityModel& model, const Sample& sample) {
    const auto* suffwin = dynamic_cast<const catalog::SuffwinLinear*>(&model);
    if (suffwin == nullptr) {
        fail(ErrorKind::capability, "the moment estimator is defined for SUFFWIN_LINEAR only");
    }
    if (sample.size() == 0) {
        fail(ErrorKind::domain, "estimation needs a nonempty sample");
    }
    const double lambda_hat = static_cast<double>(sample.total_events()) / static_cast<double>(sample.size());
    const double raw = moments_formula(suffwin->a(), suffwin->b(), model.horizon(), lambda_hat);
    const ParameterInterval& interval = model.theta_interval();
    return {std::clamp(raw, interval.alpha, interval.beta), lambda_hat, Method::moments};
}

TwoStageResult two_stage(const IntensityModel& model, const Sample& sample, const EstimatorSettings& settings,
                         TwoStageMode mode, double mu_star, Method final_method) {
    const std::size_t n = sample.size();
    if (n < 9) {
        fail(ErrorKind::domain, "two-stage estimation needs n >= 9, got " + std::to_string(n));
    }
    auto m = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (m * m > n) {
        --m;
    }
    while ((m + 1) * (m + 1) <= n) {
        ++m;
    }
    const Sample first = sample.slice(0, m);
    const Sample rest = sample.slice(m, n);

    TwoStageResult result;
    if (dynamic_cast<const catalog::SuffwinLinear*>(&model) != nullptr) {
        result.preliminary = moments_preliminary(model, first);
    } else {
        result.preliminary = mle(model, first, settings);
    }
    if (mode == TwoStageMode::optimal_window) {
        result.window = optimal_window(model, result.preliminary.value, mu_star);
    } else {
        result.window = sufficient_window(result.preliminary.value, static_cast<int>(n), model.horizon());
    }
    if (result.window.empty()) {
        fail(ErrorKind::estimation, "two-stage window is empty");
    }
    const LikelihoodEvaluator evaluator(model, rest, result.window);
    switch (final_method) {
    case Method::mle: result.final = mle(evaluator, settings); break;
    case Method::bayes: result.final = bayes(evaluator, settings); break;
    default: fail(ErrorKind::configuration, "two-stage final estimator must be mle or bayes");
    }
    result.final.method = Method::two_stage;
    return result;
}

} // namespace nrpp
