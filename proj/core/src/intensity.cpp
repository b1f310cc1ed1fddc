#include "nrpp/intensity.hpp"

#include "nrpp/errors.hpp"
#include "nrpp/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace nrpp {

namespace {

constexpr std::array<std::pair<ModelId, std::string_view>, 14> kModelNames{{
    {ModelId::regular_exp, "REGULAR_EXP"},
    {ModelId::nonident_cubic, "NONIDENT_CUBIC"},
    {ModelId::nonident_fixed, "NONIDENT_FIXED"},
    {ModelId::nullfi_sine, "NULLFI_SINE"},
    {ModelId::discfi_kink, "DISCFI_KINK"},
    {ModelId::cusp, "CUSP"},
    {ModelId::jump_shift, "JUMP_SHIFT"},
    {ModelId::changepoint, "CHANGEPOINT"},
    {ModelId::window_sine, "WINDOW_SINE"},
    {ModelId::suffwin_linear, "SUFFWIN_LINEAR"},
    {ModelId::phase_mod, "PHASE_MOD"},
    {ModelId::freq_mod, "FREQ_MOD"},
    {ModelId::constant, "CONSTANT"},
    {ModelId::flat, "FLAT"},
}};

std::string format_double(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

} // namespace

std::string_view to_string(ModelId id) noexcept {
    for (const auto& [key, name] : kModelNames) {
        if (key == id) {
            return name;
        }
    }
    return "UNKNOWN";
}

std::optional<ModelId> parse_model_id(std::string_view name) noexcept {
    for (const auto& [key, label] : kModelNames) {
        if (label == name) {
            return key;
        }
    }
    return std::nullopt;
}

ParameterInterval::ParameterInterval(double lo, double hi) : alpha(lo), beta(hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        fail(ErrorKind::configuration,
             "parameter interval requires alpha < beta, got (" + format_double(lo) + ", " + format_double(hi) + ")");
    }
}

// ---------------------------------------------------------------------------
// Window

Window::Window(std::vector<Interval> intervals) {
    std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const Interval& piece : intervals) {
        if (!(piece.hi > piece.lo)) {
            continue;
        }
        if (!intervals_.empty() && piece.lo <= intervals_.back().hi) {
            intervals_.back().hi = std::max(intervals_.back().hi, piece.hi);
        } else {
            intervals_.push_back(piece);
        }
    }
}

Window Window::whole(double horizon) { return Window({{0.0, horizon}}); }

double Window::measure() const noexcept {
    double total = 0.0;
    for (const Interval& piece : intervals_) {
        total += piece.length();
    }
    return total;
}

bool Window::contains(double t) const noexcept {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                               [](double value, const Interval& piece) { return value < piece.lo; });
    if (it == intervals_.begin()) {
        return false;
    }
    --it;
    return t <= it->hi;
}

bool Window::within(double horizon) const noexcept {
    return intervals_.empty() || (intervals_.front().lo >= 0.0 && intervals_.back().hi <= horizon);
}

Window Window::clip(double lo, double hi) const {
    std::vector<Interval> out;
    for (const Interval& piece : intervals_) {
        const double a = std::max(piece.lo, lo);
        const double b = std::min(piece.hi, hi);
        if (b > a) {
            out.push_back({a, b});
        }
    }
    return Window(std::move(out));
}

Window Window::complement(double lo, double hi) const {
    std::vector<Interval> out;
    double cursor = lo;
    for (const Interval& piece : intervals_) {
        if (piece.lo > cursor) {
            out.push_back({cursor, std::min(piece.lo, hi)});
        }
        cursor = std::max(cursor, piece.hi);
    }
    if (cursor < hi) {
        out.push_back({cursor, hi});
    }
    return Window(std::move(out));
}

std::string Window::to_json() const {
    nlohmann::json doc = nlohmann::json::array();
    for (const Interval& piece : intervals_) {
        doc.push_back({piece.lo, piece.hi});
    }
    return doc.dump();
}

Window Window::from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) {
        fail(ErrorKind::configuration, "window JSON must be a list of [lo, hi] pairs");
    }
    std::vector<Interval> pieces;
    for (const auto& item : doc) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
            fail(ErrorKind::configuration, "window JSON must be a list of [lo, hi] pairs");
        }
        pieces.push_back({item[0].get<double>(), item[1].get<double>()});
    }
    return Window(std::move(pieces));
}

// ---------------------------------------------------------------------------
// IntensityModel

IntensityModel::IntensityModel(ModelId id, ModelParams params, ParameterInterval theta_interval, double horizon,
                               double lambda_max, int smoothness_order)
    : id_(id), params_(std::move(params)), theta_interval_(theta_interval), horizon_(horizon),
      lambda_max_(lambda_max), smoothness_order_(smoothness_order) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        fail(ErrorKind::configuration, std::string(to_string(id)) + ": horizon must be positive");
    }
    if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) {
        fail(ErrorKind::configuration, std::string(to_string(id)) + ": lambda_max must be finite and nonnegative");
    }
}

void IntensityModel::check_arguments(double theta, double t) const {
    const double slack = 1e-12 * std::max(1.0, std::abs(theta_interval_.width()));
    if (!(theta >= theta_interval_.alpha - slack && theta <= theta_interval_.beta + slack)) {
        fail(ErrorKind::domain, "theta = " + format_double(theta) + " outside [" +
                                    format_double(theta_interval_.alpha) + ", " +
                                    format_double(theta_interval_.beta) + "]");
    }
    const double t_slack = 1e-12 * std::max(1.0, horizon_);
    if (!(t >= -t_slack && t <= horizon_ + t_slack)) {
        fail(ErrorKind::domain, "t = " + format_double(t) + " outside [0, " + format_double(horizon_) + "]");
    }
}

double IntensityModel::evaluate(double theta, double t, Side side) const {
    check_arguments(theta, t);
    return value(theta, t, side);
}

double IntensityModel::cumulative(double theta, double t) const {
    check_arguments(theta, t);
    const std::vector<double> breaks = t_breakpoints(theta);
    return integrate([&](double s) { return value(theta, s); }, 0.0, t, breaks);
}

double IntensityModel::theta_derivative(double theta, double t, int order, Side side) const {
    check_arguments(theta, t);
    if (order < 1 || order > 3) {
        fail(ErrorKind::domain, "derivative order must be in 1..3, got " + std::to_string(order));
    }
    if (order > smoothness_order_) {
        fail(ErrorKind::capability, std::string(to_string(id_)) + " provides theta-derivatives up to order " +
                                        std::to_string(smoothness_order_) + ", requested " + std::to_string(order));
    }
    if (side == Side::none) {
        for (double kink : theta_breakpoints()) {
            if (std::abs(theta - kink) <= 1e-12 * std::max(1.0, std::abs(kink))) {
                fail(ErrorKind::domain, std::string(to_string(id_)) + ": theta = " + format_double(theta) +
                                            " is a kink; a side (left/right) is required");
            }
        }
    }
    return derivative(theta, t, order, side);
}

double IntensityModel::derivative(double, double, int order, Side) const {
    fail(ErrorKind::capability,
         std::string(to_string(id_)) + " has no theta-derivative of order " + std::to_string(order));
}

double IntensityModel::integral(double theta, double lo, double hi) const {
    const std::vector<double> breaks = t_breakpoints(theta);
    return integrate([&](double s) { return value(theta, s); }, lo, hi, breaks);
}

double IntensityModel::integral_derivative(double theta, double lo, double hi, Side side) const {
    const std::vector<double> breaks = t_breakpoints(theta);
    return integrate([&](double s) { return derivative(theta, s, 1, side); }, lo, hi, breaks);
}

std::vector<double> IntensityModel::t_breakpoints(double) const { return {}; }

std::vector<double> IntensityModel::theta_breakpoints() const { return {}; }

void IntensityModel::event_theta_breakpoints(double, std::vector<double>&) const {}

std::unique_ptr<EventTerm> IntensityModel::prepare(std::span<const double> sorted_events) const {
    return std::make_unique<GenericEventTerm>(*this, sorted_events);
}

std::vector<double> IntensityModel::aliases(double theta) const { return {theta}; }

std::optional<JumpSizes> IntensityModel::jump_at(double) const { return std::nullopt; }

std::shared_ptr<const IntensityModel> IntensityModel::with_horizon(double) const {
    fail(ErrorKind::capability, std::string(to_string(id_)) + " is not periodic; its horizon is fixed");
}

void IntensityModel::validate() const {
    constexpr int kThetaPoints = 101;
    constexpr int kTimePoints = 201;
    std::vector<double> thetas;
    for (int i = 0; i < kThetaPoints; ++i) {
        thetas.push_back(theta_interval_.alpha + theta_interval_.width() * i / (kThetaPoints - 1));
    }
    for (double kink : theta_breakpoints()) {
        thetas.push_back(kink);
    }
    const double tolerance = 1e-9 * std::max(1.0, lambda_max_);
    for (double theta : thetas) {
        std::vector<double> times;
        for (int j = 0; j < kTimePoints; ++j) {
            times.push_back(horizon_ * j / (kTimePoints - 1));
        }
        for (double b : t_breakpoints(theta)) {
            times.push_back(b);
        }
        for (double t : times) {
            for (Side side : {Side::none, Side::left, Side::right}) {
                const double v = value(theta, t, side);
                if (!(v >= 0.0) || !std::isfinite(v)) {
                    fail(ErrorKind::configuration, std::string(to_string(id_)) + ": intensity " + format_double(v) +
                                                       " < 0 at theta = " + format_double(theta) +
                                                       ", t = " + format_double(t));
                }
                if (v > lambda_max_ + tolerance) {
                    fail(ErrorKind::configuration, std::string(to_string(id_)) + ": intensity " + format_double(v) +
                                                       " exceeds lambda_max = " + format_double(lambda_max_) +
                                                       " at theta = " + format_double(theta) +
                                                       ", t = " + format_double(t));
                }
            }
        }
    }
}

double GenericEventTerm::log_sum(double theta, Side side) const {
    double sum = 0.0;
    for (double t : events_) {
        sum += std::log(model_.value(theta, t, side));
    }
    return sum;
}

double GenericEventTerm::score_sum(double theta, Side side) const {
    double sum = 0.0;
    for (double t : events_) {
        sum += model_.derivative(theta, t, 1, side) / model_.value(theta, t, side);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// TrueIntensity

double ContaminationPiece::value(double t) const noexcept {
    double result = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
        result = result * t + *it;
    }
    return result;
}

double ContaminationPiece::integral(double a, double b) const noexcept {
    double result = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
        const double power = static_cast<double>(k + 1);
        result += coefficients[k] * (std::pow(b, power) - std::pow(a, power)) / power;
    }
    return result;
}

double ContaminationPiece::abs_bound() const noexcept {
    const double reach = std::max(std::abs(lo), std::abs(hi));
    double bound = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
        bound += std::abs(coefficients[k]) * std::pow(reach, static_cast<double>(k));
    }
    return bound;
}

TrueIntensity::TrueIntensity(ModelPtr model, double theta0, std::vector<ContaminationPiece> contamination)
    : model_(std::move(model)), theta0_(theta0), contamination_(std::move(contamination)) {
    if (!model_) {
        fail(ErrorKind::configuration, "true intensity requires a model");
    }
    if (!model_->theta_interval().contains_closed(theta0_)) {
        fail(ErrorKind::domain, "theta0 = " + format_double(theta0_) + " outside the closure of Theta");
    }
    std::sort(contamination_.begin(), contamination_.end(),
              [](const ContaminationPiece& a, const ContaminationPiece& b) { return a.lo < b.lo; });
    double extra = 0.0;
    for (std::size_t k = 0; k < contamination_.size(); ++k) {
        const ContaminationPiece& piece = contamination_[k];
        if (!(piece.hi > piece.lo) || piece.lo < 0.0 || piece.hi > model_->horizon() + 1e-12) {
            fail(ErrorKind::configuration, "contamination piece [" + format_double(piece.lo) + ", " +
                                               format_double(piece.hi) + ") must lie inside [0, tau]");
        }
        if (k > 0 && piece.lo < contamination_[k - 1].hi) {
            fail(ErrorKind::configuration, "contamination pieces overlap");
        }
        extra = std::max(extra, piece.abs_bound());
    }
    lambda_max_ = model_->lambda_max() + extra;

    const double tau = model_->horizon();
    std::vector<double> times;
    constexpr int kPoints = 10001;
    for (int j = 0; j < kPoints; ++j) {
        times.push_back(tau * j / (kPoints - 1));
    }
    for (double b : breakpoints()) {
        times.push_back(b);
    }
    for (double t : times) {
        const double v = value(t);
        if (!(v >= 0.0) || !std::isfinite(v)) {
            fail(ErrorKind::configuration,
                 "true intensity " + format_double(v) + " < 0 at t = " + format_double(t));
        }
    }
}

double TrueIntensity::value(double t) const {
    double v = model_->value(theta0_, t);
    for (const ContaminationPiece& piece : contamination_) {
        const bool last = piece.hi >= model_->horizon();
        if (t >= piece.lo && (t < piece.hi || (last && t <= piece.hi))) {
            v += piece.value(t);
            break;
        }
    }
    return v;
}

double TrueIntensity::integral(double lo, double hi) const {
    double total = model_->integral(theta0_, lo, hi);
    for (const ContaminationPiece& piece : contamination_) {
        const double a = std::max(lo, piece.lo);
        const double b = std::min(hi, piece.hi);
        if (b > a) {
            total += piece.integral(a, b);
        }
    }
    return total;
}

std::vector<double> TrueIntensity::breakpoints() const {
    std::vector<double> out = model_->t_breakpoints(theta0_);
    for (const ContaminationPiece& piece : contamination_) {
        out.push_back(piece.lo);
        out.push_back(piece.hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature helpers

void QuadratureRule::validate() const {
    if (panels < 16 || panels % 2 != 0) {
        fail(ErrorKind::configuration, "quadrature needs an even number of panels >= 16, got " +
                                           std::to_string(panels));
    }
}

namespace detail {

std::vector<double> piece_edges(double lo, double hi, std::span<const double> breakpoints) {
    std::vector<double> edges{lo};
    std::vector<double> inner;
    const double eps = 1e-14 * std::max(1.0, std::abs(hi - lo));
    for (double b : breakpoints) {
        if (b > lo + eps && b < hi - eps) {
            inner.push_back(b);
        }
    }
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
    edges.insert(edges.end(), inner.begin(), inner.end());
    edges.push_back(hi);
    return edges;
}

} // namespace detail

} // namespace nrpp
