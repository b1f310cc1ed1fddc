#include "nrpp/catalog.hpp"

#include "nrpp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace nrpp::catalog {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Consumes named parameters with defaults; anything left over is an error.
class ParamReader {
public:
    ParamReader(ModelId id, const ModelParams& params) : id_(id), given_(params) {}

    double get(const std::string& key, double fallback) {
        used_.insert(key);
        auto it = given_.find(key);
        const double v = it == given_.end() ? fallback : it->second;
        resolved_[key] = v;
        return v;
    }

    ModelParams finish() const {
        for (const auto& [key, value] : given_) {
            if (!used_.count(key)) {
                fail(ErrorKind::configuration,
                     std::string(to_string(id_)) + ": unknown parameter '" + key + "'");
            }
        }
        return resolved_;
    }

private:
    ModelId id_;
    const ModelParams& given_;
    std::set<std::string> used_;
    ModelParams resolved_;
};

void require(bool ok, ModelId id, const std::string& what) {
    if (!ok) {
        fail(ErrorKind::configuration, std::string(to_string(id)) + ": " + what);
    }
}

double tolerance_at(double x) { return kJumpTolerance * std::max(1.0, std::abs(x)); }

// Length of [lo, hi] intersected with (-inf, cut) and [cut, inf).
std::pair<double, double> split_length(double lo, double hi, double cut) {
    const double below = std::clamp(cut, lo, hi) - lo;
    return {below, (hi - lo) - below};
}

// Sum of ln values over index ranges; zero values make the range -inf.
class LogPrefix {
public:
    template <class F>
    LogPrefix(std::span<const double> events, F&& rate) : sum_(events.size() + 1, 0.0), zeros_(events.size() + 1, 0) {
        for (std::size_t i = 0; i < events.size(); ++i) {
            const double v = rate(events[i]);
            const bool zero = !(v > 0.0);
            sum_[i + 1] = sum_[i] + (zero ? 0.0 : std::log(v));
            zeros_[i + 1] = zeros_[i] + (zero ? 1 : 0);
        }
    }

    [[nodiscard]] double range(std::size_t i, std::size_t j) const noexcept {
        if (j <= i) {
            return 0.0;
        }
        return zeros_[j] > zeros_[i] ? -kInf : sum_[j] - sum_[i];
    }

private:
    std::vector<double> sum_;
    std::vector<std::size_t> zeros_;
};

// Indices [k_lo, k_hi) of events within the tolerance of `cut`.
std::pair<std::size_t, std::size_t> tie_range(std::span<const double> events, double cut) {
    const double tol = tolerance_at(cut);
    const auto lo = std::lower_bound(events.begin(), events.end(), cut - tol) - events.begin();
    const auto hi = std::upper_bound(events.begin(), events.end(), cut + tol) - events.begin();
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

double count_log(std::size_t count, double rate) {
    if (count == 0) {
        return 0.0;
    }
    return static_cast<double>(count) * std::log(rate);
}

double param_or(const ModelParams& params, const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

ParameterInterval interval_or(std::optional<ParameterInterval> theta, double lo, double hi) {
    return theta ? *theta : ParameterInterval(lo, hi);
}

} // namespace

// ---------------------------------------------------------------------------

namespace {

class LinearExponentTerm final : public EventTerm {
public:
    explicit LinearExponentTerm(std::span<const double> events) {
        for (double t : events) {
            total_ += t;
        }
    }
    double log_sum(double theta, Side) const override { return theta * total_; }
    double score_sum(double, Side) const override { return total_; }

private:
    double total_{0.0};
};

double regular_bound(const ParameterInterval& theta, double tau) {
    return std::exp(std::max({0.0, theta.beta * tau, theta.alpha * tau}));
}

} // namespace

RegularExp::RegularExp(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::regular_exp, params, interval_or(theta, 0.0, 1.0), param_or(params, "tau", 1.0),
                     regular_bound(interval_or(theta, 0.0, 1.0), param_or(params, "tau", 1.0)), 3) {
    ParamReader reader(ModelId::regular_exp, params);
    (void)reader.get("tau", 1.0);
    (void)reader.finish();
}

double RegularExp::value(double theta, double t, Side) const { return std::exp(theta * t); }

double RegularExp::derivative(double theta, double t, int order, Side) const {
    return std::pow(t, order) * std::exp(theta * t);
}

double RegularExp::integral(double theta, double lo, double hi) const {
    if (theta == 0.0) {
        return hi - lo;
    }
    return std::exp(theta * lo) * std::expm1(theta * (hi - lo)) / theta;
}

double RegularExp::integral_derivative(double theta, double lo, double hi, Side side) const {
    if (std::abs(theta) < 1e-4) {
        return IntensityModel::integral_derivative(theta, lo, hi, side);
    }
    auto primitive = [theta](double t) { return std::exp(theta * t) * (t / theta - 1.0 / (theta * theta)); };
    return primitive(hi) - primitive(lo);
}

std::unique_ptr<EventTerm> RegularExp::prepare(std::span<const double> events) const {
    return std::make_unique<LinearExponentTerm>(events);
}

// ---------------------------------------------------------------------------

NonidentCubic::NonidentCubic(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::nonident_cubic, params, interval_or(theta, 0.0, 3.0), 1.0, 10.0, 3) {
    ParamReader reader(ModelId::nonident_cubic, params);
    (void)reader.finish();
}

double NonidentCubic::formula(double theta, double t) noexcept {
    return (theta * theta * theta - 3.0 * theta * theta + 2.0 * theta) * t + (2.0 * theta - 3.0) * t * t + 1.0;
}

double NonidentCubic::value(double theta, double t, Side) const { return formula(theta, t); }

double NonidentCubic::derivative(double theta, double t, int order, Side) const {
    switch (order) {
    case 1: return (3.0 * theta * theta - 6.0 * theta + 2.0) * t + 2.0 * t * t;
    case 2: return (6.0 * theta - 6.0) * t;
    default: return 6.0 * t;
    }
}

double NonidentCubic::integral(double theta, double lo, double hi) const {
    const double c1 = theta * theta * theta - 3.0 * theta * theta + 2.0 * theta;
    const double c2 = 2.0 * theta - 3.0;
    return c1 * (hi * hi - lo * lo) / 2.0 + c2 * (hi * hi * hi - lo * lo * lo) / 3.0 + (hi - lo);
}

// ---------------------------------------------------------------------------

namespace {

// lambda = 1 + A(theta) t + B(theta) t^2
double fixed_a(double theta, int order) {
    switch (order) {
    case 0: return theta * theta - 3.0 * theta + 2.0;
    case 1: return 2.0 * theta - 3.0;
    case 2: return 2.0;
    default: return 0.0;
    }
}

double fixed_b(double theta, int order) {
    switch (order) {
    case 0: return 1.0 + theta * theta * theta - 3.0 * theta * theta + 2.0 * theta;
    case 1: return 3.0 * theta * theta - 6.0 * theta + 2.0;
    case 2: return 6.0 * theta - 6.0;
    default: return 6.0;
    }
}

} // namespace

NonidentFixed::NonidentFixed(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::nonident_fixed, params, interval_or(theta, 0.0, 3.0), 1.0, 10.0, 3) {
    ParamReader reader(ModelId::nonident_fixed, params);
    (void)reader.finish();
}

double NonidentFixed::value(double theta, double t, Side) const {
    return 1.0 + fixed_a(theta, 0) * t + fixed_b(theta, 0) * t * t;
}

double NonidentFixed::derivative(double theta, double t, int order, Side) const {
    return fixed_a(theta, order) * t + fixed_b(theta, order) * t * t;
}

double NonidentFixed::integral(double theta, double lo, double hi) const {
    return (hi - lo) + fixed_a(theta, 0) * (hi * hi - lo * lo) / 2.0 +
           fixed_b(theta, 0) * (hi * hi * hi - lo * lo * lo) / 3.0;
}

double NonidentFixed::integral_derivative(double theta, double lo, double hi, Side) const {
    return fixed_a(theta, 1) * (hi * hi - lo * lo) / 2.0 + fixed_b(theta, 1) * (hi * hi * hi - lo * lo * lo) / 3.0;
}

std::vector<double> NonidentFixed::aliases(double theta) const {
    constexpr double tol = 1e-12;
    if (std::abs(theta - 1.0) <= tol || std::abs(theta - 2.0) <= tol) {
        std::vector<double> out;
        for (double root : {1.0, 2.0}) {
            if (theta_interval().contains_closed(root)) {
                out.push_back(root);
            }
        }
        return out;
    }
    return {theta};
}

// ---------------------------------------------------------------------------

NullfiSine::NullfiSine(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::nullfi_sine, params, interval_or(theta, -1.0, 1.0), 1.0,
                     2.0 + std::max(0.0, interval_or(theta, -1.0, 1.0).beta), 3) {
    ParamReader reader(ModelId::nullfi_sine, params);
    (void)reader.finish();
}

double NullfiSine::value(double theta, double t, Side) const {
    const double s = std::sin(theta * t);
    return theta * s * s + 2.0;
}

double NullfiSine::derivative(double theta, double t, int order, Side) const {
    const double x = 2.0 * theta * t;
    switch (order) {
    case 1: return 0.5 - 0.5 * std::cos(x) + theta * t * std::sin(x);
    case 2: return 2.0 * t * std::sin(x) + 2.0 * theta * t * t * std::cos(x);
    default: return 6.0 * t * t * std::cos(x) - 4.0 * theta * t * t * t * std::sin(x);
    }
}

double NullfiSine::integral(double theta, double lo, double hi) const {
    return 2.0 * (hi - lo) + theta * (hi - lo) / 2.0 -
           (std::sin(2.0 * theta * hi) - std::sin(2.0 * theta * lo)) / 4.0;
}

double NullfiSine::integral_derivative(double theta, double lo, double hi, Side) const {
    return (hi - lo) / 2.0 - (hi * std::cos(2.0 * theta * hi) - lo * std::cos(2.0 * theta * lo)) / 2.0;
}

// ---------------------------------------------------------------------------

namespace {

bool kink_upper(double theta, Side side) {
    if (side == Side::left) {
        return false;
    }
    if (side == Side::right) {
        return true;
    }
    return theta >= DiscfiKink::kKink;
}

} // namespace

DiscfiKink::DiscfiKink(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::discfi_kink, params, interval_or(theta, 0.0, 2.0), 1.0,
                     15.0 + 5.0 * std::max(0.0, interval_or(theta, 0.0, 2.0).beta - 1.0), 3) {
    ParamReader reader(ModelId::discfi_kink, params);
    (void)reader.finish();
}

double DiscfiKink::value(double theta, double t, Side) const {
    const double shape = theta < kKink ? 3.0 * t : 5.0 * t * t;
    return (theta - kKink) * shape + 15.0;
}

double DiscfiKink::derivative(double theta, double t, int order, Side side) const {
    if (order > 1) {
        return 0.0;
    }
    return kink_upper(theta, side) ? 5.0 * t * t : 3.0 * t;
}

double DiscfiKink::integral(double theta, double lo, double hi) const {
    const double shape = theta < kKink ? 1.5 * (hi * hi - lo * lo) : 5.0 * (hi * hi * hi - lo * lo * lo) / 3.0;
    return (theta - kKink) * shape + 15.0 * (hi - lo);
}

double DiscfiKink::integral_derivative(double theta, double lo, double hi, Side side) const {
    return kink_upper(theta, side) ? 5.0 * (hi * hi * hi - lo * lo * lo) / 3.0 : 1.5 * (hi * hi - lo * lo);
}

std::vector<double> DiscfiKink::theta_breakpoints() const {
    if (theta_interval().contains_closed(kKink)) {
        return {kKink};
    }
    return {};
}

// ---------------------------------------------------------------------------

namespace {

struct CuspShape {
    double a, kappa, lambda0, tau;
};

CuspShape cusp_shape(const ModelParams& params) {
    auto get = [&](const char* key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    return {get("a", 1.0), get("kappa", 0.25), get("lambda0", 1.0), get("tau", 1.0)};
}

double cusp_bound(const CuspShape& s, const ParameterInterval& theta) {
    const double reach = std::max({std::abs(theta.alpha), std::abs(theta.beta), std::abs(s.tau - theta.alpha),
                                   std::abs(s.tau - theta.beta)});
    return std::abs(s.a) * std::pow(reach, s.kappa) + s.lambda0;
}

class CuspTerm final : public EventTerm {
public:
    CuspTerm(const Cusp& model, std::span<const double> events)
        : a_(model.a()), kappa_(model.kappa()), lambda0_(model.lambda0()), events_(events) {}

    double log_sum(double theta, Side) const override {
        double sum = 0.0;
        for (double t : events_) {
            sum += std::log(a_ * std::pow(std::abs(t - theta), kappa_) + lambda0_);
        }
        return sum;
    }
    double score_sum(double, Side) const override {
        fail(ErrorKind::capability, "CUSP has no theta-derivative");
    }

private:
    double a_, kappa_, lambda0_;
    std::span<const double> events_;
};

} // namespace

Cusp::Cusp(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::cusp, params, interval_or(theta, 0.3, 0.7), cusp_shape(params).tau,
                     cusp_bound(cusp_shape(params), interval_or(theta, 0.3, 0.7)), 0) {
    ParamReader reader(ModelId::cusp, params);
    a_ = reader.get("a", 1.0);
    kappa_ = reader.get("kappa", 0.25);
    lambda0_ = reader.get("lambda0", 1.0);
    (void)reader.get("tau", 1.0);
    (void)reader.finish();
    require(a_ > 0.0, id(), "a must be positive");
    require(kappa_ > 0.0 && kappa_ < 0.5, id(), "kappa must lie in (0, 1/2)");
    require(lambda0_ > 0.0, id(), "lambda0 must be positive");
    require(theta_interval().alpha >= 0.0 && theta_interval().beta <= horizon(), id(),
            "Theta must lie inside [0, tau]");
}

double Cusp::value(double theta, double t, Side) const {
    return a_ * std::pow(std::abs(t - theta), kappa_) + lambda0_;
}

double Cusp::integral(double theta, double lo, double hi) const {
    const double p = kappa_ + 1.0;
    auto primitive = [&](double x) { return std::copysign(std::pow(std::abs(x), p), x) / p; };
    return a_ * (primitive(hi - theta) - primitive(lo - theta)) + lambda0_ * (hi - lo);
}

std::vector<double> Cusp::t_breakpoints(double theta) const {
    if (theta > 0.0 && theta < horizon()) {
        return {theta};
    }
    return {};
}

std::unique_ptr<EventTerm> Cusp::prepare(std::span<const double> events) const {
    return std::make_unique<CuspTerm>(*this, events);
}

// ---------------------------------------------------------------------------

namespace {

class JumpCountTerm final : public EventTerm {
public:
    JumpCountTerm(double s_star, double lambda_minus, double lambda_plus, std::span<const double> events)
        : s_star_(s_star), lambda_minus_(lambda_minus), lambda_plus_(lambda_plus), events_(events) {}

    double log_sum(double theta, Side side) const override {
        const auto [lo, hi] = tie_range(events_, s_star_ - theta);
        const std::size_t below = side == Side::left ? hi : lo;
        return count_log(below, lambda_minus_) + count_log(events_.size() - below, lambda_plus_);
    }
    // Piecewise constant in theta between event breakpoints.
    double score_sum(double, Side) const override { return 0.0; }

private:
    double s_star_, lambda_minus_, lambda_plus_;
    std::span<const double> events_;
};

} // namespace

JumpShift::JumpShift(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::jump_shift, params, interval_or(theta, -0.2, 0.2), param_or(params, "tau", 1.0),
                     std::max(param_or(params, "lambda_minus", 1.0), param_or(params, "lambda_plus", 3.0)) +
                         std::abs(param_or(params, "amp", 0.0)),
                     0) {
    ParamReader reader(ModelId::jump_shift, params);
    lambda_minus_ = reader.get("lambda_minus", 1.0);
    lambda_plus_ = reader.get("lambda_plus", 3.0);
    s_star_ = reader.get("s_star", 0.5);
    amp_ = reader.get("amp", 0.0);
    omega_ = reader.get("omega", 2.0 * std::numbers::pi);
    (void)reader.get("tau", 1.0);
    (void)reader.finish();
    require(lambda_minus_ != lambda_plus_, id(), "the jump size must be nonzero");
    require(std::min(lambda_minus_, lambda_plus_) - std::abs(amp_) > 0.0, id(), "profile must stay positive");
    require(theta_interval().alpha >= s_star_ - horizon() && theta_interval().beta <= s_star_, id(),
            "Theta must lie inside (s_star - tau, s_star)");
}

double JumpShift::value(double theta, double t, Side side) const {
    const double y = t + theta;
    const double d = y - s_star_;
    double level;
    if (std::abs(d) <= tolerance_at(s_star_)) {
        level = side == Side::left ? lambda_minus_ : lambda_plus_;
    } else {
        level = d < 0.0 ? lambda_minus_ : lambda_plus_;
    }
    return amp_ == 0.0 ? level : level + amp_ * std::sin(omega_ * y);
}

double JumpShift::integral(double theta, double lo, double hi) const {
    const auto [below, above] = split_length(lo + theta, hi + theta, s_star_);
    double total = lambda_minus_ * below + lambda_plus_ * above;
    if (amp_ != 0.0) {
        total += amp_ * (std::cos(omega_ * (lo + theta)) - std::cos(omega_ * (hi + theta))) / omega_;
    }
    return total;
}

std::vector<double> JumpShift::t_breakpoints(double theta) const {
    const double c = s_star_ - theta;
    if (c > 0.0 && c < horizon()) {
        return {c};
    }
    return {};
}

void JumpShift::event_theta_breakpoints(double t, std::vector<double>& out) const {
    const double b = s_star_ - t;
    if (theta_interval().contains_closed(b)) {
        out.push_back(b);
    }
}

std::optional<JumpSizes> JumpShift::jump_at(double) const {
    const double wobble = amp_ * std::sin(omega_ * s_star_);
    return JumpSizes{lambda_minus_ + wobble, lambda_plus_ + wobble};
}

std::unique_ptr<EventTerm> JumpShift::prepare(std::span<const double> events) const {
    if (amp_ != 0.0) {
        return IntensityModel::prepare(events);
    }
    return std::make_unique<JumpCountTerm>(s_star_, lambda_minus_, lambda_plus_, events);
}

// ---------------------------------------------------------------------------

namespace {

class ChangepointTerm final : public EventTerm {
public:
    ChangepointTerm(const Changepoint& model, std::span<const double> events)
        : events_(events), before_(events, [&](double t) { return model.g1(t); }),
          after_(events, [&](double t) { return model.g2(t); }) {}

    double log_sum(double theta, Side side) const override {
        const auto [lo, hi] = tie_range(events_, theta);
        const std::size_t n = events_.size();
        const double tied = side == Side::right ? before_.range(lo, hi) : after_.range(lo, hi);
        return before_.range(0, lo) + tied + after_.range(hi, n);
    }
    double score_sum(double, Side) const override { return 0.0; }

private:
    std::span<const double> events_;
    LogPrefix before_;
    LogPrefix after_;
};

} // namespace

Changepoint::Changepoint(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::changepoint, params, interval_or(theta, 0.0, 1.0), param_or(params, "tau", 1.0),
                     std::max(param_or(params, "g2_const", 2.0),
                              param_or(params, "g2_const", 2.0) +
                                  param_or(params, "g2_slope", 0.0) * param_or(params, "tau", 1.0)),
                     0) {
    ParamReader reader(ModelId::changepoint, params);
    g1_const_ = reader.get("g1_const", 1.0);
    g1_slope_ = reader.get("g1_slope", 0.0);
    g2_const_ = reader.get("g2_const", 2.0);
    g2_slope_ = reader.get("g2_slope", 0.0);
    (void)reader.get("tau", 1.0);
    (void)reader.finish();
    for (double t : {0.0, horizon()}) {
        require(g1(t) > 0.0, id(), "g1 must be positive");
        require(g2(t) > g1(t), id(), "g2 must exceed g1");
    }
    require(theta_interval().alpha >= 0.0 && theta_interval().beta <= horizon(), id(),
            "Theta must lie inside [0, tau]");
}

double Changepoint::value(double theta, double t, Side side) const {
    const double d = t - theta;
    if (std::abs(d) <= tolerance_at(theta)) {
        return side == Side::right ? g1(t) : g2(t);
    }
    return d < 0.0 ? g1(t) : g2(t);
}

double Changepoint::integral(double theta, double lo, double hi) const {
    const double cut = std::clamp(theta, lo, hi);
    auto linear = [](double c, double s, double a, double b) { return c * (b - a) + s * (b * b - a * a) / 2.0; };
    return linear(g1_const_, g1_slope_, lo, cut) + linear(g2_const_, g2_slope_, cut, hi);
}

std::vector<double> Changepoint::t_breakpoints(double theta) const {
    if (theta > 0.0 && theta < horizon()) {
        return {theta};
    }
    return {};
}

void Changepoint::event_theta_breakpoints(double t, std::vector<double>& out) const {
    if (theta_interval().contains_closed(t)) {
        out.push_back(t);
    }
}

std::optional<JumpSizes> Changepoint::jump_at(double theta0) const {
    return JumpSizes{g2(theta0), g1(theta0)};
}

std::unique_ptr<EventTerm> Changepoint::prepare(std::span<const double> events) const {
    return std::make_unique<ChangepointTerm>(*this, events);
}

// ---------------------------------------------------------------------------

namespace {

class SineSquareTerm final : public EventTerm {
public:
    SineSquareTerm(double b, double omega, std::span<const double> events) : b_(b) {
        sines_.reserve(events.size());
        for (double t : events) {
            sines_.push_back(std::sin(omega * t));
        }
    }
    double log_sum(double theta, Side) const override {
        double sum = 0.0;
        for (double s : sines_) {
            sum += std::log(std::abs(b_ + theta * s));
        }
        return 2.0 * sum;
    }
    double score_sum(double theta, Side) const override {
        double sum = 0.0;
        for (double s : sines_) {
            sum += s / (b_ + theta * s);
        }
        return 2.0 * sum;
    }

private:
    double b_;
    std::vector<double> sines_;
};

} // namespace

WindowSine::WindowSine(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::window_sine, params, interval_or(theta, 0.0, 1.0),
                     2.0 * std::numbers::pi / param_or(params, "omega", 2.0 * std::numbers::pi),
                     std::pow(std::abs(param_or(params, "b", 2.0)) +
                                  std::max(std::abs(interval_or(theta, 0.0, 1.0).alpha),
                                           std::abs(interval_or(theta, 0.0, 1.0).beta)),
                              2),
                     3) {
    ParamReader reader(ModelId::window_sine, params);
    b_ = reader.get("b", 2.0);
    omega_ = reader.get("omega", 2.0 * std::numbers::pi);
    (void)reader.finish();
    require(omega_ > 0.0, id(), "omega must be positive");
}

double WindowSine::value(double theta, double t, Side) const {
    const double r = b_ + theta * std::sin(omega_ * t);
    return r * r;
}

double WindowSine::derivative(double theta, double t, int order, Side) const {
    const double s = std::sin(omega_ * t);
    switch (order) {
    case 1: return 2.0 * s * (b_ + theta * s);
    case 2: return 2.0 * s * s;
    default: return 0.0;
    }
}

double WindowSine::integral(double theta, double lo, double hi) const {
    const double len = hi - lo;
    const double lin = (std::cos(omega_ * lo) - std::cos(omega_ * hi)) / omega_;
    const double sq = len / 2.0 - (std::sin(2.0 * omega_ * hi) - std::sin(2.0 * omega_ * lo)) / (4.0 * omega_);
    return b_ * b_ * len + 2.0 * b_ * theta * lin + theta * theta * sq;
}

double WindowSine::integral_derivative(double theta, double lo, double hi, Side) const {
    const double len = hi - lo;
    const double lin = (std::cos(omega_ * lo) - std::cos(omega_ * hi)) / omega_;
    const double sq = len / 2.0 - (std::sin(2.0 * omega_ * hi) - std::sin(2.0 * omega_ * lo)) / (4.0 * omega_);
    return 2.0 * b_ * lin + 2.0 * theta * sq;
}

std::unique_ptr<EventTerm> WindowSine::prepare(std::span<const double> events) const {
    return std::make_unique<SineSquareTerm>(b_, omega_, events);
}

// ---------------------------------------------------------------------------

namespace {

class SuffwinTerm final : public EventTerm {
public:
    SuffwinTerm(double a, double b, std::span<const double> events)
        : events_(events), base_(events, [a](double t) { return 2.0 * a * t; }),
          raised_(events, [a, b](double t) { return 2.0 * a * t + b; }) {}

    double log_sum(double theta, Side side) const override {
        const auto [lo, hi] = tie_range(events_, theta);
        const double tied = side == Side::left ? raised_.range(lo, hi) : base_.range(lo, hi);
        return base_.range(0, lo) + tied + raised_.range(hi, events_.size());
    }
    double score_sum(double, Side) const override { return 0.0; }

private:
    std::span<const double> events_;
    LogPrefix base_;
    LogPrefix raised_;
};

} // namespace

SuffwinLinear::SuffwinLinear(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::suffwin_linear, params, interval_or(theta, 0.1, 0.9), param_or(params, "tau", 1.0),
                     2.0 * param_or(params, "a", 1.0) * param_or(params, "tau", 1.0) + param_or(params, "b", 2.0), 0) {
    ParamReader reader(ModelId::suffwin_linear, params);
    a_ = reader.get("a", 1.0);
    b_ = reader.get("b", 2.0);
    (void)reader.get("tau", 1.0);
    (void)reader.finish();
    require(a_ >= 0.0, id(), "a must be nonnegative");
    require(b_ > 0.0, id(), "b must be positive");
    require(theta_interval().alpha >= 0.0 && theta_interval().beta <= horizon(), id(),
            "Theta must lie inside [0, tau]");
}

double SuffwinLinear::value(double theta, double t, Side side) const {
    const double d = t - theta;
    bool raised;
    if (std::abs(d) <= tolerance_at(theta)) {
        raised = side == Side::left;
    } else {
        raised = d > 0.0;
    }
    return 2.0 * a_ * t + (raised ? b_ : 0.0);
}

double SuffwinLinear::integral(double theta, double lo, double hi) const {
    const auto [below, above] = split_length(lo, hi, theta);
    (void)below;
    return a_ * (hi * hi - lo * lo) + b_ * above;
}

std::vector<double> SuffwinLinear::t_breakpoints(double theta) const {
    if (theta > 0.0 && theta < horizon()) {
        return {theta};
    }
    return {};
}

void SuffwinLinear::event_theta_breakpoints(double t, std::vector<double>& out) const {
    if (theta_interval().contains_closed(t)) {
        out.push_back(t);
    }
}

std::optional<JumpSizes> SuffwinLinear::jump_at(double theta0) const {
    return JumpSizes{2.0 * a_ * theta0 + b_, 2.0 * a_ * theta0};
}

std::unique_ptr<EventTerm> SuffwinLinear::prepare(std::span<const double> events) const {
    return std::make_unique<SuffwinTerm>(a_, b_, events);
}

// ---------------------------------------------------------------------------

double PeriodicProfile::value(double y, Side side) const noexcept {
    if (!discontinuous) {
        return mean + amplitude * std::sin(2.0 * std::numbers::pi * y / period);
    }
    const double half = period / 2.0;
    const double k = std::round(y / half);
    long long segment;
    if (std::abs(y - k * half) <= tolerance_at(y)) {
        segment = static_cast<long long>(k) - (side == Side::left ? 1 : 0);
    } else {
        segment = static_cast<long long>(std::floor(y / half));
    }
    const bool upper = ((segment % 2) + 2) % 2 == 0;
    return upper ? mean + amplitude : mean - amplitude;
}

double PeriodicProfile::derivative(double y, int order) const noexcept {
    if (discontinuous) {
        return 0.0;
    }
    const double w = 2.0 * std::numbers::pi / period;
    return amplitude * std::pow(w, order) * std::sin(w * y + order * std::numbers::pi / 2.0);
}

double PeriodicProfile::primitive(double y) const noexcept {
    if (!discontinuous) {
        const double w = 2.0 * std::numbers::pi / period;
        return mean * y - amplitude * (std::cos(w * y) - 1.0) / w;
    }
    const double r = y - period * std::floor(y / period);
    const double ramp = r < period / 2.0 ? r : period - r;
    return mean * y + amplitude * ramp;
}

void PeriodicProfile::jumps_in(double lo, double hi, std::vector<double>& out) const {
    if (!discontinuous) {
        return;
    }
    const double half = period / 2.0;
    for (double k = std::ceil(lo / half); k * half <= hi; k += 1.0) {
        out.push_back(k * half);
    }
}

namespace {

PeriodicProfile read_profile(ParamReader& reader) {
    PeriodicProfile p;
    p.mean = reader.get("mean", 2.0);
    p.amplitude = reader.get("amplitude", 1.0);
    p.period = reader.get("period", 1.0);
    p.discontinuous = reader.get("discontinuous", 0.0) != 0.0;
    return p;
}

void check_profile(const PeriodicProfile& p, ModelId id) {
    require(p.period > 0.0, id, "period must be positive");
    require(p.mean - std::abs(p.amplitude) >= 0.0, id, "profile must be nonnegative");
}

double profile_bound(const ModelParams& params) {
    return param_or(params, "mean", 2.0) + std::abs(param_or(params, "amplitude", 1.0));
}

} // namespace

PhaseMod::PhaseMod(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::phase_mod, params, interval_or(theta, 0.1, 0.4), param_or(params, "tau", 1.0),
                     profile_bound(params), param_or(params, "discontinuous", 0.0) != 0.0 ? 0 : 3) {
    ParamReader reader(ModelId::phase_mod, params);
    profile_ = read_profile(reader);
    (void)reader.get("tau", 1.0);
    (void)reader.finish();
    check_profile(profile_, id());
}

double PhaseMod::value(double theta, double t, Side side) const { return profile_.value(t + theta, side); }

double PhaseMod::derivative(double theta, double t, int order, Side) const {
    return profile_.derivative(t + theta, order);
}

double PhaseMod::integral(double theta, double lo, double hi) const {
    return profile_.primitive(hi + theta) - profile_.primitive(lo + theta);
}

std::vector<double> PhaseMod::t_breakpoints(double theta) const {
    std::vector<double> ys;
    profile_.jumps_in(theta, horizon() + theta, ys);
    for (double& y : ys) {
        y -= theta;
    }
    return ys;
}

void PhaseMod::event_theta_breakpoints(double t, std::vector<double>& out) const {
    std::vector<double> ys;
    profile_.jumps_in(t + theta_interval().alpha, t + theta_interval().beta, ys);
    for (double y : ys) {
        out.push_back(y - t);
    }
}

ThetaRegularity PhaseMod::theta_regularity() const {
    return profile_.discontinuous ? ThetaRegularity::piecewise_smooth : ThetaRegularity::smooth;
}

std::shared_ptr<const IntensityModel> PhaseMod::with_horizon(double horizon) const {
    ModelParams p = params();
    p["tau"] = horizon;
    return std::make_shared<PhaseMod>(p, theta_interval());
}

FreqMod::FreqMod(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::freq_mod, params, interval_or(theta, 0.8, 1.2), param_or(params, "tau", 1.0),
                     profile_bound(params), param_or(params, "discontinuous", 0.0) != 0.0 ? 0 : 3) {
    ParamReader reader(ModelId::freq_mod, params);
    profile_ = read_profile(reader);
    (void)reader.get("tau", 1.0);
    (void)reader.finish();
    check_profile(profile_, id());
    require(theta_interval().alpha > 0.0, id(), "Theta must be positive");
}

double FreqMod::value(double theta, double t, Side side) const { return profile_.value(theta * t, side); }

double FreqMod::derivative(double theta, double t, int order, Side) const {
    return std::pow(t, order) * profile_.derivative(theta * t, order);
}

double FreqMod::integral(double theta, double lo, double hi) const {
    return (profile_.primitive(theta * hi) - profile_.primitive(theta * lo)) / theta;
}

std::vector<double> FreqMod::t_breakpoints(double theta) const {
    std::vector<double> ys;
    profile_.jumps_in(0.0, theta * horizon(), ys);
    for (double& y : ys) {
        y /= theta;
    }
    return ys;
}

void FreqMod::event_theta_breakpoints(double t, std::vector<double>& out) const {
    if (!(t > 0.0)) {
        return;
    }
    std::vector<double> ys;
    profile_.jumps_in(theta_interval().alpha * t, theta_interval().beta * t, ys);
    for (double y : ys) {
        out.push_back(y / t);
    }
}

ThetaRegularity FreqMod::theta_regularity() const {
    return profile_.discontinuous ? ThetaRegularity::piecewise_smooth : ThetaRegularity::smooth;
}

std::shared_ptr<const IntensityModel> FreqMod::with_horizon(double horizon) const {
    ModelParams p = params();
    p["tau"] = horizon;
    return std::make_shared<FreqMod>(p, theta_interval());
}

// ---------------------------------------------------------------------------

namespace {

class ConstantTerm final : public EventTerm {
public:
    explicit ConstantTerm(std::size_t count) : count_(static_cast<double>(count)) {}
    double log_sum(double theta, Side) const override { return count_ == 0.0 ? 0.0 : count_ * std::log(theta); }
    double score_sum(double theta, Side) const override { return count_ / theta; }

private:
    double count_;
};

} // namespace

Constant::Constant(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::constant, params, interval_or(theta, 0.1, 10.0), param_or(params, "tau", 1.0),
                     std::max(0.0, interval_or(theta, 0.1, 10.0).beta), 3) {
    ParamReader reader(ModelId::constant, params);
    (void)reader.get("tau", 1.0);
    (void)reader.finish();
    require(theta_interval().alpha >= 0.0, id(), "Theta must be nonnegative");
}

double Constant::value(double theta, double, Side) const { return theta; }

double Constant::derivative(double, double, int order, Side) const { return order == 1 ? 1.0 : 0.0; }

double Constant::integral(double theta, double lo, double hi) const { return theta * (hi - lo); }

double Constant::integral_derivative(double, double lo, double hi, Side) const { return hi - lo; }

std::unique_ptr<EventTerm> Constant::prepare(std::span<const double> events) const {
    return std::make_unique<ConstantTerm>(events.size());
}

Flat::Flat(const ModelParams& params, std::optional<ParameterInterval> theta)
    : IntensityModel(ModelId::flat, params, interval_or(theta, 0.0, 1.0), param_or(params, "tau", 1.0),
                     std::max(0.0, param_or(params, "level", 1.0)), 3) {
    ParamReader reader(ModelId::flat, params);
    level_ = reader.get("level", 1.0);
    (void)reader.get("tau", 1.0);
    (void)reader.finish();
    require(level_ >= 0.0, id(), "level must be nonnegative");
}

double Flat::value(double, double, Side) const { return level_; }

double Flat::derivative(double, double, int, Side) const { return 0.0; }

double Flat::integral(double, double lo, double hi) const { return level_ * (hi - lo); }

double Flat::integral_derivative(double, double, double, Side) const { return 0.0; }

} // namespace nrpp::catalog

namespace nrpp {

ModelPtr make_model(ModelId id, const ModelParams& params, std::optional<ParameterInterval> theta_interval) {
    using namespace catalog;
    ModelPtr model;
    switch (id) {
    case ModelId::regular_exp: model = std::make_shared<RegularExp>(params, theta_interval); break;
    case ModelId::nonident_cubic: model = std::make_shared<NonidentCubic>(params, theta_interval); break;
    case ModelId::nonident_fixed: model = std::make_shared<NonidentFixed>(params, theta_interval); break;
    case ModelId::nullfi_sine: model = std::make_shared<NullfiSine>(params, theta_interval); break;
    case ModelId::discfi_kink: model = std::make_shared<DiscfiKink>(params, theta_interval); break;
    case ModelId::cusp: model = std::make_shared<Cusp>(params, theta_interval); break;
    case ModelId::jump_shift: model = std::make_shared<JumpShift>(params, theta_interval); break;
    case ModelId::changepoint: model = std::make_shared<Changepoint>(params, theta_interval); break;
    case ModelId::window_sine: model = std::make_shared<WindowSine>(params, theta_interval); break;
    case ModelId::suffwin_linear: model = std::make_shared<SuffwinLinear>(params, theta_interval); break;
    case ModelId::phase_mod: model = std::make_shared<PhaseMod>(params, theta_interval); break;
    case ModelId::freq_mod: model = std::make_shared<FreqMod>(params, theta_interval); break;
    case ModelId::constant: model = std::make_shared<Constant>(params, theta_interval); break;
    case ModelId::flat: model = std::make_shared<Flat>(params, theta_interval); break;
    }
    if (!model) {
        fail(ErrorKind::configuration, "unknown model id");
    }
    model->validate();
    return model;
}

} // namespace nrpp
