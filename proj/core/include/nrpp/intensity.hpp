#pragma once

#include "nrpp/window.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nrpp {

/// Open parameter set Theta = (alpha, beta). Estimators search its closure.
struct ParameterInterval {
    double alpha{0.0};
    double beta{1.0};

    ParameterInterval() = default;
    ParameterInterval(double lo, double hi);

    [[nodiscard]] double width() const noexcept { return beta - alpha; }
    [[nodiscard]] double midpoint() const noexcept { return 0.5 * (alpha + beta); }
    [[nodiscard]] bool contains_closed(double theta) const noexcept { return theta >= alpha && theta <= beta; }
    [[nodiscard]] bool contains_open(double theta) const noexcept { return theta > alpha && theta < beta; }
};

/// One-sided limit selector. `left` means the limit as theta increases to the
/// evaluation point, `right` as it decreases to it.
enum class Side { none, left, right };

enum class ModelId {
    regular_exp,
    nonident_cubic,
    nonident_fixed,
    nullfi_sine,
    discfi_kink,
    cusp,
    jump_shift,
    changepoint,
    window_sine,
    suffwin_linear,
    phase_mod,
    freq_mod,
    constant,
    flat
};

[[nodiscard]] std::string_view to_string(ModelId id) noexcept;
[[nodiscard]] std::optional<ModelId> parse_model_id(std::string_view name) noexcept;

enum class ThetaRegularity {
    smooth,           // C^k in theta everywhere
    piecewise_smooth, // smooth between declared and event-induced breakpoints
    rough             // continuous, with undeclared non-smooth points (cusps at events)
};

/// Intensity one-sided limits at a jump, oriented so that for u > 0 the swept
/// events occur at rate `lambda_minus` and the model switches them to
/// `lambda_plus`.
struct JumpSizes {
    double lambda_minus{0.0};
    double lambda_plus{0.0};
};

using ModelParams = std::map<std::string, double>;

class IntensityModel;

/// Event-sum part of the log-likelihood for one fixed, sorted event set.
/// Models with sufficient statistics override this to avoid per-event work.
class EventTerm {
public:
    virtual ~EventTerm() = default;
    /// Sum over events of ln lambda(theta, t_i).
    [[nodiscard]] virtual double log_sum(double theta, Side side) const = 0;
    /// Sum over events of d/dtheta ln lambda(theta, t_i).
    [[nodiscard]] virtual double score_sum(double theta, Side side) const = 0;
};

/// Parametric intensity family lambda(theta, t) on [0, tau], theta in Theta.
/// Instances are immutable and shared between threads.
class IntensityModel : public std::enable_shared_from_this<IntensityModel> {
public:
    virtual ~IntensityModel() = default;

    [[nodiscard]] ModelId id() const noexcept { return id_; }
    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] const ParameterInterval& theta_interval() const noexcept { return theta_interval_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] double lambda_max() const noexcept { return lambda_max_; }
    [[nodiscard]] int smoothness_order() const noexcept { return smoothness_order_; }

    /// lambda(theta, t), with domain checks.
    [[nodiscard]] double evaluate(double theta, double t, Side side = Side::none) const;
    /// Expected count Lambda(t) by composite quadrature.
    [[nodiscard]] double cumulative(double theta, double t) const;
    /// Analytic theta-derivative of the given order (1..3).
    [[nodiscard]] double theta_derivative(double theta, double t, int order, Side side = Side::none) const;

    /// Unchecked evaluation used in inner loops.
    [[nodiscard]] virtual double value(double theta, double t, Side side = Side::none) const = 0;
    /// Unchecked derivative; callers guarantee order <= smoothness_order.
    [[nodiscard]] virtual double derivative(double theta, double t, int order, Side side) const;

    /// Integral of lambda(theta, .) over [lo, hi]. Exact where the family has a
    /// closed-form antiderivative; the default is composite quadrature.
    [[nodiscard]] virtual double integral(double theta, double lo, double hi) const;
    /// Integral of d/dtheta lambda(theta, .) over [lo, hi].
    [[nodiscard]] virtual double integral_derivative(double theta, double lo, double hi, Side side) const;

    /// Points in [0, tau] where lambda(theta, .) is not smooth.
    [[nodiscard]] virtual std::vector<double> t_breakpoints(double theta) const;
    /// Points in Theta where lambda(., t) is not smooth for every t.
    [[nodiscard]] virtual std::vector<double> theta_breakpoints() const;
    /// Whether single events induce theta-discontinuities of the likelihood.
    [[nodiscard]] virtual bool has_event_breakpoints() const { return false; }
    /// Appends theta values in the closure of Theta where lambda(., t) jumps.
    virtual void event_theta_breakpoints(double t, std::vector<double>& out) const;
    [[nodiscard]] virtual ThetaRegularity theta_regularity() const { return ThetaRegularity::smooth; }

    /// Builds the event-sum evaluator for a sorted event list. The returned
    /// object references `sorted_events`, which must outlive it.
    [[nodiscard]] virtual std::unique_ptr<EventTerm> prepare(std::span<const double> sorted_events) const;

    /// Parameters with lambda(theta', .) == lambda(theta, .), including theta.
    [[nodiscard]] virtual std::vector<double> aliases(double theta) const;
    /// Jump description at theta0 for discontinuous families.
    [[nodiscard]] virtual std::optional<JumpSizes> jump_at(double theta0) const;
    /// Copy of the family observed on a longer horizon (periodic families only).
    [[nodiscard]] virtual std::shared_ptr<const IntensityModel> with_horizon(double horizon) const;

    /// Grid scan of positivity and of the certified bound; throws a
    /// configuration error describing the first violation.
    void validate() const;

protected:
    IntensityModel(ModelId id, ModelParams params, ParameterInterval theta_interval, double horizon,
                   double lambda_max, int smoothness_order);

    void check_arguments(double theta, double t) const;

private:
    ModelId id_;
    ModelParams params_;
    ParameterInterval theta_interval_;
    double horizon_;
    double lambda_max_;
    int smoothness_order_;
};

using ModelPtr = std::shared_ptr<const IntensityModel>;

/// Default event term: loops over the events through IntensityModel::value.
class GenericEventTerm final : public EventTerm {
public:
    GenericEventTerm(const IntensityModel& model, std::span<const double> sorted_events)
        : model_(model), events_(sorted_events) {}

    [[nodiscard]] double log_sum(double theta, Side side) const override;
    [[nodiscard]] double score_sum(double theta, Side side) const override;

private:
    const IntensityModel& model_;
    std::span<const double> events_;
};

/// Polynomial contamination sum_k c_k t^k on [lo, hi).
struct ContaminationPiece {
    double lo{0.0};
    double hi{0.0};
    std::vector<double> coefficients;

    [[nodiscard]] double value(double t) const noexcept;
    [[nodiscard]] double integral(double a, double b) const noexcept;
    [[nodiscard]] double abs_bound() const noexcept;
};

/// Intensity that generates the data: a catalog model at theta0, optionally
/// plus an additive piecewise-polynomial contamination h(t).
class TrueIntensity {
public:
    TrueIntensity(ModelPtr model, double theta0, std::vector<ContaminationPiece> contamination = {});

    [[nodiscard]] const ModelPtr& model() const noexcept { return model_; }
    [[nodiscard]] double theta0() const noexcept { return theta0_; }
    [[nodiscard]] const std::vector<ContaminationPiece>& contamination() const noexcept { return contamination_; }
    [[nodiscard]] bool contaminated() const noexcept { return !contamination_.empty(); }
    [[nodiscard]] double horizon() const noexcept { return model_->horizon(); }
    [[nodiscard]] double lambda_max() const noexcept { return lambda_max_; }

    [[nodiscard]] double value(double t) const;
    [[nodiscard]] double integral(double lo, double hi) const;
    [[nodiscard]] std::vector<double> breakpoints() const;

private:
    ModelPtr model_;
    double theta0_;
    std::vector<ContaminationPiece> contamination_;
    double lambda_max_;
};

/// Builds a catalog model; unknown parameter names are rejected.
[[nodiscard]] ModelPtr make_model(ModelId id, const ModelParams& params = {},
                                  std::optional<ParameterInterval> theta_interval = std::nullopt);

} // namespace nrpp
