#pragma once

#include "nrpp/intensity.hpp"
#include "nrpp/simulate.hpp"
#include "nrpp/window.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace nrpp {

/// Log-likelihood of one sample under one model, prepared once and evaluated
/// at many theta values. Events outside the window are dropped.
class LikelihoodEvaluator {
public:
    LikelihoodEvaluator(const IntensityModel& model, const Sample& sample,
                        const std::optional<Window>& window = std::nullopt);
    LikelihoodEvaluator(const LikelihoodEvaluator&) = delete;
    LikelihoodEvaluator& operator=(const LikelihoodEvaluator&) = delete;

    /// Sum of ln lambda over retained events minus n times the integral of
    /// (lambda - 1) over the window. May be -inf.
    [[nodiscard]] double log_likelihood(double theta, Side side = Side::none) const;
    /// d/dtheta of log_likelihood; requires smoothness_order >= 1 away from kinks.
    [[nodiscard]] double score(double theta, Side side = Side::none) const;

    /// Sorted theta values in the closure of Theta where the likelihood may
    /// jump or kink: model kinks plus event-induced breakpoints.
    [[nodiscard]] std::vector<double> theta_breakpoints() const;

    [[nodiscard]] const IntensityModel& model() const noexcept { return model_; }
    [[nodiscard]] std::size_t trajectories() const noexcept { return n_; }
    [[nodiscard]] std::size_t retained_events() const noexcept { return events_.size(); }
    [[nodiscard]] const std::vector<Interval>& pieces() const noexcept { return pieces_; }

private:
    const IntensityModel& model_;
    std::size_t n_;
    std::vector<Interval> pieces_;
    std::vector<double> events_;
    std::unique_ptr<EventTerm> term_;
};

[[nodiscard]] double log_likelihood(const IntensityModel& model, double theta, const Sample& sample,
                                    const std::optional<Window>& window = std::nullopt);

/// Z_n(u) = L(theta0 + n^{-rate_exponent} u) / L(theta0), or its logarithm.
[[nodiscard]] double normalized_lr(const IntensityModel& model, double theta0, double u, double rate_exponent,
                                   const Sample& sample, bool log_space = false);

/// Log-likelihood on a grid. `left` and `right` hold one-sided limits; they
/// differ from `values` only at breakpoints (flagged in `breakpoint`).
struct LogLikelihoodCurve {
    std::vector<double> thetas;
    std::vector<double> values;
    std::vector<double> left;
    std::vector<double> right;
    std::vector<char> breakpoint;

    /// max of the value and both one-sided limits at index i.
    [[nodiscard]] double best_at(std::size_t i) const noexcept;
};

/// Evaluates the evaluator at the given sorted points; `breaks` marks which
/// of them get one-sided values.
[[nodiscard]] LogLikelihoodCurve evaluate_curve(const LikelihoodEvaluator& evaluator, std::vector<double> points,
                                                const std::vector<double>& breaks);

/// Uniform grid over the closure of Theta plus breakpoints.
[[nodiscard]] LogLikelihoodCurve likelihood_curve(const IntensityModel& model, const Sample& sample, int grid_size,
                                                  const std::optional<Window>& window = std::nullopt);

} // namespace nrpp
