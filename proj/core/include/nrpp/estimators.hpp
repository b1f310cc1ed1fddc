#pragma once

#include "nrpp/intensity.hpp"
#include "nrpp/likelihood.hpp"
#include "nrpp/simulate.hpp"
#include "nrpp/window.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace nrpp {

enum class Method { mle, bayes, moments, two_stage };

[[nodiscard]] std::string_view to_string(Method method) noexcept;

/// Prior density on Theta: uniform, or piecewise linear through user grid points.
class Prior {
public:
    Prior() = default;
    Prior(std::vector<double> thetas, std::vector<double> density);

    [[nodiscard]] bool uniform() const noexcept { return thetas_.empty(); }
    [[nodiscard]] double operator()(double theta) const noexcept;
    /// Throws a configuration error unless the density is positive on the closure of Theta.
    void validate(const ParameterInterval& interval) const;

    [[nodiscard]] const std::vector<double>& thetas() const noexcept { return thetas_; }
    [[nodiscard]] const std::vector<double>& density() const noexcept { return density_; }

private:
    std::vector<double> thetas_;
    std::vector<double> density_;
};

struct EstimatorSettings {
    int grid_size{4001};
    bool refine{true};
    Prior prior;
    int bayes_panels{4096};
    /// Extra grid passes on the cells around the current maximizer.
    int zoom_levels{0};
    int zoom_points{201};

    void validate() const;
};

struct Estimate {
    double value{0.0};
    double objective_at_value{0.0};
    Method method{Method::mle};
};

/// Grid argmax of the likelihood including one-sided values at breakpoints,
/// refined inside the neighbouring cells. Ties go to the smallest theta.
[[nodiscard]] Estimate mle(const IntensityModel& model, const Sample& sample, const EstimatorSettings& settings = {},
                           const std::optional<Window>& window = std::nullopt);
[[nodiscard]] Estimate mle(const LikelihoodEvaluator& evaluator, const EstimatorSettings& settings);

/// Posterior mean by composite Simpson over Theta, split at breakpoints.
[[nodiscard]] Estimate bayes(const IntensityModel& model, const Sample& sample, const EstimatorSettings& settings = {},
                             const std::optional<Window>& window = std::nullopt);
[[nodiscard]] Estimate bayes(const LikelihoodEvaluator& evaluator, const EstimatorSettings& settings);

/// tau - (Lambda_hat - a tau^2) / b for SUFFWIN_LINEAR, clamped into the closure of Theta.
[[nodiscard]] Estimate moments_preliminary(const IntensityModel& model, const Sample& sample);
[[nodiscard]] double moments_formula(double a, double b, double tau, double lambda_hat) noexcept;

enum class TwoStageMode { optimal_window, sufficient_window };

struct TwoStageResult {
    Estimate preliminary;
    Window window;
    Estimate final;
};

/// First floor(sqrt n) trajectories give the preliminary value, which picks
/// the window; the rest, restricted to it, give the final estimate.
[[nodiscard]] TwoStageResult two_stage(const IntensityModel& model, const Sample& sample,
                                       const EstimatorSettings& settings, TwoStageMode mode, double mu_star = 0.0,
                                       Method final_method = Method::mle);

} // namespace nrpp
