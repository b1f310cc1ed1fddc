#pragma once

#include "nrpp/analysis.hpp"
#include "nrpp/estimators.hpp"
#include "nrpp/intensity.hpp"
#include "nrpp/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace nrpp {

enum class Regime { regular, misspecified, nonidentifiable, null_fisher, disc_fisher, boundary, cusp, jump };

[[nodiscard]] std::string_view to_string(Regime regime) noexcept;
[[nodiscard]] std::optional<Regime> parse_regime(std::string_view name) noexcept;
/// phi_n = n^{-rate}; the cusp rate depends on kappa and is not covered here.
[[nodiscard]] double default_rate_exponent(Regime regime) noexcept;

/// Which estimator's limit variable to draw.
enum class LimitKind { mle, bayes };

struct RegularLimit {
    double information{};
};

struct NullFisherLimit {
    double information3{};
};

struct DiscFisherLimit {
    double info_minus{};
    double info_plus{};
    double correlation{};
    double grid_halfwidth{20.0}; // bayes grid, in units of 1/sqrt(min information)
    int grid_points{2001};
};

struct BoundaryLimit {
    double information{};
    bool upper{false}; // theta0 on beta instead of alpha: draws are mirrored
};

struct NonidentLimit {
    NonIdentCovariance covariance;
    std::vector<double> prior_weights;
};

struct CuspParams {
    double kappa{};
    double hurst{};
    double gamma_sq{};
    double grid_halfwidth{20.0};
    int grid_points{2001};
};

struct JumpLimit {
    JumpSizes sizes;
    double halfwidth{20.0}; // in units of the slower expected log-Z decay
};

using LimitParams = std::variant<RegularLimit, MisspecAsymptotics, NonidentLimit, NullFisherLimit, DiscFisherLimit,
                                 BoundaryLimit, CuspParams, JumpLimit>;

struct RegimeLimit {
    Regime regime{Regime::regular};
    double rate_exponent{0.5};
    LimitParams params;
};

struct LimitOptions {
    Prior prior;                  // nonidentifiable Q_l weights
    double grid_halfwidth{20.0};  // cusp, jump and disc-fisher bayes grids
    int grid_points{2001};
};

/// Gamma^2 = 4 a^2 sin^2(2 pi kappa) B(1+kappa, 1+kappa) / (lambda0 cos(pi kappa)).
[[nodiscard]] double cusp_gamma_sq(double a, double kappa, double lambda0);

[[nodiscard]] RegimeLimit limit_params(Regime regime, const IntensityModel& model, double theta0,
                                       const std::optional<TrueIntensity>& truth = std::nullopt,
                                       const LimitOptions& options = {});

/// One draw of the limit variable of the given estimator.
[[nodiscard]] double sample_limit(const RegimeLimit& limit, CounterEngine& engine, LimitKind which);

/// `count` draws; draw d uses stream limit_draw(d) of `seed`, so the result
/// does not depend on `workers`.
[[nodiscard]] std::vector<double> sample_limits(const RegimeLimit& limit, LimitKind which, std::size_t count,
                                                std::uint64_t seed, int workers = 1);

/// Exact Gaussian sampler for fBm on a fixed grid, via a Cholesky factor of
/// the covariance of the nonzero grid points. Immutable after construction.
class FbmSampler {
public:
    FbmSampler(double hurst, std::vector<double> grid);

    [[nodiscard]] const std::vector<double>& grid() const noexcept { return grid_; }
    [[nodiscard]] double hurst() const noexcept { return hurst_; }
    /// W at every grid point; exactly 0 where the grid point is 0.
    [[nodiscard]] std::vector<double> draw(CounterEngine& engine) const;

private:
    double hurst_;
    std::vector<double> grid_;
    std::vector<std::size_t> free_; // indices of nonzero grid points
    Eigen::MatrixXd factor_;
};

/// Shared sampler for the symmetric grid of `points` nodes on [-halfwidth, halfwidth].
[[nodiscard]] std::shared_ptr<const FbmSampler> symmetric_fbm_sampler(double hurst, double halfwidth, int points);

[[nodiscard]] std::vector<double> simulate_fbm(double hurst, const std::vector<double>& grid, CounterEngine& engine);

/// Realized limit likelihood ratio of the jump regime on [-u_max, u_max].
class JumpPath {
public:
    JumpPath(const JumpSizes& sizes, double u_max, CounterEngine& engine);

    /// ln Z(u) with the requested one-sided limit at jump points.
    [[nodiscard]] double log_z(double u, Side side = Side::none) const;
    /// Point maximizing max(Z(u-), Z(u+)); smallest u on ties.
    [[nodiscard]] double argmax() const;
    [[nodiscard]] double sup_log_z() const;
    /// Integral of u Z over integral of Z, exact between jump points.
    [[nodiscard]] double posterior_mean() const;

    [[nodiscard]] double u_max() const noexcept { return u_max_; }
    [[nodiscard]] const std::vector<double>& positive_events() const noexcept { return positive_; }
    [[nodiscard]] const std::vector<double>& negative_events() const noexcept { return negative_; }

private:
    struct Candidate {
        double u;
        double log_value;
    };
    [[nodiscard]] std::vector<Candidate> candidates() const;

    double log_ratio_;  // ln(lambda_plus / lambda_minus)
    double rate_gap_;   // lambda_plus - lambda_minus
    double u_max_;
    std::vector<double> positive_; // swept at rate lambda_minus for u > 0
    std::vector<double> negative_; // |u| of events swept at rate lambda_plus for u < 0
};

/// u_max used by the jump sampler: halfwidth over the slower log-Z decay rate.
[[nodiscard]] double jump_horizon(const JumpLimit& limit);

} // namespace nrpp
