#pragma once

#include "nrpp/intensity.hpp"
#include "nrpp/quadrature.hpp"
#include "nrpp/window.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace nrpp {

struct MisspecAsymptotics {
    double theta_star{0.0};
    double d_star_sq{0.0};
    double i_star{0.0};
    double d_big_sq{0.0}; // d*^2 / I*^2
};

struct NonIdentCovariance {
    std::vector<double> roots;
    std::vector<double> informations;
    Eigen::MatrixXd rho;
};

/// Integral of lambda_dot^2 / lambda over the window (default [0, tau]).
/// At a kink in theta a side must be supplied.
[[nodiscard]] double fisher_information(const IntensityModel& model, double theta,
                                        const std::optional<Window>& window = std::nullopt, Side side = Side::none,
                                        const QuadratureRule& rule = {});

/// Integral of lambda_dddot^2 / ((3!)^2 lambda) over [0, tau].
[[nodiscard]] double higher_order_information(const IntensityModel& model, double theta, int order = 3,
                                              const QuadratureRule& rule = {});

/// Score correlation (I_a I_b)^{-1/2} * integral of lambda_dot_a lambda_dot_b / lambda_b,
/// where a and b are (theta, side) pairs.
[[nodiscard]] double score_correlation(const IntensityModel& model, double theta_a, Side side_a, double theta_b,
                                       Side side_b, const QuadratureRule& rule = {});

/// Squared Hellinger-type distance: integral of (sqrt lambda_2 - sqrt lambda_1)^2.
[[nodiscard]] double hellinger_sq(const IntensityModel& model, double theta1, double theta2,
                                  const QuadratureRule& rule = {});

/// Kullback-Leibler objective of the model at theta against the true intensity.
[[nodiscard]] double kl_objective(const TrueIntensity& truth, const IntensityModel& model, double theta,
                                  const QuadratureRule& rule = {});

/// Pseudo-true parameter minimizing kl_objective over the closure of Theta.
[[nodiscard]] double theta_star(const TrueIntensity& truth, const IntensityModel& model,
                                const QuadratureRule& rule = {});

[[nodiscard]] MisspecAsymptotics misspec_asymptotics(const TrueIntensity& truth, const IntensityModel& model,
                                                     const QuadratureRule& rule = {});

/// Normalized consistency thresholds (h1_max, h2_min) for ratio x = g2/g1 > 1.
[[nodiscard]] std::pair<double, double> consistency_region(double x);

[[nodiscard]] NonIdentCovariance nonident_covariance(const IntensityModel& model, const std::vector<double>& roots,
                                                     const QuadratureRule& rule = {});

/// Grid sizes used by theta_star.
inline constexpr int kThetaStarSmoothGrid = 2001;
inline constexpr int kThetaStarJumpGrid = 20001;

} // namespace nrpp
