#pragma once

#include "nrpp/catalog.hpp"
#include "nrpp/intensity.hpp"
#include "nrpp/window.hpp"

namespace nrpp {

/// Number of grid points used to measure level sets of the Fisher integrand.
inline constexpr int kLevelGridPoints = 100000;

/// r* with |{t : lambda_dot^2 / lambda >= r*}| = mu_star.
[[nodiscard]] double level_threshold(const IntensityModel& model, double theta, double mu_star);

/// The level set at r* as a union of intervals; boundaries refined to 1e-9.
/// Plateaus at the threshold are filled from the left.
[[nodiscard]] Window optimal_window(const IntensityModel& model, double theta, double mu_star);

/// [preliminary - n^{-1/8}, preliminary + n^{-1/8}] intersected with [0, tau].
[[nodiscard]] Window sufficient_window(double preliminary, int n, double horizon);

/// [alpha + s*, beta + s*] for the family lambda(t - theta).
[[nodiscard]] Window jump_sufficient_window(const ParameterInterval& theta, double jump_location, double horizon);

/// The same window for the shifted family lambda(t + theta): the jump sweeps
/// [s* - beta, s* - alpha].
[[nodiscard]] Window jump_sufficient_window(const catalog::JumpShift& model);

} // namespace nrpp
