#pragma once

#include "nrpp/intensity.hpp"

namespace nrpp::catalog {

/// Absolute tolerance used to decide that an event sits exactly on a jump.
inline constexpr double kJumpTolerance = 1e-12;

/// lambda = exp(theta t). Smooth regular baseline.
class RegularExp final : public IntensityModel {
public:
    RegularExp(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    double integral_derivative(double theta, double lo, double hi, Side side) const override;
    std::unique_ptr<EventTerm> prepare(std::span<const double> events) const override;
};

/// The non-identifiable cubic family exactly as printed:
/// (theta^3 - 3 theta^2 + 2 theta) t + (2 theta - 3) t^2 + 1.
/// On its printed Theta = (0, 3) it takes negative values, so construction
/// only succeeds on sub-intervals where it is nonnegative.
class NonidentCubic final : public IntensityModel {
public:
    NonidentCubic(const ModelParams& params, std::optional<ParameterInterval> theta);
    static double formula(double theta, double t) noexcept;
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
};

/// Corrected non-identifiable family 1 + t^2 + (theta-1)(theta-2)(t + theta t^2):
/// lambda(1, .) = lambda(2, .) = 1 + t^2 and no other pair coincides.
class NonidentFixed final : public IntensityModel {
public:
    NonidentFixed(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    double integral_derivative(double theta, double lo, double hi, Side side) const override;
    std::vector<double> aliases(double theta) const override;
};

/// lambda = theta sin^2(theta t) + 2; zero Fisher information at theta = 0.
class NullfiSine final : public IntensityModel {
public:
    NullfiSine(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    double integral_derivative(double theta, double lo, double hi, Side side) const override;
};

/// lambda = (theta-1)[3t 1{theta<1} + 5t^2 1{theta>=1}] + 15; one-sided
/// derivatives differ at theta = 1.
class DiscfiKink final : public IntensityModel {
public:
    DiscfiKink(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    double integral_derivative(double theta, double lo, double hi, Side side) const override;
    std::vector<double> theta_breakpoints() const override;
    ThetaRegularity theta_regularity() const override { return ThetaRegularity::piecewise_smooth; }

    static constexpr double kKink = 1.0;
};

/// lambda = a |t - theta|^kappa + lambda0 with kappa in (0, 1/2).
class Cusp final : public IntensityModel {
public:
    Cusp(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    std::vector<double> t_breakpoints(double theta) const override;
    ThetaRegularity theta_regularity() const override { return ThetaRegularity::rough; }
    std::unique_ptr<EventTerm> prepare(std::span<const double> events) const override;

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double kappa() const noexcept { return kappa_; }
    [[nodiscard]] double lambda0() const noexcept { return lambda0_; }

private:
    double a_, kappa_, lambda0_;
};

/// Shifted profile lambda(t + theta) with a jump of the profile at y = s*:
/// profile(y) = (y < s* ? lambda_minus : lambda_plus) + amp sin(omega y).
class JumpShift final : public IntensityModel {
public:
    JumpShift(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    std::vector<double> t_breakpoints(double theta) const override;
    bool has_event_breakpoints() const override { return true; }
    void event_theta_breakpoints(double t, std::vector<double>& out) const override;
    ThetaRegularity theta_regularity() const override { return ThetaRegularity::piecewise_smooth; }
    std::optional<JumpSizes> jump_at(double theta0) const override;
    std::unique_ptr<EventTerm> prepare(std::span<const double> events) const override;

    [[nodiscard]] double s_star() const noexcept { return s_star_; }

private:
    double lambda_minus_, lambda_plus_, s_star_, amp_, omega_;
};

/// Change point: g1(t) before theta, g2(t) from theta on; g_i linear.
class Changepoint final : public IntensityModel {
public:
    Changepoint(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    std::vector<double> t_breakpoints(double theta) const override;
    bool has_event_breakpoints() const override { return true; }
    void event_theta_breakpoints(double t, std::vector<double>& out) const override;
    ThetaRegularity theta_regularity() const override { return ThetaRegularity::piecewise_smooth; }
    std::optional<JumpSizes> jump_at(double theta0) const override;
    std::unique_ptr<EventTerm> prepare(std::span<const double> events) const override;

    [[nodiscard]] double g1(double t) const noexcept { return g1_const_ + g1_slope_ * t; }
    [[nodiscard]] double g2(double t) const noexcept { return g2_const_ + g2_slope_ * t; }

private:
    double g1_const_, g1_slope_, g2_const_, g2_slope_;
};

/// lambda = [b + theta sin(omega t)]^2 on one period tau = 2 pi / omega.
class WindowSine final : public IntensityModel {
public:
    WindowSine(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    double integral_derivative(double theta, double lo, double hi, Side side) const override;
    std::unique_ptr<EventTerm> prepare(std::span<const double> events) const override;

    [[nodiscard]] double omega() const noexcept { return omega_; }

private:
    double b_, omega_;
};

/// lambda = 2 a t + b 1{t > theta}.
class SuffwinLinear final : public IntensityModel {
public:
    SuffwinLinear(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    std::vector<double> t_breakpoints(double theta) const override;
    bool has_event_breakpoints() const override { return true; }
    void event_theta_breakpoints(double t, std::vector<double>& out) const override;
    ThetaRegularity theta_regularity() const override { return ThetaRegularity::piecewise_smooth; }
    std::optional<JumpSizes> jump_at(double theta0) const override;
    std::unique_ptr<EventTerm> prepare(std::span<const double> events) const override;

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }

private:
    double a_, b_;
};

/// Periodic profile: mean + amplitude sin(2 pi y / period), or the square wave
/// mean +/- amplitude switching at half periods when `discontinuous` is set.
struct PeriodicProfile {
    double mean{2.0};
    double amplitude{1.0};
    double period{1.0};
    bool discontinuous{false};

    [[nodiscard]] double value(double y, Side side) const noexcept;
    [[nodiscard]] double derivative(double y, int order) const noexcept;
    /// Antiderivative from 0.
    [[nodiscard]] double primitive(double y) const noexcept;
    /// Jump locations kP/2 inside [lo, hi].
    void jumps_in(double lo, double hi, std::vector<double>& out) const;
};

/// Phase modulation lambda(t + theta) of a periodic profile.
class PhaseMod final : public IntensityModel {
public:
    PhaseMod(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    std::vector<double> t_breakpoints(double theta) const override;
    bool has_event_breakpoints() const override { return profile_.discontinuous; }
    void event_theta_breakpoints(double t, std::vector<double>& out) const override;
    ThetaRegularity theta_regularity() const override;
    std::shared_ptr<const IntensityModel> with_horizon(double horizon) const override;

private:
    PeriodicProfile profile_;
};

/// Frequency modulation lambda(theta t) of a periodic profile.
class FreqMod final : public IntensityModel {
public:
    FreqMod(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    std::vector<double> t_breakpoints(double theta) const override;
    bool has_event_breakpoints() const override { return profile_.discontinuous; }
    void event_theta_breakpoints(double t, std::vector<double>& out) const override;
    ThetaRegularity theta_regularity() const override;
    std::shared_ptr<const IntensityModel> with_horizon(double horizon) const override;

private:
    PeriodicProfile profile_;
};

/// lambda = theta (homogeneous); closed-form MLE N / (n tau).
class Constant final : public IntensityModel {
public:
    Constant(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    double integral_derivative(double theta, double lo, double hi, Side side) const override;
    std::unique_ptr<EventTerm> prepare(std::span<const double> events) const override;
};

/// lambda = level, independent of theta (level 0 gives the empty process).
class Flat final : public IntensityModel {
public:
    Flat(const ModelParams& params, std::optional<ParameterInterval> theta);
    double value(double theta, double t, Side side) const override;
    double derivative(double theta, double t, int order, Side side) const override;
    double integral(double theta, double lo, double hi) const override;
    double integral_derivative(double theta, double lo, double hi, Side side) const override;

private:
    double level_;
};

} // namespace nrpp::catalog
