#pragma once

#include "nrpp/estimators.hpp"
#include "nrpp/intensity.hpp"
#include "nrpp/limits.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nrpp {

enum class WindowMode { none, optimal, sufficient, oracle };
enum class Observation { replicated, long_horizon };

[[nodiscard]] std::string_view to_string(WindowMode mode) noexcept;
[[nodiscard]] std::string_view to_string(Observation observation) noexcept;

struct WindowSpec {
    WindowMode mode{WindowMode::none};
    double mu_star{0.0};
};

/// One replicated Monte Carlo experiment, as read from a scenario file.
struct Scenario {
    ModelId model{ModelId::regular_exp};
    ModelParams params;
    double theta0{0.0};
    std::optional<ParameterInterval> theta_interval;
    std::vector<ContaminationPiece> contamination;
    std::optional<Regime> regime;        // nullopt: no limit law comparison
    std::optional<double> rate_exponent; // overrides the regime's rate
    std::vector<int> n;
    int replicates{1};
    std::uint64_t seed{0};
    EstimatorSettings estimator;
    std::vector<Method> methods{Method::mle, Method::bayes};
    WindowSpec window;
    double atom_epsilon{0.05};
    std::size_t limit_draws{100000};
    double limit_halfwidth{20.0};
    int limit_points{2001};
    Observation observation{Observation::replicated};
    std::string output;

    /// Throws a configuration error naming the offending key.
    void validate() const;
    [[nodiscard]] ModelPtr build_model() const;
    [[nodiscard]] TrueIntensity build_truth(const ModelPtr& model) const;
};

/// Parses a JSON scenario document; unknown keys and missing required keys
/// raise configuration errors naming the key path.
[[nodiscard]] Scenario parse_scenario(std::string_view text);
[[nodiscard]] Scenario load_scenario(const std::string& path);
/// Complete JSON rendering; parse_scenario(scenario_to_json(s)) reproduces s.
[[nodiscard]] std::string scenario_to_json(const Scenario& scenario);

struct MethodOutcome {
    double estimate{};
    double normalized{};
    bool ok{false};
    std::string failure; // error kind when !ok
};

struct ReplicateRow {
    std::size_t n_index{};
    int n{};
    int replicate{};
    std::uint64_t stream{};
    std::size_t events{};
    std::optional<double> preliminary; // two-stage only, from the first method
    std::vector<MethodOutcome> outcomes; // parallel to Scenario::methods
};

struct MethodSummary {
    Method method{Method::mle};
    std::size_t ok{};
    std::size_t failed{};
    double mean_estimate{};
    double var_estimate{};
    double mean_error{};     // normalized
    double var_error{};      // normalized
    double mse{};            // raw, (estimate - target)^2
    double atom_frequency{}; // |normalized| < atom_epsilon
    double max_share{};      // largest single contribution to the sum of squared normalized errors
    std::optional<double> ks;
};

struct SizeSummary {
    int n{};
    std::vector<MethodSummary> methods;
};

struct RateFit {
    Method method{Method::mle};
    double slope{};
    double stderr_{};
};

struct ExperimentReport {
    Scenario scenario;
    double target{};
    double rate_exponent{};
    std::optional<RegimeLimit> limit;
    std::vector<ReplicateRow> rows;
    std::vector<SizeSummary> sizes;
    std::vector<RateFit> rates;
};

/// Runs every (n, replicate) pair. Replicate r at the k-th size draws from
/// stream replicate_base(k, r) of the scenario seed, so results do not depend
/// on `workers`. Estimation failures are recorded per row.
[[nodiscard]] ExperimentReport run_scenario(const Scenario& scenario, int workers = 1);

/// Header: n,replicate,stream,events,preliminary, then <method>,<method>_normalized
/// per method, then status.
void write_table_csv(std::ostream& out, const ExperimentReport& report);
[[nodiscard]] std::string summary_json(const ExperimentReport& report);

/// Two-sample Kolmogorov-Smirnov statistic by an exact merge sweep.
[[nodiscard]] double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct RateRegression {
    double slope{};
    double stderr_{};
};

/// OLS of ln(mse) on ln(n).
[[nodiscard]] RateRegression rate_regression(const std::vector<int>& ns, const std::vector<double>& mses);

struct RegionScan {
    std::vector<double> x;
    std::vector<double> h1;
    std::vector<double> h2;
    double theta0{0.5};
    /// [x][h1][h2]: the pseudo-true value equals theta0 within tolerance.
    std::vector<std::vector<std::vector<bool>>> kl_consistent;
    /// [x][h1][h2]: the closed-form region h1 < r - 1 and h2 > r - x.
    std::vector<std::vector<std::vector<bool>>> predicate;
};

/// Change point with g1 = 1, g2 = x on Theta = (0, 1) and true intensity
/// (1 + h1) before theta0, (x + h2) after it.
[[nodiscard]] RegionScan region_scan(const std::vector<double>& x_grid, const std::vector<double>& h1_grid,
                                     const std::vector<double>& h2_grid, double theta0 = 0.5, int workers = 1);

void write_region_csv(std::ostream& out, const RegionScan& scan);

/// printf("%.17g") rendering used for every number in CSV output.
[[nodiscard]] std::string format_number(double value);

} // namespace nrpp
