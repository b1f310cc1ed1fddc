#include "nrpp/experiments.hpp"

#include "nrpp/analysis.hpp"
#include "nrpp/catalog.hpp"
#include "nrpp/errors.hpp"
#include "nrpp/likelihood.hpp"
#include "nrpp/parallel.hpp"
#include "nrpp/simulate.hpp"
#include "nrpp/windows.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace nrpp {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void bad_key(const std::string& path, const std::string& what) {
    fail(ErrorKind::configuration, "scenario key '" + path + "': " + what);
}

void reject_unknown(const json& object, const std::string& path, std::initializer_list<std::string_view> known) {
    if (!object.is_object()) {
        bad_key(path, "expected an object");
    }
    for (const auto& item : object.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            bad_key(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
        }
    }
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

const json& require(const json& object, const std::string& path, const std::string& key) {
    const auto it = object.find(key);
    if (it == object.end()) {
        bad_key(join(path, key), "missing required key");
    }
    return *it;
}

double as_number(const json& value, const std::string& path) {
    if (!value.is_number()) {
        bad_key(path, "expected a number");
    }
    return value.get<double>();
}

long long as_integer(const json& value, const std::string& path) {
    if (!value.is_number_integer()) {
        bad_key(path, "expected an integer");
    }
    return value.get<long long>();
}

std::string as_string(const json& value, const std::string& path) {
    if (!value.is_string()) {
        bad_key(path, "expected a string");
    }
    return value.get<std::string>();
}

std::vector<double> as_numbers(const json& value, const std::string& path) {
    if (!value.is_array()) {
        bad_key(path, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        out.push_back(as_number(value[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Method parse_method(const std::string& name, const std::string& path) {
    for (Method m : {Method::mle, Method::bayes, Method::moments}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    bad_key(path, "unknown estimator '" + name + "' (expected mle, bayes or moments)");
}

EstimatorSettings parse_estimator(const json& node, const std::string& path) {
    reject_unknown(node, path, {"grid_size", "refine", "prior", "bayes_panels", "zoom_levels", "zoom_points"});
    EstimatorSettings s;
    if (node.contains("grid_size")) {
        s.grid_size = static_cast<int>(as_integer(node["grid_size"], join(path, "grid_size")));
    }
    if (node.contains("refine")) {
        if (!node["refine"].is_boolean()) {
            bad_key(join(path, "refine"), "expected a boolean");
        }
        s.refine = node["refine"].get<bool>();
    }
    if (node.contains("bayes_panels")) {
        s.bayes_panels = static_cast<int>(as_integer(node["bayes_panels"], join(path, "bayes_panels")));
    }
    if (node.contains("zoom_levels")) {
        s.zoom_levels = static_cast<int>(as_integer(node["zoom_levels"], join(path, "zoom_levels")));
    }
    if (node.contains("zoom_points")) {
        s.zoom_points = static_cast<int>(as_integer(node["zoom_points"], join(path, "zoom_points")));
    }
    if (node.contains("prior")) {
        const json& prior = node["prior"];
        const std::string p = join(path, "prior");
        if (prior.is_string()) {
            if (prior.get<std::string>() != "uniform") {
                bad_key(p, "expected \"uniform\" or {thetas, density}");
            }
        } else {
            reject_unknown(prior, p, {"thetas", "density"});
            s.prior = Prior(as_numbers(require(prior, p, "thetas"), join(p, "thetas")),
                            as_numbers(require(prior, p, "density"), join(p, "density")));
        }
    }
    return s;
}

json estimator_to_json(const EstimatorSettings& s) {
    json out;
    out["grid_size"] = s.grid_size;
    out["refine"] = s.refine;
    if (s.prior.uniform()) {
        out["prior"] = "uniform";
    } else {
        out["prior"] = json{{"thetas", s.prior.thetas()}, {"density", s.prior.density()}};
    }
    out["bayes_panels"] = s.bayes_panels;
    out["zoom_levels"] = s.zoom_levels;
    out["zoom_points"] = s.zoom_points;
    return out;
}

// Pairwise summation keeps the rounding error small and the order fixed.
double pairwise_sum(const double* x, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            s += x[i];
        }
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, count - half);
}

double mean_of(const std::vector<double>& x) {
    return x.empty() ? kNaN : pairwise_sum(x.data(), x.size()) / static_cast<double>(x.size());
}

double variance_of(const std::vector<double>& x) {
    if (x.size() < 2) {
        return kNaN;
    }
    const double m = mean_of(x);
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sq[i] = (x[i] - m) * (x[i] - m);
    }
    return pairwise_sum(sq.data(), sq.size()) / static_cast<double>(x.size() - 1);
}

LimitKind limit_kind(Method method) {
    return method == Method::bayes ? LimitKind::bayes : LimitKind::mle;
}

json limit_to_json(const RegimeLimit& limit) {
    json out;
    out["regime"] = std::string(to_string(limit.regime));
    out["rate_exponent"] = limit.rate_exponent;
    std::visit(
        [&out](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, RegularLimit>) {
                out["fisher_information"] = p.information;
            } else if constexpr (std::is_same_v<T, MisspecAsymptotics>) {
                out["theta_star"] = p.theta_star;
                out["d_star_sq"] = p.d_star_sq;
                out["i_star"] = p.i_star;
                out["D_star_sq"] = p.d_big_sq;
            } else if constexpr (std::is_same_v<T, NonidentLimit>) {
                out["roots"] = p.covariance.roots;
                out["informations"] = p.covariance.informations;
                json rho = json::array();
                for (Eigen::Index i = 0; i < p.covariance.rho.rows(); ++i) {
                    json row = json::array();
                    for (Eigen::Index j = 0; j < p.covariance.rho.cols(); ++j) {
                        row.push_back(p.covariance.rho(i, j));
                    }
                    rho.push_back(row);
                }
                out["rho"] = rho;
                out["prior_weights"] = p.prior_weights;
            } else if constexpr (std::is_same_v<T, NullFisherLimit>) {
                out["information3"] = p.information3;
            } else if constexpr (std::is_same_v<T, DiscFisherLimit>) {
                out["fisher_information_minus"] = p.info_minus;
                out["fisher_information_plus"] = p.info_plus;
                out["rho"] = p.correlation;
            } else if constexpr (std::is_same_v<T, BoundaryLimit>) {
                out["fisher_information"] = p.information;
                out["upper"] = p.upper;
            } else if constexpr (std::is_same_v<T, CuspParams>) {
                out["kappa"] = p.kappa;
                out["hurst"] = p.hurst;
                out["gamma_sq"] = p.gamma_sq;
                out["grid_halfwidth"] = p.grid_halfwidth;
                out["grid_points"] = p.grid_points;
            } else if constexpr (std::is_same_v<T, JumpLimit>) {
                out["lambda_minus"] = p.sizes.lambda_minus;
                out["lambda_plus"] = p.sizes.lambda_plus;
                out["u_max"] = jump_horizon(p);
            }
        },
        limit.params);
    return out;
}

json nullable(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

} // namespace

std::string_view to_string(WindowMode mode) noexcept {
    switch (mode) {
    case WindowMode::none: return "none";
    case WindowMode::optimal: return "optimal";
    case WindowMode::sufficient: return "sufficient";
    case WindowMode::oracle: return "oracle";
    }
    return "unknown";
}

std::string_view to_string(Observation observation) noexcept {
    return observation == Observation::replicated ? "replicated" : "long_horizon";
}

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void Scenario::validate() const {
    if (n.empty()) {
        bad_key("n", "needs at least one sample size");
    }
    for (int size : n) {
        if (size < 1 || size >= (1 << 24)) {
            bad_key("n", "sample sizes must lie in [1, 2^24)");
        }
    }
    if (replicates < 1 || replicates >= (1 << 24)) {
        bad_key("replicates", "must lie in [1, 2^24)");
    }
    if (n.size() >= (std::size_t{1} << 15)) {
        bad_key("n", "too many sample sizes");
    }
    estimator.validate();
    if (methods.empty()) {
        bad_key("estimator.methods", "needs at least one method");
    }
    if (!(atom_epsilon > 0.0)) {
        bad_key("atom_epsilon", "must be positive");
    }
    if (rate_exponent && !(*rate_exponent > 0.0 && *rate_exponent <= 1.0)) {
        bad_key("rate_exponent", "must lie in (0, 1]");
    }
    if (window.mode != WindowMode::none) {
        if (window.mode != WindowMode::sufficient && !(window.mu_star > 0.0)) {
            bad_key("window.mu_star", "must be positive");
        }
        for (Method m : methods) {
            if (m == Method::moments) {
                bad_key("estimator.methods", "moments cannot be combined with a window");
            }
        }
        if (window.mode == WindowMode::optimal || window.mode == WindowMode::sufficient) {
            for (int size : n) {
                if (size < 9) {
                    bad_key("n", "two-stage estimation needs n >= 9");
                }
            }
        }
    }
    if (observation == Observation::long_horizon && !contamination.empty()) {
        bad_key("observation", "long_horizon observation does not support contamination");
    }
}

ModelPtr Scenario::build_model() const {
    return make_model(model, params, theta_interval);
}

TrueIntensity Scenario::build_truth(const ModelPtr& m) const {
    if (!m->theta_interval().contains_closed(theta0)) {
        bad_key("theta0", "must lie in the closure of Theta");
    }
    return TrueIntensity(m, theta0, contamination);
}

Scenario parse_scenario(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::configuration, std::string("scenario is not valid JSON: ") + e.what());
    }
    reject_unknown(root, "",
                   {"model", "params", "theta0", "theta_interval", "true_intensity", "regime", "rate_exponent", "n",
                    "replicates", "seed", "estimator", "window", "atom_epsilon", "limit_draws", "limit", "observation",
                    "output"});
    Scenario s;
    const std::string model_name = as_string(require(root, "", "model"), "model");
    const auto id = parse_model_id(model_name);
    if (!id) {
        bad_key("model", "unknown model '" + model_name + "'");
    }
    s.model = *id;
    if (root.contains("params")) {
        const json& params = root["params"];
        if (!params.is_object()) {
            bad_key("params", "expected an object");
        }
        for (const auto& item : params.items()) {
            s.params[item.key()] = as_number(item.value(), "params." + item.key());
        }
    }
    s.theta0 = as_number(require(root, "", "theta0"), "theta0");
    if (root.contains("theta_interval")) {
        const auto bounds = as_numbers(root["theta_interval"], "theta_interval");
        if (bounds.size() != 2) {
            bad_key("theta_interval", "expected [alpha, beta]");
        }
        s.theta_interval = ParameterInterval(bounds[0], bounds[1]);
    }
    if (root.contains("true_intensity")) {
        const json& truth = root["true_intensity"];
        reject_unknown(truth, "true_intensity", {"contamination"});
        if (truth.contains("contamination")) {
            const json& pieces = truth["contamination"];
            if (!pieces.is_array()) {
                bad_key("true_intensity.contamination", "expected an array");
            }
            for (std::size_t i = 0; i < pieces.size(); ++i) {
                const std::string p = "true_intensity.contamination[" + std::to_string(i) + "]";
                reject_unknown(pieces[i], p, {"lo", "hi", "coefficients"});
                ContaminationPiece piece;
                piece.lo = as_number(require(pieces[i], p, "lo"), p + ".lo");
                piece.hi = as_number(require(pieces[i], p, "hi"), p + ".hi");
                piece.coefficients = as_numbers(require(pieces[i], p, "coefficients"), p + ".coefficients");
                s.contamination.push_back(std::move(piece));
            }
        }
    }
    if (root.contains("regime")) {
        const std::string name = as_string(root["regime"], "regime");
        if (name != "none") {
            const auto regime = parse_regime(name);
            if (!regime) {
                bad_key("regime", "unknown regime '" + name + "'");
            }
            s.regime = *regime;
        }
    }
    if (root.contains("rate_exponent")) {
        s.rate_exponent = as_number(root["rate_exponent"], "rate_exponent");
    }
    const json& n = require(root, "", "n");
    if (n.is_array()) {
        for (std::size_t i = 0; i < n.size(); ++i) {
            s.n.push_back(static_cast<int>(as_integer(n[i], "n[" + std::to_string(i) + "]")));
        }
    } else {
        s.n.push_back(static_cast<int>(as_integer(n, "n")));
    }
    s.replicates = static_cast<int>(as_integer(require(root, "", "replicates"), "replicates"));
    const json& seed = require(root, "", "seed");
    if (!seed.is_number_unsigned()) {
        bad_key("seed", "expected a nonnegative integer");
    }
    s.seed = seed.get<std::uint64_t>();
    if (root.contains("estimator")) {
        json node = root["estimator"];
        if (node.is_object() && node.contains("methods")) {
            const json& methods = node["methods"];
            if (!methods.is_array()) {
                bad_key("estimator.methods", "expected an array of names");
            }
            s.methods.clear();
            for (std::size_t i = 0; i < methods.size(); ++i) {
                const std::string p = "estimator.methods[" + std::to_string(i) + "]";
                const Method m = parse_method(as_string(methods[i], p), p);
                if (std::find(s.methods.begin(), s.methods.end(), m) != s.methods.end()) {
                    bad_key(p, "duplicate method");
                }
                s.methods.push_back(m);
            }
            node.erase("methods");
        }
        s.estimator = parse_estimator(node, "estimator");
    }
    if (root.contains("window")) {
        const json& window = root["window"];
        reject_unknown(window, "window", {"mode", "mu_star"});
        if (window.contains("mode")) {
            const std::string mode = as_string(window["mode"], "window.mode");
            bool found = false;
            for (WindowMode m : {WindowMode::none, WindowMode::optimal, WindowMode::sufficient, WindowMode::oracle}) {
                if (to_string(m) == mode) {
                    s.window.mode = m;
                    found = true;
                }
            }
            if (!found) {
                bad_key("window.mode", "expected none, optimal, sufficient or oracle");
            }
        }
        if (window.contains("mu_star")) {
            s.window.mu_star = as_number(window["mu_star"], "window.mu_star");
        }
    }
    if (root.contains("atom_epsilon")) {
        s.atom_epsilon = as_number(root["atom_epsilon"], "atom_epsilon");
    }
    if (root.contains("limit_draws")) {
        const long long draws = as_integer(root["limit_draws"], "limit_draws");
        if (draws < 1) {
            bad_key("limit_draws", "must be positive");
        }
        s.limit_draws = static_cast<std::size_t>(draws);
    }
    if (root.contains("limit")) {
        const json& limit = root["limit"];
        reject_unknown(limit, "limit", {"grid_halfwidth", "grid_points"});
        if (limit.contains("grid_halfwidth")) {
            s.limit_halfwidth = as_number(limit["grid_halfwidth"], "limit.grid_halfwidth");
        }
        if (limit.contains("grid_points")) {
            s.limit_points = static_cast<int>(as_integer(limit["grid_points"], "limit.grid_points"));
        }
    }
    if (root.contains("observation")) {
        const std::string obs = as_string(root["observation"], "observation");
        if (obs == "replicated") {
            s.observation = Observation::replicated;
        } else if (obs == "long_horizon") {
            s.observation = Observation::long_horizon;
        } else {
            bad_key("observation", "expected replicated or long_horizon");
        }
    }
    if (root.contains("output")) {
        s.output = as_string(root["output"], "output");
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::configuration, "cannot open scenario file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

std::string scenario_to_json(const Scenario& s) {
    json out;
    out["model"] = std::string(to_string(s.model));
    out["params"] = json::object();
    for (const auto& [key, value] : s.params) {
        out["params"][key] = value;
    }
    out["theta0"] = s.theta0;
    if (s.theta_interval) {
        out["theta_interval"] = {s.theta_interval->alpha, s.theta_interval->beta};
    }
    if (!s.contamination.empty()) {
        json pieces = json::array();
        for (const auto& piece : s.contamination) {
            pieces.push_back({{"lo", piece.lo}, {"hi", piece.hi}, {"coefficients", piece.coefficients}});
        }
        out["true_intensity"] = {{"contamination", pieces}};
    }
    out["regime"] = s.regime ? std::string(to_string(*s.regime)) : std::string("none");
    if (s.rate_exponent) {
        out["rate_exponent"] = *s.rate_exponent;
    }
    out["n"] = s.n;
    out["replicates"] = s.replicates;
    out["seed"] = s.seed;
    json estimator = estimator_to_json(s.estimator);
    json methods = json::array();
    for (Method m : s.methods) {
        methods.push_back(std::string(to_string(m)));
    }
    estimator["methods"] = methods;
    out["estimator"] = estimator;
    out["window"] = {{"mode", std::string(to_string(s.window.mode))}, {"mu_star", s.window.mu_star}};
    out["atom_epsilon"] = s.atom_epsilon;
    out["limit_draws"] = s.limit_draws;
    out["limit"] = {{"grid_halfwidth", s.limit_halfwidth}, {"grid_points", s.limit_points}};
    out["observation"] = std::string(to_string(s.observation));
    out["output"] = s.output;
    return out.dump(2);
}

namespace {

MethodOutcome run_method(Method method, const IntensityModel& model, const Sample& sample,
                         const LikelihoodEvaluator* evaluator, const Scenario& scenario,
                         std::optional<double>& preliminary) {
    MethodOutcome out;
    try {
        switch (scenario.window.mode) {
        case WindowMode::none:
        case WindowMode::oracle:
            if (method == Method::moments) {
                out.estimate = moments_preliminary(model, sample).value;
            } else if (method == Method::mle) {
                out.estimate = mle(*evaluator, scenario.estimator).value;
            } else {
                out.estimate = bayes(*evaluator, scenario.estimator).value;
            }
            break;
        case WindowMode::optimal:
        case WindowMode::sufficient: {
            const TwoStageMode mode = scenario.window.mode == WindowMode::optimal ? TwoStageMode::optimal_window
                                                                                : TwoStageMode::sufficient_window;
            const TwoStageResult result =
                two_stage(model, sample, scenario.estimator, mode, scenario.window.mu_star, method);
            if (!preliminary) {
                preliminary = result.preliminary.value;
            }
            out.estimate = result.final.value;
            break;
        }
        }
        out.ok = true;
    } catch (const Error& e) {
        out.failure = std::string(to_string(e.kind()));
    }
    return out;
}

} // namespace

ExperimentReport run_scenario(const Scenario& scenario, int workers) {
    scenario.validate();
    ExperimentReport report;
    report.scenario = scenario;
    const ModelPtr model = scenario.build_model();
    const TrueIntensity truth = scenario.build_truth(model);

    if (scenario.regime) {
        LimitOptions options;
        options.prior = scenario.estimator.prior;
        options.grid_halfwidth = scenario.limit_halfwidth;
        options.grid_points = scenario.limit_points;
        try {
            report.limit = limit_params(*scenario.regime, *model, scenario.theta0, truth, options);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::numerical) {
                throw;
            }
            fail(ErrorKind::configuration, "regime '" + std::string(to_string(*scenario.regime)) +
                                               "' does not apply to this scenario: " + e.what());
        }
    }
    report.target = scenario.theta0;
    if (scenario.regime == Regime::misspecified) {
        report.target = std::get<MisspecAsymptotics>(report.limit->params).theta_star;
    }
    report.rate_exponent = scenario.rate_exponent  ? *scenario.rate_exponent
                           : report.limit          ? report.limit->rate_exponent
                                                   : 0.5;
    const bool raw_errors = scenario.regime == Regime::nonidentifiable;

    std::optional<Window> oracle_window;
    if (scenario.window.mode == WindowMode::oracle) {
        oracle_window = optimal_window(*model, scenario.theta0, scenario.window.mu_star);
    }
    if (scenario.observation == Observation::long_horizon) {
        (void)model->with_horizon(2.0 * model->horizon()); // capability check up front
    }

    const std::size_t sizes = scenario.n.size();
    const auto per_size = static_cast<std::size_t>(scenario.replicates);
    report.rows.resize(sizes * per_size);
    parallel_for(report.rows.size(), workers, [&](std::size_t index) {
        const std::size_t k = index / per_size;
        const auto r = static_cast<int>(index % per_size);
        const int n = scenario.n[k];
        ReplicateRow& row = report.rows[index];
        row.n_index = k;
        row.n = n;
        row.replicate = r;
        row.stream = streams::replicate_base(k, static_cast<std::uint64_t>(r));
        const RngStream base{scenario.seed, row.stream};
        Sample sample;
        if (scenario.observation == Observation::long_horizon) {
            const double tau = model->horizon();
            const double horizon = tau * n;
            const TrueIntensity long_truth(model->with_horizon(horizon), scenario.theta0);
            sample = slice_periodic(simulate_trajectory(long_truth, base), horizon, tau);
        } else {
            sample = simulate_sample(truth, n, base, 1);
        }
        row.events = sample.total_events();
        std::unique_ptr<LikelihoodEvaluator> evaluator;
        if (scenario.window.mode == WindowMode::none || scenario.window.mode == WindowMode::oracle) {
            evaluator = std::make_unique<LikelihoodEvaluator>(*model, sample, oracle_window);
        }
        const double scale = std::pow(static_cast<double>(n), report.rate_exponent);
        for (Method method : scenario.methods) {
            MethodOutcome outcome = run_method(method, *model, sample, evaluator.get(), scenario, row.preliminary);
            outcome.normalized =
                outcome.ok ? (raw_errors ? outcome.estimate : scale * (outcome.estimate - report.target)) : kNaN;
            if (!outcome.ok) {
                outcome.estimate = kNaN;
            }
            row.outcomes.push_back(std::move(outcome));
        }
    });

    // Limit draws, one set per estimator kind.
    std::vector<std::optional<std::vector<double>>> draws(scenario.methods.size());
    if (report.limit && scenario.window.mode == WindowMode::none) {
        for (std::size_t m = 0; m < scenario.methods.size(); ++m) {
            if (scenario.methods[m] == Method::moments) {
                continue;
            }
            try {
                draws[m] = sample_limits(*report.limit, limit_kind(scenario.methods[m]), scenario.limit_draws,
                                         scenario.seed, workers);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::capability) {
                    throw;
                }
            }
        }
    }

    for (std::size_t k = 0; k < sizes; ++k) {
        SizeSummary size;
        size.n = scenario.n[k];
        for (std::size_t m = 0; m < scenario.methods.size(); ++m) {
            MethodSummary summary;
            summary.method = scenario.methods[m];
            std::vector<double> estimates;
            std::vector<double> errors;
            std::vector<double> squared;
            std::vector<double> normalized_sq;
            std::size_t atoms = 0;
            for (std::size_t r = 0; r < per_size; ++r) {
                const MethodOutcome& o = report.rows[k * per_size + r].outcomes[m];
                if (!o.ok) {
                    ++summary.failed;
                    continue;
                }
                ++summary.ok;
                estimates.push_back(o.estimate);
                errors.push_back(o.normalized);
                squared.push_back((o.estimate - report.target) * (o.estimate - report.target));
                normalized_sq.push_back(o.normalized * o.normalized);
                if (std::abs(o.normalized) < scenario.atom_epsilon) {
                    ++atoms;
                }
            }
            summary.mean_estimate = mean_of(estimates);
            summary.var_estimate = variance_of(estimates);
            summary.mean_error = mean_of(errors);
            summary.var_error = variance_of(errors);
            summary.mse = mean_of(squared);
            summary.atom_frequency =
                summary.ok > 0 ? static_cast<double>(atoms) / static_cast<double>(summary.ok) : kNaN;
            if (!normalized_sq.empty()) {
                const double total = pairwise_sum(normalized_sq.data(), normalized_sq.size());
                summary.max_share =
                    total > 0.0 ? *std::max_element(normalized_sq.begin(), normalized_sq.end()) / total : 0.0;
            }
            if (draws[m] && !errors.empty()) {
                summary.ks = ks_two_sample(errors, *draws[m]);
            }
            size.methods.push_back(summary);
        }
        report.sizes.push_back(std::move(size));
    }

    const std::set<int> distinct(scenario.n.begin(), scenario.n.end());
    if (distinct.size() >= 3) {
        for (std::size_t m = 0; m < scenario.methods.size(); ++m) {
            std::vector<int> ns;
            std::vector<double> mses;
            for (const SizeSummary& size : report.sizes) {
                const double mse = size.methods[m].mse;
                if (std::isfinite(mse) && mse > 0.0) {
                    ns.push_back(size.n);
                    mses.push_back(mse);
                }
            }
            if (std::set<int>(ns.begin(), ns.end()).size() >= 3) {
                const RateRegression fit = rate_regression(ns, mses);
                report.rates.push_back({scenario.methods[m], fit.slope, fit.stderr_});
            }
        }
    }
    return report;
}

void write_table_csv(std::ostream& out, const ExperimentReport& report) {
    const auto& methods = report.scenario.methods;
    out << "n,replicate,stream,events,preliminary";
    for (Method m : methods) {
        out << ',' << to_string(m) << ',' << to_string(m) << "_normalized";
    }
    out << ",status\n";
    for (const ReplicateRow& row : report.rows) {
        out << row.n << ',' << row.replicate << ',' << row.stream << ',' << row.events << ',';
        if (row.preliminary) {
            out << format_number(*row.preliminary);
        }
        std::string status;
        for (std::size_t m = 0; m < row.outcomes.size(); ++m) {
            const MethodOutcome& o = row.outcomes[m];
            out << ',';
            if (o.ok) {
                out << format_number(o.estimate) << ',' << format_number(o.normalized);
            } else {
                out << ',';
                status += (status.empty() ? "" : ";") + std::string(to_string(methods[m])) + ":" + o.failure;
            }
        }
        out << ',' << (status.empty() ? "ok" : status) << '\n';
    }
}

std::string summary_json(const ExperimentReport& report) {
    json out;
    out["scenario"] = json::parse(scenario_to_json(report.scenario));
    out["target"] = report.target;
    out["rate_exponent"] = report.rate_exponent;
    out["limit"] = report.limit ? limit_to_json(*report.limit) : json(nullptr);
    json sizes = json::array();
    for (const SizeSummary& size : report.sizes) {
        json methods = json::object();
        for (const MethodSummary& s : size.methods) {
            methods[std::string(to_string(s.method))] = {
                {"ok", s.ok},
                {"failed", s.failed},
                {"mean_estimate", nullable(s.mean_estimate)},
                {"var_estimate", nullable(s.var_estimate)},
                {"mean_normalized", nullable(s.mean_error)},
                {"var_normalized", nullable(s.var_error)},
                {"mse", nullable(s.mse)},
                {"atom_frequency", nullable(s.atom_frequency)},
                {"max_share", nullable(s.max_share)},
                {"ks", s.ks ? json(*s.ks) : json(nullptr)},
            };
        }
        sizes.push_back({{"n", size.n}, {"methods", methods}});
    }
    out["sizes"] = sizes;
    if (!report.rates.empty()) {
        json slope = json::object();
        json stderr_ = json::object();
        for (const RateFit& fit : report.rates) {
            slope[std::string(to_string(fit.method))] = fit.slope;
            stderr_[std::string(to_string(fit.method))] = nullable(fit.stderr_);
        }
        out["rate_slope"] = slope;
        out["rate_stderr"] = stderr_;
    }
    return out.dump(2) + "\n";
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        fail(ErrorKind::domain, "KS statistic needs two nonempty samples");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) {
            ++i;
        }
        while (j < b.size() && b[j] == x) {
            ++j;
        }
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

RateRegression rate_regression(const std::vector<int>& ns, const std::vector<double>& mses) {
    if (ns.size() != mses.size()) {
        fail(ErrorKind::domain, "rate regression needs one mse per sample size");
    }
    if (std::set<int>(ns.begin(), ns.end()).size() < 3) {
        fail(ErrorKind::domain, "rate regression needs at least three distinct sample sizes");
    }
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1) {
            fail(ErrorKind::domain, "sample sizes must be positive");
        }
        if (!(mses[i] > 0.0) || !std::isfinite(mses[i])) {
            fail(ErrorKind::domain, "mse values must be positive and finite");
        }
        x.push_back(std::log(static_cast<double>(ns[i])));
        y.push_back(std::log(mses[i]));
    }
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    RateRegression fit;
    fit.slope = sxy / sxx;
    const double intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - intercept - fit.slope * x[i];
        sse += e * e;
    }
    fit.stderr_ = x.size() > 2 ? std::sqrt(sse / static_cast<double>(x.size() - 2) / sxx) : kNaN;
    return fit;
}

RegionScan region_scan(const std::vector<double>& x_grid, const std::vector<double>& h1_grid,
                       const std::vector<double>& h2_grid, double theta0, int workers) {
    RegionScan scan;
    scan.x = x_grid;
    scan.h1 = h1_grid;
    scan.h2 = h2_grid;
    scan.theta0 = theta0;
    for (double x : x_grid) {
        if (!(x > 1.0)) {
            fail(ErrorKind::domain, "region scan needs x > 1");
        }
    }
    const std::size_t nx = x_grid.size();
    const std::size_t n1 = h1_grid.size();
    const std::size_t n2 = h2_grid.size();
    scan.kl_consistent.assign(nx, std::vector<std::vector<bool>>(n1, std::vector<bool>(n2)));
    scan.predicate = scan.kl_consistent;
    std::vector<char> kl(nx * n1 * n2);
    const ParameterInterval theta(0.0, 1.0);
    const double tolerance = 2.0 * theta.width() / (kThetaStarJumpGrid - 1);
    parallel_for(kl.size(), workers, [&](std::size_t index) {
        const std::size_t i = index / (n1 * n2);
        const std::size_t j = (index / n2) % n1;
        const std::size_t k = index % n2;
        const ModelPtr model =
            make_model(ModelId::changepoint, {{"g1_const", 1.0}, {"g2_const", x_grid[i]}}, theta);
        const TrueIntensity truth(model, theta0,
                                  {ContaminationPiece{0.0, theta0, {h1_grid[j]}},
                                   ContaminationPiece{theta0, model->horizon(), {h2_grid[k]}}});
        kl[index] = std::abs(theta_star(truth, *model) - theta0) <= tolerance ? 1 : 0;
    });
    for (std::size_t i = 0; i < nx; ++i) {
        const auto [h1_max, h2_min] = consistency_region(x_grid[i]);
        for (std::size_t j = 0; j < n1; ++j) {
            for (std::size_t k = 0; k < n2; ++k) {
                scan.kl_consistent[i][j][k] = kl[(i * n1 + j) * n2 + k] != 0;
                scan.predicate[i][j][k] = h1_grid[j] < h1_max && h2_grid[k] > h2_min;
            }
        }
    }
    return scan;
}

void write_region_csv(std::ostream& out, const RegionScan& scan) {
    out << "x,h1,h2,kl_consistent,predicate\n";
    for (std::size_t i = 0; i < scan.x.size(); ++i) {
        for (std::size_t j = 0; j < scan.h1.size(); ++j) {
            for (std::size_t k = 0; k < scan.h2.size(); ++k) {
                out << format_number(scan.x[i]) << ',' << format_number(scan.h1[j]) << ','
                    << format_number(scan.h2[k]) << ',' << (scan.kl_consistent[i][j][k] ? 1 : 0) << ','
                    << (scan.predicate[i][j][k] ? 1 : 0) << '\n';
            }
        }
    }
}

} // namespace nrpp
