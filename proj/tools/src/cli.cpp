#include "nrpp_cli/cli.hpp"

#include "nrpp/errors.hpp"
#include "nrpp/experiments.hpp"
#include "nrpp/likelihood.hpp"
#include "nrpp/limits.hpp"
#include "nrpp/simulate.hpp"
#include "nrpp/windows.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>

namespace nrpp::cli {

namespace {

[[noreturn]] void config_error(const std::string& message) {
    fail(ErrorKind::configuration, message);
}

std::map<std::string, double> parse_pairs(const std::vector<std::string>& items, const std::string& flag) {
    std::map<std::string, double> out;
    for (const std::string& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            config_error(flag + " expects key=value, got '" + item + "'");
        }
        const std::string key = item.substr(0, eq);
        const std::string text = item.substr(eq + 1);
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size()) {
            config_error(flag + " value for '" + key + "' is not a number: '" + text + "'");
        }
        out[key] = value;
    }
    return out;
}

// Output sink: a file, or the command's stdout for "-".
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
            return;
        }
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) {
            fail(ErrorKind::configuration, "cannot open output file '" + path + "'");
        }
        stream_ = file_.get();
    }
    std::ostream& operator*() { return *stream_; }
    void finish() {
        stream_->flush();
        if (!*stream_) {
            fail(ErrorKind::numerical, "failed writing output");
        }
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_{nullptr};
};

struct Overrides {
    std::vector<int> n;
    int replicates{0};
    std::uint64_t seed{0};
    bool seed_set{false};
};

Scenario load_with_overrides(const std::string& path, const Overrides& o) {
    Scenario s = load_scenario(path);
    if (!o.n.empty()) {
        s.n = o.n;
    }
    if (o.replicates > 0) {
        s.replicates = o.replicates;
    }
    if (o.seed_set) {
        s.seed = o.seed;
    }
    s.validate();
    return s;
}

double param(const std::map<std::string, double>& p, const std::string& key) {
    const auto it = p.find(key);
    if (it == p.end()) {
        config_error("missing --param " + key);
    }
    return it->second;
}

void check_keys(const std::map<std::string, double>& p, std::initializer_list<std::string> allowed) {
    const std::set<std::string> ok(allowed);
    for (const auto& [key, value] : p) {
        if (!ok.count(key)) {
            config_error("unknown --param '" + key + "' for this regime");
        }
    }
}

RegimeLimit limit_from_params(Regime regime, const std::map<std::string, double>& p) {
    RegimeLimit limit;
    limit.regime = regime;
    limit.rate_exponent = default_rate_exponent(regime);
    switch (regime) {
    case Regime::regular:
        check_keys(p, {"I"});
        limit.params = RegularLimit{param(p, "I")};
        break;
    case Regime::misspecified: {
        check_keys(p, {"D_sq"});
        MisspecAsymptotics m;
        m.d_big_sq = param(p, "D_sq");
        limit.params = m;
        break;
    }
    case Regime::null_fisher:
        check_keys(p, {"I3"});
        limit.params = NullFisherLimit{param(p, "I3")};
        break;
    case Regime::disc_fisher: {
        check_keys(p, {"I_minus", "I_plus", "rho"});
        DiscFisherLimit d;
        d.info_minus = param(p, "I_minus");
        d.info_plus = param(p, "I_plus");
        d.correlation = param(p, "rho");
        limit.params = d;
        break;
    }
    case Regime::boundary:
        check_keys(p, {"I", "upper"});
        limit.params = BoundaryLimit{param(p, "I"), p.count("upper") && p.at("upper") != 0.0};
        break;
    case Regime::cusp: {
        check_keys(p, {"kappa", "gamma_sq", "a", "lambda0"});
        CuspParams c;
        c.kappa = param(p, "kappa");
        c.hurst = c.kappa + 0.5;
        c.gamma_sq = p.count("gamma_sq") ? p.at("gamma_sq")
                                         : cusp_gamma_sq(p.count("a") ? p.at("a") : 1.0, c.kappa,
                                                         p.count("lambda0") ? p.at("lambda0") : 1.0);
        limit.rate_exponent = 1.0 / (2.0 * c.hurst);
        limit.params = c;
        break;
    }
    case Regime::jump:
        check_keys(p, {"lambda_minus", "lambda_plus"});
        limit.params = JumpLimit{{param(p, "lambda_minus"), param(p, "lambda_plus")}};
        break;
    case Regime::nonidentifiable:
        config_error("the nonidentifiable limit needs --model and --theta0");
    }
    for (const auto& [key, value] : p) {
        if (!std::isfinite(value)) {
            config_error("--param " + key + " must be finite");
        }
    }
    return limit;
}

std::vector<double> parse_grid(const std::string& spec, const std::string& flag) {
    // lo:hi:count
    const auto a = spec.find(':');
    const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) {
        config_error(flag + " expects lo:hi:count, got '" + spec + "'");
    }
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
    try {
        lo = std::stod(spec.substr(0, a));
        hi = std::stod(spec.substr(a + 1, b - a - 1));
        count = std::stoi(spec.substr(b + 1));
    } catch (const std::exception&) {
        config_error(flag + " expects lo:hi:count, got '" + spec + "'");
    }
    if (count < 1 || (count > 1 && !(hi > lo))) {
        config_error(flag + " needs count >= 1 and lo < hi");
    }
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    }
    return out;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Estimation under non-regular Poisson intensity models"};
    app.require_subcommand(1);
    int workers = 1;
    app.add_option("--workers", workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

    Overrides overrides;
    auto add_overrides = [&overrides](CLI::App* sub) {
        sub->add_option("--n", overrides.n, "Override sample size(s)")->delimiter(',');
        sub->add_option("--replicates", overrides.replicates, "Override replicate count");
        sub->add_option("--seed", overrides.seed, "Override seed")->each([&overrides](const std::string&) {
            overrides.seed_set = true;
        });
    };

    std::string scenario_path;
    std::string out_path;

    CLI::App* simulate = app.add_subcommand("simulate", "Write the events of one sample at the first n as CSV");
    simulate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    simulate->add_option("-o,--out", out_path, "Output CSV ('-' for stdout)");
    add_overrides(simulate);

    std::string prefix;
    CLI::App* experiment = app.add_subcommand("experiment", "Run a Monte Carlo scenario");
    experiment->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    experiment->add_option("-o,--out", prefix, "Output prefix (default: the scenario's output key)");
    add_overrides(experiment);

    std::string regime_name;
    std::vector<std::string> limit_params_raw;
    std::string model_name;
    std::vector<std::string> model_params_raw;
    double theta0 = 0.0;
    int samples = 1000;
    std::string which = "mle";
    std::uint64_t limit_seed = 1;
    CLI::App* limits = app.add_subcommand("limits", "Draw from a regime's limit law");
    limits->add_option("--regime", regime_name, "Regime tag")->required();
    limits->add_option("--param", limit_params_raw, "Limit parameter key=value (repeatable)");
    limits->add_option("--model", model_name, "Derive the parameters from a catalog model instead");
    limits->add_option("--model-param", model_params_raw, "Model parameter key=value (repeatable)");
    limits->add_option("--theta0", theta0, "True parameter for --model");
    limits->add_option("--samples", samples, "Number of draws")->check(CLI::PositiveNumber);
    limits->add_option("--which", which, "mle or bayes")->check(CLI::IsMember({"mle", "bayes"}));
    limits->add_option("--seed", limit_seed, "Seed");
    limits->add_option("-o,--out", out_path, "Output CSV ('-' for stdout)");

    double theta = 0.0;
    double mu_star = 0.0;
    CLI::App* windows = app.add_subcommand("windows", "Optimal observation window as JSON");
    windows->add_option("--model", model_name, "Catalog model")->required();
    windows->add_option("--model-param", model_params_raw, "Model parameter key=value (repeatable)");
    windows->add_option("--theta", theta, "Parameter value")->required();
    windows->add_option("--mu-star", mu_star, "Window measure")->required();
    windows->add_option("-o,--out", out_path, "Output JSON ('-' for stdout)");

    std::vector<double> x_grid{1.5, 2.0, 3.0};
    std::string h1_spec = "-0.95:1.05:21";
    std::string h2_spec = "-0.95:1.05:21";
    double region_theta0 = 0.5;
    CLI::App* region = app.add_subcommand("region-map", "Consistency region scan of the change-point model");
    region->add_option("--x", x_grid, "Ratios g2/g1")->delimiter(',');
    region->add_option("--h1", h1_spec, "h1 grid lo:hi:count");
    region->add_option("--h2", h2_spec, "h2 grid lo:hi:count");
    region->add_option("--theta0", region_theta0, "True change point");
    region->add_option("-o,--out", out_path, "Output CSV ('-' for stdout)");

    int curve_grid = 0;
    CLI::App* curve = app.add_subcommand("curve", "Log-likelihood curve of one simulated sample");
    curve->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    curve->add_option("--grid", curve_grid, "Grid size (default: the estimator grid)");
    curve->add_option("-o,--out", out_path, "Output CSV ('-' for stdout)");
    add_overrides(curve);

    std::vector<const char*> argv;
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*simulate) {
            const Scenario s = load_with_overrides(scenario_path, overrides);
            const ModelPtr model = s.build_model();
            const TrueIntensity truth = s.build_truth(model);
            const Sample sample =
                simulate_sample(truth, s.n.front(), RngStream{s.seed, streams::replicate_base(0, 0)}, workers);
            Sink sink(out_path, out);
            write_events_csv(*sink, sample);
            sink.finish();
        } else if (*experiment) {
            const Scenario s = load_with_overrides(scenario_path, overrides);
            const std::string base = prefix.empty() ? s.output : prefix;
            if (base.empty()) {
                config_error("no output prefix: pass --out or set the scenario's output key");
            }
            const ExperimentReport report = run_scenario(s, workers);
            Sink table(base + ".table.csv", out);
            write_table_csv(*table, report);
            table.finish();
            Sink summary(base + ".summary.json", out);
            *summary << summary_json(report);
            summary.finish();
        } else if (*limits) {
            const auto regime = parse_regime(regime_name);
            if (!regime) {
                config_error("unknown regime '" + regime_name + "'");
            }
            RegimeLimit limit;
            if (!model_name.empty()) {
                const auto id = parse_model_id(model_name);
                if (!id) {
                    config_error("unknown model '" + model_name + "'");
                }
                const ModelPtr model = make_model(*id, parse_pairs(model_params_raw, "--model-param"));
                limit = limit_params(*regime, *model, theta0);
            } else {
                limit = limit_from_params(*regime, parse_pairs(limit_params_raw, "--param"));
            }
            const auto draws = sample_limits(limit, which == "mle" ? LimitKind::mle : LimitKind::bayes,
                                             static_cast<std::size_t>(samples), limit_seed, workers);
            Sink sink(out_path, out);
            *sink << "value\n";
            for (double v : draws) {
                *sink << format_number(v) << '\n';
            }
            sink.finish();
        } else if (*windows) {
            const auto id = parse_model_id(model_name);
            if (!id) {
                config_error("unknown model '" + model_name + "'");
            }
            const ModelPtr model = make_model(*id, parse_pairs(model_params_raw, "--model-param"));
            const Window window = optimal_window(*model, theta, mu_star);
            Sink sink(out_path, out);
            *sink << window.to_json() << '\n';
            sink.finish();
        } else if (*region) {
            const RegionScan scan =
                region_scan(x_grid, parse_grid(h1_spec, "--h1"), parse_grid(h2_spec, "--h2"), region_theta0, workers);
            Sink sink(out_path, out);
            write_region_csv(*sink, scan);
            sink.finish();
        } else if (*curve) {
            const Scenario s = load_with_overrides(scenario_path, overrides);
            const ModelPtr model = s.build_model();
            const TrueIntensity truth = s.build_truth(model);
            const Sample sample =
                simulate_sample(truth, s.n.front(), RngStream{s.seed, streams::replicate_base(0, 0)}, workers);
            const LogLikelihoodCurve c =
                likelihood_curve(*model, sample, curve_grid > 0 ? curve_grid : s.estimator.grid_size);
            Sink sink(out_path, out);
            *sink << "theta,loglik,left,right\n";
            for (std::size_t i = 0; i < c.thetas.size(); ++i) {
                *sink << format_number(c.thetas[i]) << ',' << format_number(c.values[i]) << ','
                      << format_number(c.left[i]) << ',' << format_number(c.right[i]) << '\n';
            }
            sink.finish();
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::configuration ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace nrpp::cli
