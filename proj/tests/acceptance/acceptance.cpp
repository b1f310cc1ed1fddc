// Acceptance gate: one numbered check per line, PASS or FAIL.

#include "nrpp/analysis.hpp"
#include "nrpp/errors.hpp"
#include "nrpp/estimators.hpp"
#include "nrpp/experiments.hpp"
#include "nrpp/likelihood.hpp"
#include "nrpp/limits.hpp"
#include "nrpp/simulate.hpp"
#include "nrpp/windows.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace nrpp;

namespace {

int g_workers = 1;

struct Verdict {
    bool pass{false};
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

double var_of(const std::vector<double>& x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(x.size() - 1);
}

ExperimentReport run(const std::string& json) {
    return run_scenario(parse_scenario(json), g_workers);
}

// Normalized errors of successful replicates at one sample size.
std::vector<double> normalized(const ExperimentReport& report, std::size_t n_index, std::size_t method) {
    std::vector<double> out;
    for (const auto& row : report.rows) {
        if (row.n_index == n_index && row.outcomes[method].ok) {
            out.push_back(row.outcomes[method].normalized);
        }
    }
    return out;
}

std::vector<double> estimates(const ExperimentReport& report, std::size_t n_index, std::size_t method) {
    std::vector<double> out;
    for (const auto& row : report.rows) {
        if (row.n_index == n_index && row.outcomes[method].ok) {
            out.push_back(row.outcomes[method].estimate);
        }
    }
    return out;
}

std::size_t failures(const ExperimentReport& report) {
    std::size_t bad = 0;
    for (const auto& size : report.sizes) {
        for (const auto& m : size.methods) {
            bad += m.failed;
        }
    }
    return bad;
}

std::vector<double> mses(const ExperimentReport& report, std::size_t method) {
    std::vector<double> out;
    for (const auto& size : report.sizes) {
        out.push_back(size.methods[method].mse);
    }
    return out;
}

std::vector<double> standard_normals(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    std::vector<double> out(count);
    for (double& v : out) {
        v = z(gen);
    }
    return out;
}

std::string table_of(const ExperimentReport& report) {
    std::ostringstream out;
    write_table_csv(out, report);
    return out.str();
}

// ---------------------------------------------------------------------------

Verdict catalog_constants() {
    const auto discfi = make_model(ModelId::discfi_kink);
    const auto nullfi = make_model(ModelId::nullfi_sine);
    const double left = fisher_information(*discfi, 1.0, std::nullopt, Side::left);
    const double right = fisher_information(*discfi, 1.0, std::nullopt, Side::right);
    const double i3 = higher_order_information(*nullfi, 0.0);
    const bool ok = std::abs(left - 0.2) < 1e-8 && std::abs(right - 1.0 / 3.0) < 1e-8 && std::abs(i3 - 0.1) < 1e-8;
    return {ok, "I(1-)=" + fmt(left, 12) + " I(1+)=" + fmt(right, 12) + " I3(0)=" + fmt(i3, 12)};
}

Verdict constant_mle_oracle() {
    std::mt19937_64 gen(20240601);
    std::uniform_real_distribution<double> level(0.2, 9.0);
    std::uniform_int_distribution<int> size(1, 60);
    const auto model = make_model(ModelId::constant);
    int interior = 0;
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const TrueIntensity truth(model, level(gen));
        const int n = size(gen);
        const Sample sample = simulate_sample(truth, n, RngStream{77, streams::replicate_base(0, k)});
        const double closed = static_cast<double>(sample.total_events()) / n;
        if (!model->theta_interval().contains_open(closed)) {
            continue;
        }
        ++interior;
        worst = std::max(worst, std::abs(mle(*model, sample).value - closed));
    }
    return {worst <= 1e-9 && interior > 150,
            std::to_string(interior) + " interior samples, max |mle - N/n| = " + fmt(worst)};
}

Verdict likelihood_ratio_oracles() {
    constexpr int kReplicates = 10000;
    constexpr int kN = 50;
    constexpr double kTheta0 = 0.5;
    const auto model = make_model(ModelId::regular_exp);
    const TrueIntensity truth(model, kTheta0);
    std::vector<double> z(kReplicates), root(kReplicates);
    for (int r = 0; r < kReplicates; ++r) {
        const Sample sample = simulate_sample(truth, kN, RngStream{3, streams::replicate_base(0, r)});
        z[r] = normalized_lr(*model, kTheta0, 1.0, 0.5, sample);
        root[r] = std::sqrt(z[r]);
    }
    const double se_z = std::sqrt(var_of(z) / kReplicates);
    const double se_root = std::sqrt(var_of(root) / kReplicates);
    const double predicted = std::exp(-kN * hellinger_sq(*model, kTheta0, kTheta0 + 1.0 / std::sqrt(kN)) / 2.0);
    const double dz = std::abs(mean_of(z) - 1.0);
    const double droot = std::abs(mean_of(root) - predicted);
    return {dz <= 4.0 * se_z && droot <= 4.0 * se_root,
            "|mean Z - 1| = " + fmt(dz) + " (4SE " + fmt(4 * se_z) + "), |mean sqrt Z - " + fmt(predicted, 6) +
                "| = " + fmt(droot) + " (4SE " + fmt(4 * se_root) + ")"};
}

Verdict regular_limit() {
    const auto report = run(R"({"model": "REGULAR_EXP", "theta0": 0.5, "regime": "regular", "n": 500,
        "replicates": 2000, "seed": 4, "limit_draws": 1000})");
    const double info = std::get<RegularLimit>(report.limit->params).information;
    const auto reference = standard_normals(100000, 44);
    bool ok = failures(report) == 0;
    std::string detail;
    for (std::size_t m = 0; m < 2; ++m) {
        auto e = normalized(report, 0, m);
        for (double& v : e) {
            v *= std::sqrt(info);
        }
        const double ks = ks_two_sample(e, reference);
        ok = ok && ks < 0.05;
        detail += std::string(m == 0 ? "KS mle=" : " bayes=") + fmt(ks);
    }
    return {ok, detail + " (< 0.05), I=" + fmt(info, 8)};
}

Verdict null_fisher() {
    const auto report = run(R"({"model": "NULLFI_SINE", "theta0": 0, "regime": "null-fisher",
        "n": [500, 2000, 8000], "replicates": 1000, "seed": 5, "limit_draws": 1000,
        "estimator": {"methods": ["mle"], "grid_size": 401, "zoom_levels": 2, "zoom_points": 101}})");
    const auto draws = sample_limits(*report.limit, LimitKind::mle, 100000, 55, g_workers);
    const double ks = ks_two_sample(normalized(report, 2, 0), draws);
    const auto fit = rate_regression(report.scenario.n, mses(report, 0));
    const bool ok = failures(report) == 0 && ks < 0.07 && std::abs(fit.slope + 1.0 / 3.0) <= 0.1;
    return {ok, "KS at n=8000 = " + fmt(ks) + " (< 0.07), slope = " + fmt(fit.slope) + " +/- " + fmt(fit.stderr_) +
                    " (target -1/3 +/- 0.1)"};
}

Verdict boundary() {
    const auto report = run(R"({"model": "REGULAR_EXP", "theta0": 0, "regime": "boundary", "n": 2000,
        "replicates": 2000, "seed": 6, "limit_draws": 1000, "estimator": {"methods": ["mle"]}})");
    const auto e = normalized(report, 0, 0);
    std::vector<double> nonzero;
    for (double v : e) {
        if (std::abs(v) >= 0.05) {
            nonzero.push_back(v);
        }
    }
    const double atom = 1.0 - static_cast<double>(nonzero.size()) / static_cast<double>(e.size());
    std::vector<double> reference;
    for (double v : sample_limits(*report.limit, LimitKind::mle, 100000, 66, g_workers)) {
        if (std::abs(v) >= 0.05) {
            reference.push_back(v);
        }
    }
    const double ks = ks_two_sample(nonzero, reference);
    return {failures(report) == 0 && std::abs(atom - 0.5) <= 0.04 && ks < 0.07,
            "atom frequency = " + fmt(atom) + " (0.5 +/- 0.04), nonzero-part KS = " + fmt(ks) + " (< 0.07)"};
}

Verdict disc_fisher() {
    const auto report = run(R"({"model": "DISCFI_KINK", "theta0": 1, "regime": "disc-fisher", "n": 2000,
        "replicates": 2000, "seed": 7, "limit_draws": 1000,
        "estimator": {"methods": ["mle"], "grid_size": 401, "zoom_levels": 2, "zoom_points": 101}})");
    const double rho = std::sqrt(15.0) / 4.0;
    const double orthant = 0.25 - std::asin(rho) / (2.0 * std::numbers::pi);
    const auto est = estimates(report, 0, 0);
    const double middle =
        static_cast<double>(std::count_if(est.begin(), est.end(), [](double v) { return std::abs(v - 1.0) <= 1e-9; })) /
        static_cast<double>(est.size());
    const auto draws = sample_limits(*report.limit, LimitKind::mle, 100000, 77, g_workers);
    const double ks = ks_two_sample(normalized(report, 0, 0), draws);
    const double lib_rho = std::get<DiscFisherLimit>(report.limit->params).correlation;
    return {failures(report) == 0 && std::abs(middle - orthant) <= 0.04 && ks < 0.07,
            "middle branch = " + fmt(middle) + " vs " + fmt(orthant) + " +/- 0.04 (rho " + fmt(lib_rho, 10) +
                "), KS = " + fmt(ks) + " (< 0.07)"};
}

Verdict jump() {
    const auto report = run(R"({"model": "JUMP_SHIFT", "theta0": 0, "regime": "jump",
        "n": [250, 500, 1000, 2000], "replicates": 1000, "seed": 8, "limit_draws": 1000,
        "estimator": {"methods": ["mle"]}})");
    const auto fit = rate_regression(report.scenario.n, mses(report, 0));
    const auto draws = sample_limits(*report.limit, LimitKind::mle, 100000, 88, g_workers);
    const double ks = ks_two_sample(normalized(report, 3, 0), draws);
    return {failures(report) == 0 && std::abs(fit.slope + 2.0) <= 0.15 && ks < 0.08,
            "slope = " + fmt(fit.slope) + " +/- " + fmt(fit.stderr_) + " (target -2 +/- 0.15), KS at n=2000 = " +
                fmt(ks) + " (< 0.08)"};
}

Verdict misspecification() {
    constexpr int kN = 2000;
    constexpr int kReplicates = 1000;
    const auto report = run(R"({"model": "REGULAR_EXP", "theta0": 0.5, "regime": "misspecified", "n": 2000,
        "replicates": 1000, "seed": 9, "limit_draws": 1000, "estimator": {"methods": ["mle"]},
        "true_intensity": {"contamination": [{"lo": 0, "hi": 1, "coefficients": [0.1]}]}})");
    const auto& ms = std::get<MisspecAsymptotics>(report.limit->params);

    // K(theta) = int exp(theta t) - (exp(t/2) + 0.1) theta t dt, both terms in closed form.
    const double c = 4.0 - 2.0 * std::exp(0.5) + 0.05;
    double brute = 0.0;
    double best = std::numeric_limits<double>::infinity();
    constexpr int kGrid = 1000000;
    for (int i = 1; i <= kGrid; ++i) {
        const double th = static_cast<double>(i) / kGrid;
        const double k = std::expm1(th) / th - th * c;
        if (k < best) {
            best = k;
            brute = th;
        }
    }
    const double grid_step = 1.0 / (report.scenario.estimator.grid_size - 1);
    const double gap = std::abs(mean_of(estimates(report, 0, 0)) - ms.theta_star);
    const double bound = 2.0 * std::sqrt(ms.d_big_sq / (static_cast<double>(kN) * kReplicates)) + grid_step;
    const bool ok = failures(report) == 0 && gap < bound && std::abs(brute - ms.theta_star) <= 1e-4;
    return {ok, "theta* = " + fmt(ms.theta_star, 8) + " (brute force " + fmt(brute, 8) + "), |mean - theta*| = " +
                    fmt(gap) + " (< " + fmt(bound) + ")"};
}

Verdict consistency_region_check() {
    std::vector<double> h;
    for (int k = 0; k <= 20; ++k) {
        h.push_back(-0.95 + 0.1 * k);
    }
    const auto scan = region_scan({1.5, 2.0, 3.0}, h, h, 0.5, g_workers);
    int agree = 0;
    int total = 0;
    int consistent = 0;
    for (std::size_t i = 0; i < scan.x.size(); ++i) {
        for (std::size_t j = 0; j < h.size(); ++j) {
            for (std::size_t k = 0; k < h.size(); ++k) {
                ++total;
                agree += scan.kl_consistent[i][j][k] == scan.predicate[i][j][k];
                consistent += scan.predicate[i][j][k];
            }
        }
    }
    return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " cells agree (" +
                                std::to_string(consistent) + " consistent)"};
}

Verdict optimal_window_check() {
    const auto model = make_model(ModelId::window_sine);
    const double tau = model->horizon();
    const Window best = optimal_window(*model, 0.5, tau / 2.0);
    // Integrand 4 sin^2(omega t): the level set sin^2 >= 1/2 is [tau/8, 3tau/8] and [5tau/8, 7tau/8].
    const std::vector<double> closed{tau / 8, 3 * tau / 8, 5 * tau / 8, 7 * tau / 8};
    double endpoint_error = best.intervals().size() == 2 ? 0.0 : 1.0;
    for (std::size_t i = 0; i < best.intervals().size() && i < 2; ++i) {
        endpoint_error = std::max({endpoint_error, std::abs(best.intervals()[i].lo - closed[2 * i]),
                                   std::abs(best.intervals()[i].hi - closed[2 * i + 1])});
    }

    const double info_best = fisher_information(*model, 0.5, best);
    std::mt19937_64 gen(1111);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double best_random = 0.0;
    for (int w = 0; w < 100; ++w) {
        const int pieces = 1 + w % 3;
        std::vector<double> gaps(pieces + 1), lengths(pieces);
        double gsum = 0.0, lsum = 0.0;
        for (double& g : gaps) {
            g = u(gen) + 1e-3;
            gsum += g;
        }
        for (double& l : lengths) {
            l = u(gen) + 1e-3;
            lsum += l;
        }
        std::vector<Interval> parts;
        double t = 0.0;
        for (int p = 0; p < pieces; ++p) {
            t += gaps[p] / gsum * tau / 2.0;
            const double len = lengths[p] / lsum * tau / 2.0;
            parts.push_back({t, std::min(t + len, tau)});
            t += len;
        }
        best_random = std::max(best_random, fisher_information(*model, 0.5, Window(parts)));
    }

    const std::string common = R"({"model": "WINDOW_SINE", "theta0": 0.5, "n": 2000, "replicates": 1000, "seed": 11,
        "estimator": {"methods": ["mle"]}, "window": {"mu_star": 0.5, "mode": )";
    const auto two_stage = run(common + R"("optimal"}})");
    const auto oracle = run(common + R"("oracle"}})");
    const double ratio = two_stage.sizes[0].methods[0].var_estimate / oracle.sizes[0].methods[0].var_estimate;
    const bool ok = endpoint_error <= 1e-6 && info_best > best_random && ratio <= 1.15 &&
                    failures(two_stage) == 0 && failures(oracle) == 0;
    return {ok, "endpoint error = " + fmt(endpoint_error) + " (<= 1e-6), I_B* = " + fmt(info_best, 8) +
                    " vs best random " + fmt(best_random, 8) + ", variance ratio = " + fmt(ratio) + " (<= 1.15)"};
}

Verdict cusp() {
    const auto report = run(R"({"model": "CUSP", "theta0": 0.5, "regime": "cusp", "n": [500, 2000, 8000],
        "replicates": 500, "seed": 12, "limit_draws": 100,
        "estimator": {"methods": ["mle"], "grid_size": 401, "zoom_levels": 2, "zoom_points": 201}})");
    const auto fit = rate_regression(report.scenario.n, mses(report, 0));
    constexpr double kHurst = 0.75;
    constexpr int kDraws = 40000;
    const std::vector<double> grid{1.0, 2.0};
    std::vector<double> w2(kDraws);
    for (int d = 0; d < kDraws; ++d) {
        CounterEngine engine(RngStream{1212, streams::limit_draw(d)});
        w2[d] = simulate_fbm(kHurst, grid, engine)[1];
    }
    double second = 0.0;
    for (double v : w2) {
        second += v * v;
    }
    second /= kDraws;
    const double ratio = second / std::pow(2.0, 2.0 * kHurst);
    const bool ok = failures(report) == 0 && std::abs(fit.slope + 4.0 / 3.0) <= 0.2 && std::abs(ratio - 1.0) <= 0.03;
    return {ok, "slope = " + fmt(fit.slope) + " +/- " + fmt(fit.stderr_) +
                    " (target -4/3 +/- 0.2), Var W(2) / 2^{2H} = " + fmt(ratio) + " (1 +/- 0.03)"};
}

Verdict determinism() {
    const std::vector<std::string> scenarios{
        R"({"model": "REGULAR_EXP", "theta0": 0.5, "regime": "regular", "n": [100, 200], "replicates": 40,
            "seed": 13, "limit_draws": 500})",
        R"({"model": "JUMP_SHIFT", "theta0": 0, "regime": "jump", "n": [100, 300], "replicates": 30, "seed": 14,
            "limit_draws": 500})",
        R"({"model": "SUFFWIN_LINEAR", "theta0": 0.4, "n": 400, "replicates": 30, "seed": 15,
            "window": {"mode": "sufficient"}})"};
    int identical = 0;
    for (const auto& text : scenarios) {
        const Scenario s = parse_scenario(text);
        const std::string reference = table_of(run_scenario(s, 1));
        bool same = true;
        for (int workers : {2, 3, 8}) {
            same = same && table_of(run_scenario(s, workers)) == reference;
        }
        identical += same;
    }
    return {identical == static_cast<int>(scenarios.size()),
            std::to_string(identical) + "/" + std::to_string(scenarios.size()) +
                " scenarios byte-identical for 1, 2, 3 and 8 workers"};
}

struct Criterion {
    int number;
    const char* name;
    double budget_seconds; // 0: no runtime bound
    std::function<Verdict()> check;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 13));
    app.add_option("--workers", g_workers, "Worker threads")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "catalog constants", 1.0, catalog_constants},
        {2, "constant-intensity MLE oracle", 5.0, constant_mle_oracle},
        {3, "likelihood-ratio oracles", 120.0, likelihood_ratio_oracles},
        {4, "regular limit law", 600.0, regular_limit},
        {5, "null-Fisher regime", 1200.0, null_fisher},
        {6, "boundary regime", 0.0, boundary},
        {7, "discontinuous-Fisher regime", 0.0, disc_fisher},
        {8, "jump regime rate", 0.0, jump},
        {9, "misspecification", 0.0, misspecification},
        {10, "consistency region", 0.0, consistency_region_check},
        {11, "optimal window", 0.0, optimal_window_check},
        {12, "cusp regime", 3600.0, cusp},
        {13, "determinism", 0.0, determinism},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0.0 && seconds >= c.budget_seconds) {
            v.pass = false;
            v.detail += ", over the " + fmt(c.budget_seconds) + " s budget";
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  C" << c.number << " " << c.name << ": " << v.detail << " ["
                  << fmt(seconds, 3) << " s]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
