#include "nrpp/analysis.hpp"
#include "nrpp/errors.hpp"
#include "nrpp/likelihood.hpp"
#include "nrpp/simulate.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace nrpp;

namespace {

// Per-event reference: explicit loops and an independently integrated compensator.
double naive_log_likelihood(const IntensityModel& m, double theta, const Sample& sample) {
    double events = 0.0;
    for (const auto& tr : sample.trajectories) {
        for (double t : tr.events) {
            events += std::log(m.value(theta, t));
        }
    }
    std::vector<double> edges{0.0};
    for (double b : m.t_breakpoints(theta)) {
        edges.push_back(b);
    }
    edges.push_back(m.horizon());
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        integral += test::riemann([&](double t) { return m.value(theta, t) - 1.0; }, edges[k], edges[k + 1], 400000);
    }
    return events - static_cast<double>(sample.size()) * integral;
}

struct MonteCarlo {
    double mean;
    double se;
};

MonteCarlo summarize(const std::vector<double>& x) {
    return {test::mean(x), std::sqrt(test::variance(x) / static_cast<double>(x.size()))};
}

} // namespace

TEST_SUITE("likelihood") {

TEST_CASE("unit intensity has zero log-likelihood") {
    const auto flat = make_model(ModelId::flat, {{"level", 1.0}});
    const Sample s = test::sample_of({{0.1, 0.4}, {}, {0.9}});
    CHECK(log_likelihood(*flat, 0.3, s) == 0.0);
}

TEST_CASE("constant model with one event") {
    const auto c = make_model(ModelId::constant);
    const Sample s = test::sample_of({{0.5}});
    for (double theta : {0.5, 1.0, 2.0, 7.5}) {
        CHECK(log_likelihood(*c, theta, s) == doctest::Approx(std::log(theta) - (theta - 1.0)).epsilon(1e-14));
    }
}

TEST_CASE("zero intensity at an event gives minus infinity") {
    const auto empty = make_model(ModelId::flat, {{"level", 0.0}});
    CHECK(log_likelihood(*empty, 0.5, test::sample_of({{0.5}})) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("agrees with a per-event reference") {
    const ModelId ids[] = {ModelId::regular_exp, ModelId::nullfi_sine, ModelId::window_sine, ModelId::changepoint,
                           ModelId::suffwin_linear, ModelId::jump_shift, ModelId::phase_mod, ModelId::nonident_fixed,
                           ModelId::discfi_kink, ModelId::constant};
    CounterEngine engine(RngStream{101, 0});
    for (int k = 0; k < 20; ++k) {
        const auto m = make_model(ids[k % 10]);
        const auto& th = m->theta_interval();
        const double theta0 = th.alpha + th.width() * (0.1 + 0.8 * engine.uniform());
        const Sample s = simulate_sample(TrueIntensity(m, theta0), 5, RngStream{102, 100ULL * k});
        const double theta = th.alpha + th.width() * (0.05 + 0.9 * engine.uniform());
        const double expected = naive_log_likelihood(*m, theta, s);
        CAPTURE(to_string(m->id()));
        CHECK(std::abs(log_likelihood(*m, theta, s) - expected) <= 1e-10 * (1.0 + std::abs(expected)));
    }
}

TEST_CASE("cusp log-likelihood with a closed-form compensator") {
    const auto m = make_model(ModelId::cusp);
    const Sample s = simulate_sample(TrueIntensity(m, 0.5), 4, RngStream{103, 0});
    for (double theta : {0.35, 0.5, 0.61}) {
        double events = 0.0;
        for (const auto& tr : s.trajectories) {
            for (double t : tr.events) {
                events += std::log(std::pow(std::abs(t - theta), 0.25) + 1.0);
            }
        }
        const double integral = (std::pow(theta, 1.25) + std::pow(1.0 - theta, 1.25)) / 1.25;
        const double expected = events - 4.0 * integral;
        CHECK(std::abs(log_likelihood(*m, theta, s) - expected) <= 1e-10 * (1.0 + std::abs(expected)));
    }
}

TEST_CASE("additivity over complementary windows") {
    CounterEngine engine(RngStream{104, 0});
    for (ModelId id : {ModelId::regular_exp, ModelId::window_sine, ModelId::changepoint, ModelId::suffwin_linear}) {
        const auto m = make_model(id);
        const double theta = m->theta_interval().midpoint();
        const Sample s = simulate_sample(TrueIntensity(m, theta), 8, RngStream{105, 0});
        for (int k = 0; k < 5; ++k) {
            std::vector<double> cuts(4);
            for (double& c : cuts) {
                c = engine.uniform();
            }
            std::sort(cuts.begin(), cuts.end());
            const Window w({{cuts[0], cuts[1]}, {cuts[2], cuts[3]}});
            const Window rest = w.complement(0.0, 1.0);
            const double whole = log_likelihood(*m, theta + 0.01, s);
            const double split = log_likelihood(*m, theta + 0.01, s, w) + log_likelihood(*m, theta + 0.01, s, rest);
            CHECK(std::abs(whole - split) < 1e-10 * (1.0 + std::abs(whole)));
        }
    }
}

TEST_CASE("score matches a difference quotient") {
    const auto m = make_model(ModelId::window_sine);
    const Sample s = simulate_sample(TrueIntensity(m, 0.4), 10, RngStream{106, 0});
    const LikelihoodEvaluator ev(*m, s);
    const double h = 1e-6;
    for (double theta : {0.2, 0.4, 0.8}) {
        const double fd = (ev.log_likelihood(theta + h) - ev.log_likelihood(theta - h)) / (2.0 * h);
        CHECK(ev.score(theta) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("normalized likelihood ratio basics") {
    const auto m = make_model(ModelId::regular_exp);
    const Sample s = simulate_sample(TrueIntensity(m, 0.5), 50, RngStream{107, 0});
    CHECK(normalized_lr(*m, 0.5, 0.0, 0.5, s) == 1.0);
    CHECK(normalized_lr(*m, 0.5, 0.0, 0.5, s, true) == 0.0);
    const double log_z = normalized_lr(*m, 0.5, 1.0, 0.5, s, true);
    CHECK(log_z == doctest::Approx(log_likelihood(*m, 0.5 + 1.0 / std::sqrt(50.0), s) - log_likelihood(*m, 0.5, s)));
    CHECK(std::exp(log_z) == doctest::Approx(normalized_lr(*m, 0.5, 1.0, 0.5, s)));
    try {
        (void)normalized_lr(*m, 0.5, 10.0, 0.5, s);
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}

TEST_CASE("likelihood-ratio identities under the true parameter") {
    struct Case {
        ModelId id;
        double theta0;
        double rate;
        double u;
    };
    const int n = 100;
    const int replicates = 10000;
    for (const Case& c : {Case{ModelId::regular_exp, 0.5, 0.5, 1.5}, Case{ModelId::nullfi_sine, 0.0, 1.0 / 6.0, 1.2},
                          Case{ModelId::changepoint, 0.5, 1.0, 2.0}}) {
        CAPTURE(to_string(c.id));
        const auto m = make_model(c.id);
        const TrueIntensity truth(m, c.theta0);
        std::vector<double> z(replicates);
        std::vector<double> root(replicates);
        for (int r = 0; r < replicates; ++r) {
            const Sample s = simulate_sample(truth, n, RngStream{108, static_cast<std::uint64_t>(r) * n});
            const double log_z = normalized_lr(*m, c.theta0, c.u, c.rate, s, true);
            z[r] = std::exp(log_z);
            root[r] = std::exp(0.5 * log_z);
        }
        const double theta_u = c.theta0 + std::pow(n, -c.rate) * c.u;
        const auto mz = summarize(z);
        CHECK(std::abs(mz.mean - 1.0) < 4.0 * mz.se);
        const auto mr = summarize(root);
        const double expected = std::exp(-0.5 * n * hellinger_sq(*m, c.theta0, theta_u));
        CHECK(std::abs(mr.mean - expected) < 4.0 * mr.se);
    }
}

TEST_CASE("likelihood curves") {
    SUBCASE("flat family") {
        const auto flat = make_model(ModelId::flat, {{"level", 2.0}});
        const Sample s = simulate_sample(TrueIntensity(flat, 0.5), 5, RngStream{109, 0});
        const auto curve = likelihood_curve(*flat, s, 11);
        for (double v : curve.values) {
            CHECK(v == curve.values.front());
        }
    }
    SUBCASE("constant family peaks at the average count") {
        const auto c = make_model(ModelId::constant);
        const Sample s = simulate_sample(TrueIntensity(c, 3.0), 40, RngStream{110, 0});
        const int grid = 1001;
        const auto curve = likelihood_curve(*c, s, grid);
        std::size_t best = 0;
        for (std::size_t i = 1; i < curve.values.size(); ++i) {
            if (curve.values[i] > curve.values[best]) {
                best = i;
            }
        }
        const double cell = c->theta_interval().width() / (grid - 1);
        CHECK(std::abs(curve.thetas[best] - static_cast<double>(s.total_events()) / 40.0) <= cell);
    }
    SUBCASE("pointwise agreement and breakpoints") {
        const auto cp = make_model(ModelId::changepoint);
        const Sample s = simulate_sample(TrueIntensity(cp, 0.5), 3, RngStream{111, 0});
        const auto curve = likelihood_curve(*cp, s, 21);
        REQUIRE(curve.thetas.size() == curve.values.size());
        CHECK(curve.thetas.size() == 21 + s.total_events());
        CHECK(std::is_sorted(curve.thetas.begin(), curve.thetas.end()));
        bool saw_jump = false;
        for (std::size_t i = 0; i < curve.thetas.size(); ++i) {
            CHECK(curve.values[i] == doctest::Approx(log_likelihood(*cp, curve.thetas[i], s)).epsilon(1e-12));
            if (curve.breakpoint[i]) {
                saw_jump = saw_jump || curve.left[i] != curve.right[i];
                CHECK(curve.best_at(i) >= curve.values[i]);
            }
        }
        CHECK(saw_jump);
    }
    CHECK_THROWS_AS((void)likelihood_curve(*make_model(ModelId::regular_exp), test::sample_of({{}}), 2), Error);
}

}
