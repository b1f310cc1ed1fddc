#include "nrpp/catalog.hpp"
#include "nrpp/errors.hpp"
#include "nrpp/intensity.hpp"
#include "nrpp/rng.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

using namespace nrpp;

namespace {

struct Entry {
    ModelId id;
    ModelParams params;
};

std::vector<Entry> constructible_models() {
    return {
        {ModelId::regular_exp, {}},
        {ModelId::nonident_fixed, {}},
        {ModelId::nullfi_sine, {}},
        {ModelId::discfi_kink, {}},
        {ModelId::cusp, {}},
        {ModelId::jump_shift, {}},
        {ModelId::jump_shift, {{"amp", 0.5}}},
        {ModelId::changepoint, {{"g1_slope", 0.5}, {"g2_slope", 1.0}}},
        {ModelId::window_sine, {}},
        {ModelId::suffwin_linear, {}},
        {ModelId::phase_mod, {}},
        {ModelId::phase_mod, {{"discontinuous", 1.0}}},
        {ModelId::freq_mod, {}},
        {ModelId::constant, {}},
        {ModelId::flat, {}},
    };
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an nrpp::Error");
    return ErrorKind::domain;
}

} // namespace

TEST_SUITE("intensity") {

TEST_CASE("model names round-trip") {
    for (const auto& entry : constructible_models()) {
        CHECK(parse_model_id(to_string(entry.id)) == entry.id);
    }
    CHECK_FALSE(parse_model_id("NOT_A_MODEL").has_value());
}

TEST_CASE("point values") {
    CHECK(make_model(ModelId::nullfi_sine)->evaluate(0.0, 0.37) == 2.0);
    CHECK(make_model(ModelId::discfi_kink)->evaluate(1.0, 0.8) == doctest::Approx(15.0));
    CHECK(make_model(ModelId::regular_exp)->evaluate(0.5, 1.0) == doctest::Approx(std::exp(0.5)).epsilon(1e-15));
    const auto cusp = make_model(ModelId::cusp);
    CHECK(cusp->evaluate(0.5, 0.5) == doctest::Approx(1.0));
    CHECK(cusp->evaluate(0.5, 0.75) == doctest::Approx(1.0 + std::pow(0.25, 0.25)));
    const auto cp = make_model(ModelId::changepoint);
    CHECK(cp->evaluate(0.5, 0.49) == 1.0);
    CHECK(cp->evaluate(0.5, 0.5) == 2.0);
    const auto sw = make_model(ModelId::suffwin_linear);
    CHECK(sw->evaluate(0.5, 0.25) == doctest::Approx(0.5));
    CHECK(sw->evaluate(0.5, 0.75) == doctest::Approx(3.5));
}

TEST_CASE("cumulative intensity") {
    for (const auto& entry : constructible_models()) {
        const auto m = make_model(entry.id, entry.params);
        CHECK(m->cumulative(m->theta_interval().midpoint(), 0.0) == 0.0);
    }
    CHECK(make_model(ModelId::regular_exp)->cumulative(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto sw = make_model(ModelId::suffwin_linear, {{"a", 1.0}, {"b", 2.0}});
    CHECK(sw->cumulative(0.3, 1.0) == doctest::Approx(1.0 + 2.0 * 0.7).epsilon(1e-12));
}

TEST_CASE("cumulative intensity is nondecreasing") {
    CounterEngine engine(RngStream{11, 0});
    for (const auto& entry : constructible_models()) {
        const auto m = make_model(entry.id, entry.params);
        const auto& th = m->theta_interval();
        for (int k = 0; k < 20; ++k) {
            const double theta = th.alpha + th.width() * engine.uniform();
            double a = m->horizon() * engine.uniform();
            double b = m->horizon() * engine.uniform();
            if (a > b) {
                std::swap(a, b);
            }
            CHECK(m->cumulative(theta, b) - m->cumulative(theta, a) >= -1e-12);
        }
    }
}

TEST_CASE("closed-form integrals agree with quadrature") {
    for (const auto& entry : constructible_models()) {
        const auto m = make_model(entry.id, entry.params);
        const auto& th = m->theta_interval();
        for (double w : {0.13, 0.5, 0.91}) {
            const double theta = th.alpha + w * th.width();
            const double lo = 0.1 * m->horizon();
            const double hi = 0.85 * m->horizon();
            std::vector<double> edges{lo};
            for (double b : m->t_breakpoints(theta)) {
                if (b > lo && b < hi) {
                    edges.push_back(b);
                }
            }
            edges.push_back(hi);
            double oracle = 0.0;
            for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
                oracle += test::riemann([&](double t) { return m->value(theta, t); }, edges[k], edges[k + 1], 200000);
            }
            CHECK(m->integral(theta, lo, hi) == doctest::Approx(oracle).epsilon(1e-7));
        }
    }
}

TEST_CASE("intensity stays within the certified bound") {
    for (const auto& entry : constructible_models()) {
        const auto m = make_model(entry.id, entry.params);
        const auto& th = m->theta_interval();
        for (int i = 0; i < 100; ++i) {
            const double theta = th.alpha + th.width() * i / 99.0;
            for (int j = 0; j < 100; ++j) {
                const double t = m->horizon() * j / 99.0;
                const double v = m->value(theta, t);
                REQUIRE(v >= 0.0);
                REQUIRE(v <= m->lambda_max() * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("analytic derivatives match central differences") {
    const double h = 1e-5;
    for (const auto& entry : constructible_models()) {
        const auto m = make_model(entry.id, entry.params);
        if (m->smoothness_order() < 1 || m->theta_regularity() == ThetaRegularity::rough) {
            continue;
        }
        CAPTURE(to_string(entry.id));
        const auto& th = m->theta_interval();
        for (int i = 0; i < 50; ++i) {
            const double theta = th.alpha + th.width() * (i + 0.5) / 50.0;
            for (int j = 0; j < 50; ++j) {
                const double t = m->horizon() * (j + 0.5) / 50.0;
                for (int order = 1; order <= m->smoothness_order(); ++order) {
                    const auto lower = [&](double x) {
                        return order == 1 ? m->value(x, t) : m->derivative(x, t, order - 1, Side::none);
                    };
                    const double fd = (lower(theta + h) - lower(theta - h)) / (2.0 * h);
                    const double d = m->derivative(theta, t, order, Side::none);
                    const double tolerance = (order == 1 ? 1e-6 : 1e-5) * (1.0 + std::abs(d));
                    REQUIRE(std::abs(d - fd) <= tolerance);
                }
            }
        }
    }
}

TEST_CASE("derivatives at the null-information point") {
    const auto m = make_model(ModelId::nullfi_sine);
    for (double t : {0.0, 0.3, 1.0}) {
        CHECK(m->theta_derivative(0.0, t, 1) == doctest::Approx(0.0));
        CHECK(m->theta_derivative(0.0, t, 2) == doctest::Approx(0.0));
        CHECK(m->theta_derivative(0.0, t, 3) == doctest::Approx(6.0 * t * t));
    }
}

TEST_CASE("one-sided derivatives at the kink") {
    const auto m = make_model(ModelId::discfi_kink);
    CHECK(m->theta_derivative(1.0, 0.4, 1, Side::left) == doctest::Approx(1.2));
    CHECK(m->theta_derivative(1.0, 0.4, 1, Side::right) == doctest::Approx(0.8));
    CHECK(kind_of([&] { (void)m->theta_derivative(1.0, 0.6, 1); }) == ErrorKind::domain);
    CHECK(m->theta_breakpoints() == std::vector<double>{1.0});
}

TEST_CASE("argument and capability errors") {
    const auto m = make_model(ModelId::regular_exp);
    CHECK(kind_of([&] { (void)m->evaluate(1.5, 0.5); }) == ErrorKind::domain);
    CHECK(kind_of([&] { (void)m->evaluate(0.5, -0.1); }) == ErrorKind::domain);
    CHECK(kind_of([&] { (void)m->evaluate(0.5, 1.1); }) == ErrorKind::domain);
    const auto sw = make_model(ModelId::suffwin_linear);
    CHECK(kind_of([&] { (void)sw->theta_derivative(0.5, 0.2, 1); }) == ErrorKind::capability);
    CHECK(kind_of([&] { (void)make_model(ModelId::regular_exp, {{"typo", 1.0}}); }) == ErrorKind::configuration);
    CHECK(kind_of([&] { (void)make_model(ModelId::changepoint, {{"g1_const", 3.0}}); }) ==
          ErrorKind::configuration);
}

TEST_CASE("printed non-identifiable cubic") {
    CHECK(kind_of([] { (void)make_model(ModelId::nonident_cubic); }) == ErrorKind::configuration);
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
        CHECK(catalog::NonidentCubic::formula(1.0, t) == doctest::Approx(1.0 - t * t));
        CHECK(catalog::NonidentCubic::formula(2.0, t) == doctest::Approx(1.0 + t * t));
    }
    // A sub-interval where the formula stays nonnegative is accepted.
    CHECK_NOTHROW((void)make_model(ModelId::nonident_cubic, {}, ParameterInterval(1.4, 1.6)));
}

TEST_CASE("corrected non-identifiable family") {
    const auto m = make_model(ModelId::nonident_fixed);
    for (double t : {0.0, 0.3, 0.7, 1.0}) {
        CHECK(m->evaluate(1.0, t) == doctest::Approx(1.0 + t * t));
        CHECK(m->evaluate(2.0, t) == doctest::Approx(1.0 + t * t));
    }
    CHECK(m->aliases(1.0) == std::vector<double>{1.0, 2.0});
    CHECK(m->aliases(2.0) == std::vector<double>{1.0, 2.0});
    CHECK(m->aliases(0.5) == std::vector<double>{0.5});
    // No other pair on a grid coincides.
    for (int i = 1; i < 30; ++i) {
        for (int j = i + 1; j < 30; ++j) {
            const double a = 3.0 * i / 30.0;
            const double b = 3.0 * j / 30.0;
            if (std::abs(a - 1.0) < 1e-12 && std::abs(b - 2.0) < 1e-12) {
                continue;
            }
            double gap = 0.0;
            for (double t : {0.25, 0.5, 0.75, 1.0}) {
                gap = std::max(gap, std::abs(m->value(a, t) - m->value(b, t)));
            }
            REQUIRE(gap > 1e-6);
        }
    }
}

TEST_CASE("jump descriptions") {
    const auto js = make_model(ModelId::jump_shift);
    const auto sizes = js->jump_at(0.0);
    REQUIRE(sizes);
    CHECK(sizes->lambda_minus == 1.0);
    CHECK(sizes->lambda_plus == 3.0);
    CHECK(js->evaluate(0.1, 0.39) == 1.0);
    CHECK(js->evaluate(0.1, 0.41) == 3.0);
    const auto cp = make_model(ModelId::changepoint, {{"g1_const", 1.0}, {"g2_const", 4.0}});
    const auto cps = cp->jump_at(0.5);
    REQUIRE(cps);
    CHECK(cps->lambda_minus == 4.0);
    CHECK(cps->lambda_plus == 1.0);
    CHECK_FALSE(make_model(ModelId::regular_exp)->jump_at(0.5).has_value());
}

TEST_CASE("periodic families extend their horizon") {
    const auto pm = make_model(ModelId::phase_mod);
    const auto longer = pm->with_horizon(5.0);
    CHECK(longer->horizon() == 5.0);
    CHECK(longer->value(0.2, 3.3) == doctest::Approx(pm->value(0.2, 0.3)));
    CHECK(kind_of([] { (void)make_model(ModelId::regular_exp)->with_horizon(2.0); }) == ErrorKind::capability);
}

TEST_CASE("contaminated true intensity") {
    const auto m = make_model(ModelId::regular_exp);
    const TrueIntensity truth(m, 0.5, {ContaminationPiece{0.0, 1.0, {0.1}}});
    CHECK(truth.value(0.3) == doctest::Approx(std::exp(0.15) + 0.1));
    CHECK(truth.integral(0.0, 1.0) == doctest::Approx(2.0 * (std::exp(0.5) - 1.0) + 0.1).epsilon(1e-12));
    CHECK(truth.lambda_max() >= std::exp(0.5) + 0.1);
    CHECK(kind_of([&] {
              (void)TrueIntensity(m, 0.5, {ContaminationPiece{0.0, 0.6, {0.1}}, ContaminationPiece{0.5, 1.0, {0.1}}});
          }) == ErrorKind::configuration);
    CHECK(kind_of([&] { (void)TrueIntensity(m, 2.0); }) == ErrorKind::domain);
}

}
