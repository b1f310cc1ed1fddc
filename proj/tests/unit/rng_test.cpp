#include "nrpp/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace nrpp;

TEST_SUITE("rng") {

TEST_CASE("philox known-answer vectors") {
    using Block = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same stream replays identically") {
    CounterEngine a(RngStream{42, 7});
    CounterEngine b(RngStream{42, 7});
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(a.uniform() == b.uniform());
    }
    CHECK(a.normal() == b.normal());
}

TEST_CASE("distinct streams and seeds differ") {
    CounterEngine a(RngStream{42, 7});
    CounterEngine b(RngStream{42, 8});
    CounterEngine c(RngStream{43, 7});
    int same_ab = 0;
    int same_ac = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        same_ab += x == b() ? 1 : 0;
        same_ac += x == c() ? 1 : 0;
    }
    CHECK(same_ab < 3);
    CHECK(same_ac < 3);
}

TEST_CASE("uniforms lie in range with the right moments") {
    CounterEngine e(RngStream{1, 0});
    double sum = 0.0;
    double sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = e.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = e.uniform_open();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
        sum += u;
        sq += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("exponential and normal variates have the right moments") {
    CounterEngine e(RngStream{3, 1});
    const int n = 200000;
    double es = 0.0;
    double ns = 0.0;
    double nsq = 0.0;
    for (int i = 0; i < n; ++i) {
        es += e.exponential(2.0);
        const double z = e.normal();
        ns += z;
        nsq += z * z;
    }
    CHECK(es / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(ns / n) < 0.01);
    CHECK(nsq / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("stream layout keeps domains apart") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 4; ++k) {
        for (std::uint64_t r = 0; r < 4; ++r) {
            for (std::uint64_t j = 0; j < 4; ++j) {
                CHECK(seen.insert(streams::replicate_base(k, r) + j).second);
            }
        }
    }
    CHECK(streams::limit_draw(5) != 5);
    CHECK((streams::limit_draw(5) >> 63) == 1);
    CHECK(RngStream{1, 10}.offset(5).stream_index == 15);
}

}
