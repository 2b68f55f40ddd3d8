#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddirac/potentials.hpp"

using namespace ddirac;

TEST_CASE("classify: example pairs") {
    CHECK(classify({0.38 * kPi, 0.90 * kPi}) == Region::R1);
    CHECK(classify({0.35 * kPi, 0.50 * kPi}) == Region::R2);
    CHECK(classify({0.80 * kPi, 0.45 * kPi}) == Region::S1);
    CHECK(classify({0.80 * kPi, 0.37 * kPi}) == Region::S2);
    CHECK(classify({0.5 * kPi, 0.5 * kPi}) == Region::OutOfScope);
    // a1 < a2 but a1 above 2pi/5: in no defined set
    CHECK(classify({0.45 * kPi, 0.60 * kPi}) == Region::OutOfScope);
}

TEST_CASE("classify: tie on 2a1 + a2/2 = pi goes to R1") {
    double a1 = 0.35 * kPi;
    double a2 = 2.0 * (kPi - 2.0 * a1);  // 2a1 + a2/2 == pi
    CHECK(classify({a1, a2}) == Region::R1);
}

TEST_CASE("delay invariants") {
    CHECK_THROWS_AS(DelayPair(0.2 * kPi, 0.5 * kPi), std::domain_error);
    CHECK_THROWS_AS(DelayPair(0.5 * kPi, kPi), std::domain_error);
}

TEST_CASE("classify: sweep is total and single-valued") {
    // every cell matches exactly one region predicate
    for (int i = 0; i < 200; ++i) {
        for (int k = 0; k < 200; ++k) {
            double a1 = kPi / 3 + (kPi - kPi / 3) * (i + 0.5) / 200.0;
            double a2 = kPi / 3 + (kPi - kPi / 3) * (k + 0.5) / 200.0;
            DelayPair d{a1, a2};
            bool r1 = a1 >= kPi / 3 && a1 < 2 * kPi / 5 && a2 > 2 * kPi / 5 &&
                      a2 < kPi && a1 < a2 && 2 * a1 + a2 / 2 >= kPi;
            bool r2 = a1 >= kPi / 3 && a1 < 2 * kPi / 5 && a2 > kPi / 3 &&
                      a2 < 2 * kPi / 3 && a1 < a2 && 2 * a1 + a2 / 2 < kPi;
            bool s1 = a2 >= 2 * kPi / 5 && a2 < a1;
            bool s2 = a2 >= kPi / 3 && a2 < 2 * kPi / 5 && a2 < a1;
            CHECK(int(r1) + int(r2) + int(s1) + int(s2) <= 1);
            Region got = classify(d);
            if (r1) CHECK(got == Region::R1);
            else if (r2) CHECK(got == Region::R2);
            else if (s1) CHECK(got == Region::S1);
            else if (s2) CHECK(got == Region::S2);
            else CHECK(got == Region::OutOfScope);
        }
    }
}

TEST_CASE("R1 and R2 partition R") {
    for (int i = 0; i < 200; ++i) {
        double a1 = kPi / 3 + (2 * kPi / 5 - kPi / 3) * (i + 0.5) / 200.0;
        for (int k = 0; k < 200; ++k) {
            double a2 = a1 + (kPi - a1) * (k + 0.5) / 200.0;
            if (a2 <= kPi / 3) continue;
            Region got = classify({a1, a2});
            // 2a1 + a2/2 < pi is automatic below 2pi/5, and impossible at or
            // above 2pi/3, so the two predicates cover the whole of R
            CHECK((got == Region::R1 || got == Region::R2));
        }
    }
}

TEST_CASE("presets") {
    DelayPair d{0.38 * kPi, 0.85 * kPi};
    auto z = preset("zero", d, 256);
    CHECK(z.p1.max_abs() == 0.0);
    CHECK(z.q2.max_abs() == 0.0);

    auto a = preset("preset-A", d, 2048);
    CHECK(a.p1(0.5 * kPi).real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(a.q1(0.5 * kPi)) == 0.0);  // 0.5pi < a2, masked

    auto b = preset("preset-B", d, 2048);
    CHECK(b.p2(0.9 * kPi).real() ==
          doctest::Approx(0.1 * std::cos(0.9 * kPi)).epsilon(1e-6));

    CHECK_THROWS_AS(preset("nope", d, 64), std::invalid_argument);
}

TEST_CASE("preset support masking across a delay sweep") {
    for (int i = 0; i < 12; ++i) {
        double a1 = kPi / 3 + 0.05 * i;
        if (a1 >= kPi) break;
        double a2 = std::min(kPi - 0.01, a1 + 0.4);
        DelayPair d{a1, a2};
        auto ps = preset("preset-A", d, 512);
        for (std::size_t k = 0; k <= 512; ++k) {
            double x = kPi * k / 512.0;
            if (x <= a1) {
                CHECK(std::abs(ps.p1.value_at_node(k)) == 0.0);
                CHECK(std::abs(ps.p2.value_at_node(k)) == 0.0);
            }
            if (x <= a2) {
                CHECK(std::abs(ps.q1.value_at_node(k)) == 0.0);
                CHECK(std::abs(ps.q2.value_at_node(k)) == 0.0);
            }
        }
    }
}
