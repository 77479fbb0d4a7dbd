#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "risbo/rng.hpp"

using risbo::Rng;

TEST_CASE("same seed reproduces the stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(a.uniform() == b.uniform());
        REQUIRE(a.gaussian() == b.gaussian());
        REQUIRE(a.complex_gaussian(2.0) == b.complex_gaussian(2.0));
        REQUIRE(a.uniform_index(17) == b.uniform_index(17));
    }
}

TEST_CASE("uniform stays in [0, 1)") {
    Rng rng(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("gaussian moments") {
    Rng rng(7);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sum2 += g * g;
    }
    REQUIRE(std::abs(sum / n) < 0.01);
    REQUIRE(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("complex gaussian has the right per-part variance") {
    Rng rng(9);
    const int n = 200000;
    const double var = 0.5;
    double re2 = 0.0, im2 = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = rng.complex_gaussian(var);
        re2 += z.real() * z.real();
        im2 += z.imag() * z.imag();
        cross += z.real() * z.imag();
    }
    REQUIRE(std::abs(re2 / n - var / 2.0) < 0.01);
    REQUIRE(std::abs(im2 / n - var / 2.0) < 0.01);
    REQUIRE(std::abs(cross / n) < 0.01);
}

TEST_CASE("uniform_index bounds and coverage") {
    Rng rng(3);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 50000; ++i) {
        const auto v = rng.uniform_index(5);
        REQUIRE(v < 5);
        ++counts[static_cast<int>(v)];
    }
    for (int c : counts) REQUIRE(std::abs(c - 10000) < 600);
    REQUIRE(rng.uniform_index(1) == 0);
}

TEST_CASE("shuffle is a permutation") {
    Rng rng(11);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    rng.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 8; ++i) REQUIRE(sorted[i] == i);
}
