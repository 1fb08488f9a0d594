#include <cmath>
#include <limits>

#include "../oracles.hpp"
#include "doctest.h"
#include "scenrel/normal.hpp"

using scenrel::normal_cdf;
using scenrel::normal_quantile;

TEST_CASE("normal_cdf matches the series oracle") {
    for (double z = -5.0; z <= 5.0; z += 0.0625)
        CHECK(std::abs(normal_cdf(z) - oracle::phi_series(z)) < 1e-14);
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
}

TEST_CASE("normal_cdf tails keep relative accuracy") {
    // Phi(-10) and Phi(-20) from published tables.
    CHECK(normal_cdf(-10.0) == doctest::Approx(7.619853024160527e-24).epsilon(1e-12));
    CHECK(normal_cdf(-20.0) == doctest::Approx(2.7536241186062337e-89).epsilon(1e-12));
    CHECK(normal_cdf(-37.0) > 0.0);  // ~5.7e-300, still a normal double
    CHECK(normal_cdf(-1e6) == 0.0);
    CHECK(normal_cdf(40.0) == 1.0);
}

TEST_CASE("normal_cdf symmetry and monotonicity") {
    double prev = 0.0;
    for (double z = -8.0; z <= 8.0; z += 0.01) {
        const double v = normal_cdf(z);
        CHECK(v >= prev);
        prev = v;
        CHECK(std::abs(v + normal_cdf(-z) - 1.0) < 2e-16);
    }
    CHECK(normal_cdf(0.0) == 0.5);
}

TEST_CASE("normal_quantile inverts normal_cdf") {
    for (double p : {1e-300, 1e-20, 1e-8, 0.001, 0.025, 0.3, 0.5, 0.7, 0.975, 0.999, 1 - 1e-12}) {
        const double z = normal_quantile(p);
        CHECK(normal_cdf(z) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.0) == -std::numeric_limits<double>::infinity());
    CHECK(normal_quantile(1.0) == std::numeric_limits<double>::infinity());
}
