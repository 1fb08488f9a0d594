#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "scenrel/error.hpp"
#include "scenrel/mc_harness.hpp"

using namespace scenrel;
using namespace scenrel::mc;

TEST_CASE("philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) ==
          A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                        A2{0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                        A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::vector<std::uint64_t> va, vb, vc, vd;
    for (int i = 0; i < 100; ++i) {
        va.push_back(a());
        vb.push_back(b());
        vc.push_back(c());
        vd.push_back(d());
    }
    CHECK(va == vb);
    CHECK(va != vc);
    CHECK(va != vd);
    CHECK(std::set<std::uint64_t>(va.begin(), va.end()).size() == va.size());
}

TEST_CASE("uniform01 lies in [0,1) with mean 1/2 and variance 1/12") {
    RngStream rng(1, 0);
    const int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sq += u * u;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n) + 1e-12);
    CHECK(std::abs(sq / n - mean * mean - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("bernoulli frequency within three standard errors") {
    RngStream rng(9, 3);
    const int n = 100000;
    for (double p : {0.01, 0.3, 0.9}) {
        int hits = 0;
        for (int i = 0; i < n; ++i) hits += rng.bernoulli(p);
        CHECK(std::abs(hits / double(n) - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
    }
    RngStream r2(9, 4);
    for (int i = 0; i < 1000; ++i) {
        CHECK_FALSE(r2.bernoulli(0.0));
        CHECK(r2.bernoulli(1.0));
    }
}

TEST_CASE("paired streams are uncorrelated") {
    const int n = 100000;
    for (std::uint64_t j = 0; j < 4; ++j) {
        RngStream a(2024, j), b(2024, j + 1);
        double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
        for (int i = 0; i < n; ++i) {
            const double x = a.uniform01(), y = b.uniform01();
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        const double cov = sab / n - (sa / n) * (sb / n);
        const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
        CHECK(std::abs(corr) < 0.01);
    }
}

TEST_CASE("summarize uses the sample standard deviation") {
    const std::vector<double> v{1, 2, 3, 4};
    const auto e = summarize(v);
    CHECK(e.mean == doctest::Approx(2.5));
    CHECK(e.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(e.replicates == 4);
    const std::vector<double> one{7};
    CHECK(summarize(one).standard_error == 0.0);
}

TEST_CASE("run_replicated is bitwise independent of the worker count") {
    const ReplicateTask task = [](RngStream& rng) {
        double s = 0;
        for (int i = 0; i < 10; ++i) s += rng.uniform01();
        return s;
    };
    const SeedPolicy policy{77};
    const auto base = run_replicated(task, 5001, policy, 1);
    for (unsigned w : {2u, 3u, 8u, 0u}) {
        const auto other = run_replicated(task, 5001, policy, w);
        CHECK(other.mean == base.mean);
        CHECK(other.standard_error == base.standard_error);
        CHECK(other.replicates == base.replicates);
    }
    CHECK(base.mean == doctest::Approx(5.0).epsilon(0.01));
}

TEST_CASE("run_replicated propagates task errors and rejects zero replicates") {
    const ReplicateTask bad = [](RngStream& rng) -> double {
        if (rng.stream_id() == 17) throw Error(ErrorCode::Domain, "boom");
        return 0.0;
    };
    CHECK_THROWS_AS(run_replicated(bad, 100, SeedPolicy{1}, 3), Error);
    const ReplicateTask ok = [](RngStream&) { return 1.0; };
    CHECK_THROWS_AS(run_replicated(ok, 0, SeedPolicy{1}), Error);
}

TEST_CASE("derive_seed separates indices") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(5, i));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}
