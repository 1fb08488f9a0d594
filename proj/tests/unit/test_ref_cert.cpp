#include <cmath>

#include "../oracles.hpp"
#include "doctest.h"
#include "scenrel/error.hpp"
#include "scenrel/ref_cert.hpp"

using namespace scenrel;

namespace {

const PairedCampaigns kStep3{{500, 17}, {2000, 45}};

double oracle_phi(double z) {
    // Beyond |z| = 8 the tail is below 1e-15.
    return z > 8 ? 1.0 : (z < -8 ? 0.0 : oracle::phi_series(z));
}

double oracle_coverage(double mu, double sigma, double eps) {
    return oracle_phi((eps - mu) / sigma) - oracle_phi((-eps - mu) / sigma);
}

double oracle_sigma(const PairedCampaigns& p) {
    const double r = double(p.real.k) / double(p.real.t);
    const double s = double(p.synthetic.k) / double(p.synthetic.t);
    return std::sqrt(r * (1 - r) / double(p.real.t) + s * (1 - s) / double(p.synthetic.t));
}

}  // namespace

TEST_CASE("criterion validation") {
    CHECK_NOTHROW(RefCriterion{}.validate());
    CHECK_THROWS_AS((RefCriterion{0.0, 0.05}.validate()), Error);
    CHECK_THROWS_AS((RefCriterion{0.02, 1.0}.validate()), Error);
    CHECK_THROWS_AS((RefCriterion{0.02, 0.0}.validate()), Error);
}

TEST_CASE("delta distribution") {
    const auto d = delta_distribution(kStep3);
    CHECK(d.mu == -0.0115);
    CHECK(d.sigma == doctest::Approx(oracle_sigma(kStep3)).epsilon(1e-14));
    CHECK_FALSE(d.real_small_sample);
    CHECK(delta_distribution({{100, 2}, {100, 50}}).real_small_sample);
    CHECK_THROWS_AS(delta_distribution({{0, 0}, {10, 1}}), Error);
}

TEST_CASE("coverage matches the oracle for the example steps") {
    for (const auto& p : {kStep3, PairedCampaigns{{500, 17}, {4000, 102}}, PairedCampaigns{{500, 17}, {2000, 58}}}) {
        const auto d = delta_distribution(p);
        for (double eps : {0.005, 0.01, 0.02, 0.03})
            CHECK(ref_coverage(d, eps) == doctest::Approx(oracle_coverage(d.mu, d.sigma, eps)).epsilon(1e-12));
    }
    const auto a3 = certify_ref(kStep3, {});
    CHECK(a3.coverage == doctest::Approx(0.83398).epsilon(1e-4));
    CHECK_FALSE(a3.certified);
    const auto a5 = certify_ref({{500, 17}, {2000, 58}}, {});
    CHECK(a5.certified);
    CHECK(a5.coverage >= 0.95);
}

TEST_CASE("degenerate sigma") {
    const auto d = delta_distribution({{100, 0}, {100, 0}});
    CHECK(d.degenerate);
    CHECK(ref_coverage(d, 0.01) == 1.0);
    const auto e = delta_distribution({{100, 0}, {100, 100}});
    CHECK(e.degenerate);
    CHECK(ref_coverage(e, 0.5) == 0.0);
}

TEST_CASE("relative tolerance scales epsilon by the real estimate") {
    const RefCriterion rel{0.5, 0.05, ToleranceMode::Relative};
    const auto a = certify_ref(kStep3, rel);
    CHECK(a.effective_epsilon == doctest::Approx(0.017));
}

TEST_CASE("epsilon star is the boundary of certification") {
    const auto d = delta_distribution(kStep3);
    const double eps = smallest_certifiable_epsilon(d, 0.05);
    // Independent bisection on the series oracle.
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (oracle_coverage(d.mu, d.sigma, mid) >= 0.95 ? hi : lo) = mid;
    }
    CHECK(eps == doctest::Approx(hi).epsilon(1e-9));
    CHECK(certify_ref(kStep3, {eps + 1e-9, 0.05}).certified);
    CHECK_FALSE(certify_ref(kStep3, {eps - 1e-9, 0.05}).certified);
    CHECK(smallest_certifiable_epsilon(kStep3, 0.05) == eps);
}

TEST_CASE("error decomposition telescopes") {
    const auto e = decompose_error(0.03, 0.025, kStep3);
    CHECK(std::abs(e.sum() - (mle_pfs(kStep3.synthetic) - mle_pfs(kStep3.real))) < 1e-15);
    CHECK(e.sim_bias == doctest::Approx(-0.005));
}

TEST_CASE("scale-up interval") {
    const auto ci = scale_up_interval({50000, 1415}, 0.95);
    CHECK(ci.standard_error == doctest::Approx(0.00074161).epsilon(1e-4));
    CHECK(ci.lo == doctest::Approx(0.0268465).epsilon(1e-5));
    CHECK(ci.hi == doctest::Approx(0.0297535).epsilon(1e-5));
}

TEST_CASE("operating characteristics are seed-deterministic") {
    const auto a = ref_operating_characteristics(0.03, 0.03, 2000, 2000, {}, 400, 5, 1);
    const auto b = ref_operating_characteristics(0.03, 0.03, 2000, 2000, {}, 400, 5, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.mean > 0.5);
    const auto c = ref_operating_characteristics(0.03, 0.08, 2000, 2000, {}, 400, 5);
    CHECK(c.mean < 0.05);
}
