#include <cmath>
#include <numbers>

#include "doctest.h"

#include "trisieve/errors.hpp"
#include "trisieve/sphere.hpp"
#include "trisieve/stats.hpp"

using namespace trisieve;

namespace {
// Centre of the wedge region in span{x, y}: c = a x + b y with <c,x> = ca,
// <c,y> = cb, solved from the 2x2 Gram system. Returns |c|^2.
double gamma_sq_oracle(double ca, double cb, double ct) {
    const double det = 1.0 - ct * ct;
    const double a = (ca - ct * cb) / det;
    const double b = (cb - ct * ca) / det;
    return a * ca + b * cb;
}

// Simpson's rule over the marginal density, normalized by the beta function.
double band_oracle(int d, double center, double eps) {
    const double lo = std::max(-1.0, center - eps), hi = std::min(1.0, center + eps);
    const int n = 20000;
    const double h = (hi - lo) / n;
    auto f = [d](double t) { return std::pow(1.0 - t * t, (d - 3) / 2.0); };
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    const double norm = std::beta(0.5, (d - 1) / 2.0);
    return s * h / 3.0 / norm;
}
}  // namespace

TEST_SUITE("sphere") {
    TEST_CASE("epsilon_for") {
        CHECK(epsilon_for(4) == doctest::Approx(0.25));
        CHECK(epsilon_for(16) == doctest::Approx(0.0625));
        CHECK(epsilon_for(100) == doctest::Approx(0.0226547645723641).epsilon(1e-12));
        CHECK_THROWS_AS(epsilon_for(3), InvalidDimension);
    }

    TEST_CASE("unit vector construction") {
        const auto u = UnitVector::normalize({3.0, 4.0});
        CHECK(u.coords[0] == doctest::Approx(0.6));
        CHECK_THROWS_AS(UnitVector::normalize({0.0, 0.0}), DomainError);
        CHECK_THROWS_AS(UnitVector::checked({1.0, 1.0}), DomainError);
    }

    TEST_CASE("d = 1 samples are fair signs") {
        Rng r(101);
        std::uint64_t plus = 0;
        const std::uint64_t n = 100000;
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto v = sample_unit_vector(1, r);
            REQUIRE(std::abs(std::abs(v.coords[0]) - 1.0) < 1e-15);
            plus += v.coords[0] > 0 ? 1 : 0;
        }
        CHECK(binomial_two_sided_p(plus, n, 0.5) > 1e-4);
    }

    TEST_CASE("d = 3 coordinate means vanish") {
        Rng r(102);
        const int n = 1000000;
        double s[3] = {0, 0, 0};
        for (int i = 0; i < n; ++i) {
            const auto v = sample_unit_vector(3, r);
            CHECK_MESSAGE(std::abs(norm(v.coords) - 1.0) <= 1e-12, "unit norm");
            for (int k = 0; k < 3; ++k) s[k] += v.coords[k];
        }
        for (double sk : s) CHECK(std::abs(sk / n) <= 4.0 / std::sqrt(static_cast<double>(n)));
    }

    TEST_CASE("d = 24 cap frequency agrees with mc_cap_probability") {
        // Both estimate Pr[|<x,e1> - 0.5| <= eps]; they must share a joint CI.
        const int d = 24;
        const double eps = epsilon_for(d);
        Rng r(103);
        const std::uint64_t n = 200000;
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto v = sample_unit_vector(d, r);
            hits += std::abs(v.coords[0] - 0.5) <= eps ? 1 : 0;
        }
        const Estimate a = make_estimate(hits, n);
        const Estimate b = mc_cap_probability(d, 0.5, eps, n, Rng(104), 2);
        const double se = std::sqrt(a.p * (1 - a.p) / n + b.p * (1 - b.p) / n);
        CHECK(std::abs(a.p - b.p) <= kZ4 * se);
    }

    TEST_CASE("cap_exponent") {
        CHECK(cap_exponent(0.0) == doctest::Approx(0.0));
        CHECK(std::abs(cap_exponent(0.347606) + 0.092893) <= 1e-5);
        CHECK(std::abs(cap_exponent(0.427124) + 0.145298) <= 3e-5);
        CHECK_THROWS_AS(cap_exponent(1.0), DomainError);
    }

    TEST_CASE("wedge_gamma_sq against the Gram-system oracle") {
        AngleSpec s{1.0 / 3.0, 0.347606, 0.347606, 0.0};
        CHECK(wedge_gamma_sq(s) == doctest::Approx(gamma_sq_oracle(1.0 / 3.0, 0.347606, 0.347606)));
        CHECK(std::abs(wedge_gamma_sq(s) - 0.17219) < 5e-5);

        AngleSpec e{0.427124, 0.427124, 1.0 / std::sqrt(3.0), 0.0};
        CHECK(1.0 - wedge_gamma_sq(e) == doctest::Approx(1.0 - gamma_sq_oracle(0.427124, 0.427124, 1.0 / std::sqrt(3.0))));
        CHECK(std::abs(1.0 - wedge_gamma_sq(e) - 0.768683) < 5e-6);

        for (double ca : {0.2, 0.5, 0.8}) {
            AngleSpec z{ca, ca, 1.0, 0.0};
            CHECK(wedge_gamma_sq(z) == doctest::Approx(ca * ca));
        }
    }

    TEST_CASE("theta = 0 with distinct caps is degenerate") {
        AngleSpec s{0.3, 0.4, 1.0, 0.0};
        CHECK_THROWS_AS(wedge_gamma_sq(s), DegenerateGeometry);
    }

    TEST_CASE("wedge_exponent values") {
        AngleSpec a{1.0 / 3.0, 0.347606, 0.347606, 0.0};
        CHECK(std::abs(wedge_exponent(a) + 0.136318) <= 2e-5);
        AngleSpec b{1.0 / std::sqrt(3.0), 0.427124, 0.427124, 0.0};
        CHECK(std::abs(wedge_exponent(b) + 0.336954) <= 2e-5);
        for (double ca : {0.2, 0.347606, 0.6}) {
            AngleSpec z{ca, ca, 1.0, 0.0};
            CHECK(wedge_exponent(z) == doctest::Approx(cap_exponent(ca)));
        }
        AngleSpec bad{0.99, 0.99, 0.0, 0.0};
        CHECK_THROWS_AS(wedge_exponent(bad), NotWellDefined);
    }

    TEST_CASE("is_well_defined") {
        CHECK(is_well_defined({1.0 / 3.0, 0.347606, 0.347606, 0.0}, 0.01));
        CHECK_FALSE(is_well_defined({0.99, 0.99, 0.0, 0.0}, 0.01));
        // Equal angles at theta = 0 go through the equal-angle branch.
        CHECK(is_well_defined({0.5, 0.5, 1.0, 0.0}, 0.01));
    }

    TEST_CASE("band quadrature agrees with the closed form and an independent Simpson oracle") {
        for (int d : {8, 16, 24, 40}) {
            for (double c : {0.0, 0.3, 0.5, 0.9}) {
                const double eps = epsilon_for(d);
                const double q = band_probability(d, c, eps);
                CHECK(q == doctest::Approx(band_probability_closed(d, c, eps)).epsilon(1e-8));
                CHECK(q == doctest::Approx(band_oracle(d, c, eps)).epsilon(1e-6));
            }
        }
    }

    TEST_CASE("marginal cdf endpoints") {
        CHECK(marginal_cdf(10, -1.0) == doctest::Approx(0.0));
        CHECK(marginal_cdf(10, 1.0) == doctest::Approx(1.0));
        CHECK(marginal_cdf(10, 0.0) == doctest::Approx(0.5));
    }

    TEST_CASE("mc cap at cos 0 brackets the quadrature oracle") {
        const Estimate e = mc_cap_probability(24, 0.0, 0.05, 1000000, Rng(105), 4);
        CHECK(e.ci.contains(band_oracle(24, 0.0, 0.05)));
    }

    TEST_CASE("mc cap at d = 24, cos 0.5 sits near the cap exponent" * doctest::may_fail()) {
        // Fails at this dimension: the band-vs-exponent gap is about 0.076.
        const int d = 24;
        const Estimate e = mc_cap_probability(d, 0.5, epsilon_for(d), 1000000, Rng(106), 4);
        CHECK(std::abs(std::log2(e.p) / d - cap_exponent(0.5)) <= 0.03);
    }

    TEST_CASE("mc cap with eps = 0 has zero hits") {
        const Estimate e = mc_cap_probability(16, 0.3, 0.0, 10000, Rng(107));
        CHECK(e.hits == 0);
        CHECK(e.zero_hits);
    }

    TEST_CASE("mc cap is worker-count invariant") {
        const Estimate a = mc_cap_probability(16, 0.3, 0.05, 50000, Rng(108), 1);
        const Estimate b = mc_cap_probability(16, 0.3, 0.05, 50000, Rng(108), 6);
        CHECK(a.hits == b.hits);
    }

    TEST_CASE("mc wedge at theta = 0 matches the cap") {
        const int d = 16;
        const double eps = epsilon_for(d);
        AngleSpec s{0.4, 0.4, 1.0, eps};
        const Estimate w = mc_wedge_probability(d, s, 400000, Rng(109), 4);
        CHECK(w.ci.contains(band_probability(d, 0.4, eps)));
    }

    TEST_CASE("mc wedge brackets the wedge quadrature") {
        const int d = 20;
        AngleSpec s{0.45, 0.45, 1.0 / 3.0, epsilon_for(d)};
        const Estimate w = mc_wedge_probability(d, s, 1000000, Rng(110), 4);
        CHECK(w.ci.contains(wedge_band_probability(d, s)));
    }

    TEST_CASE("mc wedge at d = 20 near the wedge exponent" * doctest::may_fail()) {
        const int d = 20;
        AngleSpec s{0.45, 0.45, 1.0 / 3.0, epsilon_for(d)};
        const Estimate w = mc_wedge_probability(d, s, 1000000, Rng(111), 4);
        CHECK(std::abs(std::log2(w.p) / d - wedge_exponent(s)) <= 0.04);
    }

    TEST_CASE("disjoint caps give zero hits") {
        AngleSpec s{0.9, 0.9, 0.0, 0.01};
        const Estimate w = mc_wedge_probability(12, s, 20000, Rng(112));
        CHECK(w.hits == 0);
        CHECK(w.zero_hits);
    }

    TEST_CASE("pair_at_separation") {
        Rng r(113);
        for (int i = 0; i < 20; ++i) {
            const auto [x, y] = pair_at_separation(12, 1.0 / 3.0, r);
            CHECK(dot(x, y) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
            CHECK(norm(x.coords) == doctest::Approx(1.0));
            CHECK(norm(y.coords) == doctest::Approx(1.0));
        }
    }
}
