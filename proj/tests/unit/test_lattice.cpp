#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "doctest.h"

#include "trisieve/errors.hpp"
#include "trisieve/lattice.hpp"
#include "trisieve/sieve.hpp"
#include "trisieve/sphere.hpp"
#include "trisieve/stats.hpp"

using namespace trisieve;

namespace {
LatticeBasis identity(int d) {
    LatticeBasis B;
    B.rows.assign(d, IntVec(d, 0));
    for (int i = 0; i < d; ++i) B.rows[i][i] = 1;
    return B;
}

// CDF of <x, y> for independent uniform x, y on S^{d-1}.
double pair_angle_cdf(int d, double t) { return marginal_cdf(d, t); }

// Brute-force shortest vector over coefficients in [-k, k]^d.
double brute_lambda1(const LatticeBasis& B, int k) {
    const int d = B.dim();
    IntVec c(d, -k);
    double best = INFINITY;
    while (true) {
        bool zero = true;
        for (auto v : c) zero = zero && v == 0;
        if (!zero) best = std::min(best, std::sqrt(static_cast<double>(squared_norm(B.combine(c)))));
        int i = 0;
        while (i < d && c[i] == k) c[i++] = -k;
        if (i == d) break;
        ++c[i];
    }
    return best;
}
}  // namespace

TEST_SUITE("lattice") {
    TEST_CASE("identity basis round-trips byte for byte") {
        const std::string text = "[[1 0 0 0]\n[0 1 0 0]\n[0 0 1 0]\n[0 0 0 1]\n]\n";
        CHECK(format_basis(parse_basis(text)) == text);
        CHECK(format_basis(identity(4)) == text);
    }

    TEST_CASE("malformed input reports its position") {
        try {
            parse_basis("[[1 0]\n(0 1)\n]\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
            CHECK(e.column == 1);
        }
        CHECK_THROWS_AS(parse_basis("[[1 0]\n[0 1]\n]\nextra"), ParseError);
        CHECK_THROWS_AS(parse_basis("[[1 x]\n[0 1]\n]\n"), ParseError);
        CHECK_THROWS_AS(parse_basis("[[1 0 0]\n[0 1]\n]\n"), ParseError);
    }

    TEST_CASE("rank-deficient bases are rejected") {
        CHECK_THROWS_AS(parse_basis("[[1 2]\n[2 4]\n]\n"), RankDeficient);
    }

    TEST_CASE("random 10-bit basis: load, save, load is a fixpoint") {
        Rng r(1);
        const auto B = random_basis(20, 10, r);
        for (const auto& row : B.rows)
            for (auto v : row) CHECK((v >= -512 && v < 512));
        const auto dir = std::filesystem::temp_directory_path();
        const auto p1 = (dir / "trisieve_rt1.txt").string(), p2 = (dir / "trisieve_rt2.txt").string();
        save_basis(B, p1);
        const auto B1 = load_basis(p1);
        save_basis(B1, p2);
        const auto B2 = load_basis(p2);
        CHECK(B1.rows == B.rows);
        CHECK(B2.rows == B1.rows);
        std::filesystem::remove(p1);
        std::filesystem::remove(p2);
    }

    TEST_CASE("exact determinant") {
        CHECK(exact_determinant(identity(5)) == "1");
        LatticeBasis B{{{2, 0}, {1, 1}}};
        CHECK(exact_determinant(B) == "2");
        LatticeBasis C{{{0, 1}, {1, 0}}};
        CHECK(exact_determinant(C) == "-1");
    }

    TEST_CASE("LLL output is reduced and preserves the determinant") {
        Rng r(2);
        for (int trial = 0; trial < 5; ++trial) {
            const auto B = random_basis(16, 10, r);
            const auto red = lll_reduce(B, 0.99);
            CHECK(is_lll_reduced(red.basis, 0.99));
            std::string a = exact_determinant(B), b = exact_determinant(red.basis);
            if (!a.empty() && a[0] == '-') a.erase(0, 1);
            if (!b.empty() && b[0] == '-') b.erase(0, 1);
            CHECK(a == b);
            // The recorded transform maps input rows to reduced rows exactly.
            for (int i = 0; i < 16; ++i) CHECK(B.combine(red.U[i]) == red.basis.rows[i]);
        }
    }

    TEST_CASE("an already reduced basis is left alone") {
        const auto red = lll_reduce(identity(6), 0.99);
        for (int i = 0; i < 6; ++i) {
            std::int64_t s = 0;
            for (auto v : red.basis.rows[i]) s += std::abs(v);
            CHECK(s == 1);
        }
        CHECK(red.swaps == 0);
    }

    TEST_CASE("d = 2 skewed basis meets the LLL bound") {
        LatticeBasis B{{{1, 0}, {1000000, 1}}};
        const auto red = lll_reduce(B, 0.99);
        const double first = std::sqrt(static_cast<double>(squared_norm(red.basis.rows[0])));
        const double l1 = enumerate_lambda1(B).lambda1;
        CHECK(l1 == doctest::Approx(1.0));
        CHECK(first <= std::sqrt(4.0 / 3.0) * l1 + 1e-12);
    }

    TEST_CASE("enumeration: identity and the small hand example") {
        CHECK(enumerate_lambda1(identity(7)).lambda1 == doctest::Approx(1.0));
        LatticeBasis B{{{2, 0}, {1, 1}}};
        const auto l = enumerate_lambda1(B);
        CHECK(l.lambda1 == doctest::Approx(std::numbers::sqrt2));
        CHECK(std::abs(l.witness.vec[0]) == 1);
        CHECK(std::abs(l.witness.vec[1]) == 1);
    }

    TEST_CASE("enumeration agrees with a brute-force box search at d = 4") {
        Rng r(3);
        for (int trial = 0; trial < 5; ++trial) {
            const auto B = lll_reduce(random_basis(4, 5, r)).basis;
            CHECK(enumerate_lambda1(B).lambda1 == doctest::Approx(brute_lambda1(B, 3)));
        }
    }

    TEST_CASE("d = 16 witness is exact and matches lambda1") {
        Rng r(4);
        const auto B = random_basis(16, 10, r);
        const auto l = enumerate_lambda1(B);
        CHECK(B.combine(l.witness.coeffs) == l.witness.vec);
        CHECK(std::sqrt(static_cast<double>(squared_norm(l.witness.vec))) == doctest::Approx(l.lambda1));
        CHECK_THROWS_AS(enumerate_lambda1(random_basis(25, 4, r)), SizeGuard);
    }

    TEST_CASE("annulus sampler: empty request and the norm window") {
        Rng r(5);
        const auto B = lll_reduce(random_basis(12, 8, r)).basis;
        CHECK(sample_annulus_vectors(B, 0, 0.9, 100.0, r).vectors.empty());
        double R = 0.0;
        for (const auto& row : B.rows) R = std::max(R, std::sqrt(static_cast<double>(squared_norm(row))));
        AnnulusSample s;
        for (int attempt = 0;; ++attempt) {
            try {
                s = sample_annulus_vectors(B, 200, 0.9, R, r);
                break;
            } catch (const SamplerFailure&) {
                REQUIRE(attempt < 20);
                R *= 1.25;
            }
        }
        CHECK(s.vectors.size() == 200);
        std::set<IntVec> seen;
        for (const auto& v : s.vectors) {
            CHECK(v.norm >= 0.9 * R - 1e-9);
            CHECK(v.norm <= R + 1e-9);
            CHECK(B.combine(v.coeffs) == v.vec);
            seen.insert(v.vec);
        }
        CHECK(seen.size() == 200);
        CHECK(s.acceptance_rate > 0.0);
    }

    TEST_CASE("pair angles of normalized annulus samples at d = 24 look uniform") {
        Rng r(6);
        const int d = 24;
        const auto B = lll_reduce(random_basis(d, 10, r)).basis;
        double R = 0.0;
        for (const auto& row : B.rows) R = std::max(R, std::sqrt(static_cast<double>(squared_norm(row))));
        const auto s = sample_annulus_vectors(B, 400, 0.9, R * 1.5, r);
        std::vector<UnitVector> u;
        for (const auto& v : s.vectors) {
            std::vector<double> x(v.vec.begin(), v.vec.end());
            u.push_back(UnitVector::normalize(x));
        }
        // Disjoint pairs keep the samples independent.
        std::vector<double> ips;
        for (std::size_t i = 0; i + 1 < u.size(); i += 2) ips.push_back(dot(u[i], u[i + 1]));
        CHECK(ks_test(ips, [d](double t) { return pair_angle_cdf(d, t); }).p_value > 1e-4);
    }

    TEST_CASE("sieve iteration keeps every vector lattice-exact and within the new radius") {
        Rng r(7);
        const int d = 16;
        const auto B = lll_reduce(random_basis(d, 10, r)).basis;
        SvpConfig cfg;
        const std::size_t m = static_cast<std::size_t>(std::ceil(4 * min_list_size(3, d).value));
        auto p = make_sieve_params(d, m, cfg.cos_alpha, cfg.cos_alpha_prime);
        double R = 0.0;
        for (const auto& row : B.rows) R = std::max(R, std::sqrt(static_cast<double>(squared_norm(row))));
        SieveState st;
        st.R = R;
        st.vectors = sample_annulus_vectors(B, m, 0.9, R, r).vectors;
        st.best = st.vectors.front();
        const auto next = sieve_iteration(st, B, p, cfg, r);
        CHECK(next.R == doctest::Approx((1.0 - 1.0 / d) * R));
        std::set<IntVec> seen;
        for (const auto& v : next.vectors) {
            CHECK(B.combine(v.coeffs) == v.vec);
            CHECK(v.norm <= next.R + 1e-9);
            CHECK(squared_norm(v.vec) > 0);
            IntVec neg = v.vec;
            for (auto& x : neg) x = -x;
            CHECK(seen.count(neg) == 0);
            CHECK(seen.insert(v.vec).second);
        }
        REQUIRE(next.history.size() == 1);
        CHECK(next.history[0].list_out == next.vectors.size());
    }

    TEST_CASE("a planted short combination appears in the sieve output") {
        // <x,y>/(|x||y|) = 1/3 and <x-y, z>/(|x-y||z|) = 2/3, inside the
        // d = 12 bands; x - y - z = (-1, 2, 1, -1, 0, ...). Fillers are orthogonal.
        const int d = 12;
        const auto B = identity(d);
        SvpConfig cfg;
        auto p = make_sieve_params(d, 100, cfg.cos_alpha, cfg.cos_alpha_prime);
        std::vector<LatticeVector> L;
        auto add = [&](IntVec v) { L.push_back(LatticeVector::from_coeffs(B, std::move(v))); };
        add({2, 2, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0});
        add({2, 0, -1, 2, 0, 0, 0, 0, 0, 0, 0, 0});
        add({1, 0, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0});
        for (int i = 4; i < d; ++i) {
            IntVec v(d, 0);
            v[i] = 9;
            add(v);
        }
        REQUIRE(in_band(3.0 / 9.0, p.cos_theta, p.epsilon));
        REQUIRE(in_band(4.0 / std::sqrt(12.0 * 3.0), p.cos_theta_prime, p.epsilon));
        SieveState st;
        st.R = 100.0;
        st.vectors = L;
        st.best = L[0];
        const IntVec target{-1, 2, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0}, neg{1, -2, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0};
        bool hit = false;
        Rng r(8);
        for (int rep = 0; rep < 300 && !hit; ++rep) {
            const auto next = sieve_iteration(st, B, p, cfg, r);
            for (const auto& v : next.vectors) hit = hit || v.vec == target || v.vec == neg;
        }
        CHECK(hit);
    }

    TEST_CASE("solve_svp in dimension 2 and 3 is exact") {
        Rng r(9);
        for (int trial = 0; trial < 10; ++trial) {
            for (int d : {2, 3}) {
                const auto B = random_basis(d, 12, r);
                const auto res = solve_svp(B, SvpConfig{}, r);
                CHECK(res.vector.norm == doctest::Approx(enumerate_lambda1(B).lambda1));
                CHECK(B.combine(res.vector.coeffs) == res.vector.vec);
            }
        }
    }

    TEST_CASE("solve_svp at d = 16 returns an exact vector no shorter than lambda1") {
        Rng r(10);
        const auto B = random_basis(16, 10, r);
        const auto res = solve_svp(B, SvpConfig{}, r);
        const double l1 = enumerate_lambda1(B).lambda1;
        CHECK(B.combine(res.vector.coeffs) == res.vector.vec);
        CHECK(squared_norm(res.vector.vec) > 0);
        CHECK(res.vector.norm >= l1 - 1e-9);
        CHECK(res.vector.norm <= 1.05 * l1);
        CHECK_FALSE(res.trace.empty());
        for (std::size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i].R_in < res.trace[i - 1].R_in);
    }

    TEST_CASE("solve_svp enforces the dimension cap") {
        Rng r(11);
        SvpConfig cfg;
        cfg.max_dim = 10;
        CHECK_THROWS_AS(solve_svp(random_basis(12, 6, r), cfg, r), SizeGuard);
    }
}
