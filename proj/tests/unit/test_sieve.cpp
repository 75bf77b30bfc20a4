#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "doctest.h"

#include "trisieve/errors.hpp"
#include "trisieve/experiments.hpp"
#include "trisieve/goodness.hpp"
#include "trisieve/rpc.hpp"
#include "trisieve/sieve.hpp"
#include "trisieve/sphere.hpp"
#include "trisieve/stats.hpp"

using namespace trisieve;

namespace {
// Unit vector orthogonal to every vector in `basis` (assumed orthonormal).
std::vector<double> random_orthogonal(int d, const std::vector<std::vector<double>>& basis, Rng& rng) {
    std::vector<double> w(d);
    for (auto& v : w) v = rng.normal();
    for (const auto& b : basis) {
        const double p = dot(w, b);
        for (int i = 0; i < d; ++i) w[i] -= p * b[i];
    }
    const double n = norm(w);
    for (auto& v : w) v /= n;
    return w;
}

struct Planted {
    UnitVector x, y, z;
};

// <x,y> = 1/3 and <(x-y)/|x-y|, z> = cos_theta_prime exactly; |x - y - z| = 1.
Planted plant_triple(int d, double cos_theta_prime, Rng& rng) {
    const UnitVector x = sample_unit_vector(d, rng);
    const auto w = random_orthogonal(d, {x.coords}, rng);
    std::vector<double> y(d);
    for (int i = 0; i < d; ++i) y[i] = x.coords[i] / 3.0 + std::sqrt(8.0 / 9.0) * w[i];
    const UnitVector yu = UnitVector::normalize(y);
    const UnitVector u = diff_unit(x, yu);
    const auto w2 = random_orthogonal(d, {u.coords}, rng);
    std::vector<double> z(d);
    const double s = std::sqrt(1.0 - cos_theta_prime * cos_theta_prime);
    for (int i = 0; i < d; ++i) z[i] = cos_theta_prime * u.coords[i] + s * w2[i];
    return {x, yu, UnitVector::normalize(z)};
}

SieveParams covering_params(int d, std::size_t m) {
    SieveParams p;
    p.d = d;
    p.m = m;
    p.cos_theta = 1.0 / 3.0;
    p.cos_theta_prime = 0.5;
    p.cos_alpha = 0.3;
    p.cos_alpha_prime = 0.4;
    p.epsilon = 2.5;  // every inner product is in every band
    return p;
}
}  // namespace

TEST_SUITE("sieve") {
    TEST_CASE("min_list_size exponents") {
        CHECK(std::abs(min_list_size(2, 100).exponent - 0.2075187496394219) < 1e-12);
        CHECK(std::abs(min_list_size(3, 100).exponent - 0.1887218755408671) < 1e-12);
        CHECK(std::abs(min_list_size(4, 100).exponent - 0.1723692858896522) < 1e-12);
        CHECK(min_list_size(3, 20).value == doctest::Approx(std::pow(27.0 / 16.0, 5.0)));
        CHECK_THROWS_AS(min_list_size(1, 10), InvalidArgument);
    }

    TEST_CASE("choose_theta") {
        const auto [a, b] = choose_theta(0.04);
        CHECK(a == doctest::Approx(1.0 / 3.0));
        CHECK(b == doctest::Approx(0.04 + std::sqrt(1.0 / 3.0 - 0.02)));
        const auto [c, e] = choose_theta(1e-9);
        CHECK(c == doctest::Approx(1.0 / 3.0));
        CHECK(e == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));
        CHECK_THROWS_AS(choose_theta(0.0), DomainError);
    }

    TEST_CASE("planted triples reduce to unit norm") {
        Rng r(1);
        for (int i = 0; i < 10; ++i) {
            const auto t = plant_triple(12, 1.0 / std::sqrt(3.0), r);
            std::vector<double> v(12);
            for (int k = 0; k < 12; ++k) v[k] = t.x.coords[k] - t.y.coords[k] - t.z.coords[k];
            CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("preprocess on an empty list gives empty frozen stores") {
        const auto p = make_sieve_params(12, 1, 0.347606, 0.427124);
        const auto C = sample_rpc({12, 4, 100, 1, false}, 1), Cp = sample_rpc({12, 4, 100, 1, false}, 2);
        const auto pre = preprocess({}, C, Cp, p);
        CHECK(pre.D.size() == 0);
        CHECK(pre.Dp.size() == 0);
        CHECK(pre.D.frozen());
        CHECK(pre.Dp.frozen());
    }

    TEST_CASE("relation size equals the sum of decode sizes") {
        Rng r(2);
        const int d = 12;
        const auto L = random_list(d, 100, r);
        const auto p = make_sieve_params(d, 100, 0.347606, 0.427124);
        const auto C = sample_rpc({d, 4, 1000, 1, false}, 3), Cp = sample_rpc({d, 4, 1000, 1, false}, 4);
        const auto pre = preprocess(L, C, Cp, p);
        std::size_t s = 0, sp = 0;
        for (const auto& x : L) {
            s += decode(C, x, p.cos_alpha, p.epsilon).size();
            sp += decode(Cp, x, p.cos_alpha_prime, p.epsilon).size();
        }
        CHECK(pre.D.size() == s);
        CHECK(pre.Dp.size() == sp);
    }

    TEST_CASE("bucket occupancy at d = 16, m = 512 concentrates at m p") {
        Rng r(3);
        const int d = 16;
        const std::size_t m = 512;
        const auto L = random_list(d, m, r);
        const auto p = make_sieve_params(d, m, 0.347606, 0.427124);
        const double pb = band_probability(d, p.cos_alpha, p.epsilon);
        const auto C = sample_rpc({d, 4, 1.0 / pb, 1, false}, 5);
        const auto Cp = sample_rpc({d, 4, 1.0 / band_probability(d, p.cos_alpha_prime, p.epsilon), 1, false}, 6);
        const auto pre = preprocess(L, C, Cp, p);
        const double ratio = static_cast<double>(pre.D.size()) / (C.total_codewords() * m * pb);
        CHECK(std::abs(std::log2(ratio)) / d <= 0.04);
    }

    TEST_CASE("r_collision_sample on one element and one codeword") {
        RelationStore D;
        D.insert(0, 0);
        D.freeze();
        Rng r(4);
        for (int i = 0; i < 20; ++i) {
            const auto s = r_collision_sample(D, 1, r);
            CHECK(s.x == 0);
            CHECK(*s.c == 0);
            CHECK(*s.y == 0);
        }
    }

    TEST_CASE("r_collision_sample with an empty bucket returns bottoms") {
        RelationStore D;
        D.insert(1, 0);
        D.freeze();
        Rng r(5);
        for (int i = 0; i < 200; ++i) {
            const auto s = r_collision_sample(D, 2, r);
            if (s.x == 0) {
                CHECK_FALSE(s.c.has_value());
                CHECK_FALSE(s.y.has_value());
            }
        }
    }

    TEST_CASE("r_collision_sample matches its closed form (m = 32)") {
        const std::size_t m = 32;
        RelationStore D;
        Rng build(6);
        for (std::size_t x = 0; x < m; ++x)
            for (std::uint64_t c = 0; c < 12; ++c)
                if (build.bernoulli(0.25)) D.insert(x, c);
        D.freeze();
        // P(x, c, y) = 1/m * 1/|R(x)| * 1/|R^-1(c)|; P(x, bottom) = 1/m when R(x) is empty.
        std::map<std::tuple<std::size_t, std::int64_t, std::int64_t>, std::size_t> idx;
        std::vector<double> probs;
        for (std::size_t x = 0; x < m; ++x) {
            const auto cs = D.lookup_by_x(x);
            if (cs.empty()) {
                idx[{x, -1, -1}] = probs.size();
                probs.push_back(1.0 / m);
                continue;
            }
            for (auto c : cs) {
                const auto ys = D.lookup_by_c(c);
                for (auto y : ys) {
                    idx[{x, static_cast<std::int64_t>(c), static_cast<std::int64_t>(y)}] = probs.size();
                    probs.push_back(1.0 / m / cs.size() / ys.size());
                }
            }
        }
        std::vector<std::uint64_t> obs(probs.size(), 0);
        Rng r(7);
        for (int i = 0; i < 1000000; ++i) {
            const auto s = r_collision_sample(D, m, r);
            const std::tuple<std::size_t, std::int64_t, std::int64_t> k{
                s.x, s.c ? static_cast<std::int64_t>(*s.c) : -1, s.y ? static_cast<std::int64_t>(*s.y) : -1};
            auto it = idx.find(k);
            REQUIRE(it != idx.end());
            ++obs[it->second];
        }
        CHECK(chi_square_test(obs, probs).p_value > 1e-4);
    }

    TEST_CASE("covering bands: every step-1 pair has a valid z, so the flag is always set") {
        Rng r(8);
        const int d = 8;
        const auto L = random_list(d, 5, r);
        const auto p = covering_params(d, 5);
        const auto C = sample_rpc({d, 1, 3, 1, false}, 9), Cp = sample_rpc({d, 1, 3, 1, false}, 10);
        const auto pre = preprocess(L, C, Cp, p);
        const SearchContext ctx(L, C, Cp, pre, p, SearchConfig{});
        for (int i = 0; i < 200; ++i) {
            QueryLedger led;
            CHECK(tuple_sample(ctx, r, led).flag);
        }
    }

    TEST_CASE("an oversize R'(u) raises the truncation flag") {
        Rng r(11);
        const int d = 8;
        const auto L = random_list(d, 5, r);
        const auto p = covering_params(d, 5);
        const auto C = sample_rpc({d, 1, 3, 1, false}, 12), Cp = sample_rpc({d, 1, 6, 1, false}, 13);
        const auto pre = preprocess(L, C, Cp, p);
        SearchConfig sc;
        sc.truncation_cap = 2.0;
        const SearchContext ctx(L, C, Cp, pre, p, sc);
        CHECK(ctx.any_truncated());
        bool seen = false;
        for (int i = 0; i < 50; ++i) {
            QueryLedger led;
            seen = seen || tuple_sample(ctx, r, led).truncated;
        }
        CHECK(seen);
    }

    TEST_CASE("empty M1 is an empty search") {
        Rng r(14);
        const int d = 12;
        const auto L = random_list(d, 4, r);
        const auto p = make_sieve_params(d, 4, 0.347606, 0.427124);
        const auto C = sample_rpc({d, 4, 1, 1, false}, 15), Cp = sample_rpc({d, 4, 1, 1, false}, 16);
        const auto pre = preprocess(L, C, Cp, p);
        const SearchContext ctx(L, C, Cp, pre, p, SearchConfig{});
        if (ctx.m1().empty()) {
            QueryLedger led;
            CHECK_THROWS_AS(tuple_sample(ctx, r, led), EmptySearch);
            CHECK_THROWS_AS(solution_search(ctx, r, led), NoSolution);
        }
    }

    TEST_CASE("a single triple in T(R,R') is always returned") {
        Rng r(17);
        const int d = 12;
        const auto pt = plant_triple(d, choose_theta(epsilon_for(d)).second, r);
        std::vector<UnitVector> L{pt.x, pt.y, pt.z};
        for (int i = 0; i < 5; ++i) L.push_back(sample_unit_vector(d, r));
        const auto p = make_sieve_params(d, L.size(), 0.347606, 0.427124);
        const auto sols = enumerate_T_sol(L, p);
        bool planted = false;
        for (const auto& s : sols) planted = planted || s.key() == std::make_tuple<std::size_t, std::size_t, std::size_t>(0, 1, 2);
        CHECK(planted);

        const double M = 1.0 / band_probability(d, p.cos_alpha, p.epsilon);
        const double Mp = 1.0 / band_probability(d, p.cos_alpha_prime, p.epsilon);
        bool found = false;
        for (std::uint64_t a = 0; a < 2000 && !found; ++a) {
            const auto C = sample_rpc({d, 4, M, 1, false}, 100 + 2 * a);
            const auto Cp = sample_rpc({d, 4, Mp, 1, false}, 101 + 2 * a);
            if (enumerate_T_RRprime(L, C, Cp, p).T.size() != 1) continue;
            found = true;
            const auto pre = preprocess(L, C, Cp, p);
            const SearchContext ctx(L, C, Cp, pre, p, SearchConfig{});
            const auto only = enumerate_T_RRprime(L, C, Cp, p).T.front().key();
            for (int i = 0; i < 100; ++i) {
                QueryLedger led;
                CHECK(solution_search(ctx, r, led).key() == only);
            }
        }
        CHECK(found);
    }

    TEST_CASE("flagged TupleSamp outputs and SolutionSearch outputs follow the closed forms") {
        for (auto mode : {Step1Mode::Enumerate, Step1Mode::Reject}) {
            EmulateConfig cfg;
            cfg.d = 10;
            cfg.m = 64;
            cfg.draws = 100000;
            cfg.mode = mode;
            const GateReport g = sieve_distribution_check(cfg, Rng(18));
            INFO(g.report.dump());
            CHECK(g.report["tuple"]["pass"].get<bool>());
            CHECK(g.report["solution"]["pass"].get<bool>());
            CHECK(g.report["solution"]["unsound"].get<int>() == 0);
            CHECK(g.report["solution"]["ledger_mismatches"].get<int>() == 0);
        }
    }

    TEST_CASE("ledger total equals the symbolic composition") {
        const GateReport g = ledger_identity_check(5, Rng(19));
        CHECK(g.pass);
        CHECK(symbolic_search_cost({1, 2, 3, 4, 5, 6}, 2, 3, 4) == 4.0 * (2.0 * 3.0 + 3.0 + 3.0 * 9.0 + 6.0));
    }

    TEST_CASE("three orthogonal vectors have no solutions") {
        const int d = 12;
        std::vector<UnitVector> L;
        for (int i = 0; i < 3; ++i) {
            std::vector<double> e(d, 0.0);
            e[i] = 1.0;
            L.push_back(UnitVector::checked(e));
        }
        CHECK(enumerate_T_sol(L, make_sieve_params(d, 3, 0.347606, 0.427124)).empty());
    }

    TEST_CASE("enumerate_T_sol refuses oversize lists") {
        Rng r(20);
        const auto L = random_list(12, 30, r);
        CHECK_THROWS_AS(enumerate_T_sol(L, make_sieve_params(12, 30, 0.3, 0.4), 20), SizeGuard);
    }

    TEST_CASE("T_sol count on random lists at d = 14, m = 400") {
        ConcentrationConfig cfg;
        cfg.seeds = 3;
        const GateReport g = concentration_check(cfg, Rng(21), 4);
        INFO(g.report.dump());
        CHECK(g.report["per_dim_gap"].get<double>() <= cfg.slack);
    }

    TEST_CASE("T(R,R') is a subset of T_sol and equals it under covering codes") {
        Rng r(22);
        const int d = 10;
        const auto L = random_list(d, 80, r);
        const auto p = make_sieve_params(d, 80, 0.347606, 0.427124);
        const auto C = sample_rpc({d, 2, 40, 1, false}, 23), Cp = sample_rpc({d, 2, 40, 1, false}, 24);
        const auto trr = enumerate_T_RRprime(L, C, Cp, p);
        std::set<std::tuple<std::size_t, std::size_t, std::size_t>> sol;
        for (const auto& s : enumerate_T_sol(L, p)) sol.insert(s.key());
        for (const auto& t : trr.T) CHECK(sol.count(t.key()) == 1);
        CHECK(trr.T_sol_size == sol.size());

        const auto L2 = random_list(6, 6, r);
        const auto pc = covering_params(6, 6);
        const auto C2 = sample_rpc({6, 1, 3, 1, false}, 25), Cp2 = sample_rpc({6, 1, 3, 1, false}, 26);
        CHECK(enumerate_T_RRprime(L2, C2, Cp2, pc).T.size() == enumerate_T_sol(L2, pc).size());
        CHECK(enumerate_T_sol(L2, pc).size() == 6 * 5 * 4);
    }

    TEST_CASE("|T(R,R')|/|T_sol| over code draws tracks the collision probabilities" * doctest::may_fail()) {
        Rng r(27);
        const int d = 12;
        const std::size_t m = 128;
        const auto L = random_list(d, m, r);
        const auto p = make_sieve_params(d, m, 0.347606, 0.427124);
        const double pa = band_probability(d, p.cos_alpha, p.epsilon);
        const double pap = band_probability(d, p.cos_alpha_prime, p.epsilon);
        const double wa = wedge_band_probability(d, {p.cos_alpha, p.cos_alpha, p.cos_theta, p.epsilon});
        const double wap = wedge_band_probability(d, {p.cos_alpha_prime, p.cos_alpha_prime, p.cos_theta_prime, p.epsilon});
        const int b = default_block_count(d);
        double sum = 0.0;
        const int draws = 200;
        for (int a = 0; a < draws; ++a) {
            const auto C = sample_rpc({d, b, 1.0 / pa, 1, false}, 3000 + 2 * a);
            const auto Cp = sample_rpc({d, b, 1.0 / pap, 1, false}, 3001 + 2 * a);
            const auto trr = enumerate_T_RRprime(L, C, Cp, p);
            sum += static_cast<double>(trr.T.size()) / static_cast<double>(trr.T_sol_size);
        }
        const double expected = (wa / pa) * (wap / pap);
        const double measured = sum / draws;
        INFO("measured " << measured << " expected " << expected);
        CHECK(std::abs(std::log2(measured / expected)) / d <= 0.04);
    }

    TEST_CASE("three_list with one outer and one inner iteration finds a triple") {
        Rng r(28);
        const int d = 12;
        std::vector<UnitVector> L;
        const double ctp = choose_theta(epsilon_for(d)).second;
        for (int i = 0; i < 40; ++i) {
            const auto t = plant_triple(d, ctp, r);
            L.push_back(t.x);
            L.push_back(t.y);
            L.push_back(t.z);
        }
        const auto p = make_sieve_params(d, L.size(), 0.347606, 0.427124);
        ThreeListConfig cfg;
        cfg.ell1_multiplier = 1e-12;
        cfg.ell2_multiplier = 1e-12;
        const auto res = three_list(L, p, cfg, Rng(29));
        CHECK(res.ell1 == 1);
        REQUIRE(res.iterations.size() == 1);
        CHECK(res.iterations[0].ell2 == 1);
        CHECK(res.triples.size() >= 1);
        for (const auto& t : res.triples) CHECK(in_T_sol(L, t.x_id, t.y_id, t.z_id, p));
    }

    TEST_CASE("three_list at d = 14 recovers m/4 distinct triples in half the runs") {
        ThreeListExperiment cfg;
        const GateReport g = three_list_check(cfg, Rng(30));
        INFO(g.report.dump());
        CHECK(g.pass);
    }

    TEST_CASE("covering codes make every bucket the whole list") {
        Rng r(31);
        const int d = 8;
        const auto L = random_list(d, 12, r);
        const auto p = covering_params(d, 12);
        const auto C = sample_rpc({d, 1, 4, 1, false}, 32), Cp = sample_rpc({d, 1, 4, 1, false}, 33);
        const auto rep = goodness_check(L, C, Cp, p);
        REQUIRE(rep.conditions.size() == 4);
        CHECK(rep.conditions[0].pass);
        CHECK(rep.conditions[0].measured == doctest::Approx(12.0));
    }

    TEST_CASE("a planted dense cluster breaks the z-count bound only") {
        const int d = 16;
        const std::size_t m = 512;
        const auto p = make_sieve_params(d, m, 0.347606, 0.427124);
        const int b = default_block_count(d);
        const double M = 1.0 / band_probability(d, p.cos_alpha, p.epsilon);
        const double Mp = 1.0 / band_probability(d, p.cos_alpha_prime, p.epsilon);
        bool tried = false;
        for (std::uint64_t seed = 0; seed < 20 && !tried; ++seed) {
            Rng r = Rng(34).sub(seed);
            auto L = random_list(d, m, r);
            const auto C = sample_rpc({d, b, M, 1, false}, r.next_u64());
            const auto Cp = sample_rpc({d, b, Mp, 1, false}, r.next_u64());
            if (!goodness_check(L, C, Cp, p, kGoodnessSlack, 4).good) continue;
            // Cluster around z0 with <z0, u> = cos theta' and <z0, c'> = cos alpha'
            // for some c' in R'(u), u = (L[0] - L[1])/|L[0] - L[1]|.
            const UnitVector u = diff_unit(L[0], L[1]);
            const auto dec = decode(Cp, u, p.cos_alpha_prime, p.epsilon);
            if (dec.empty()) continue;
            const UnitVector cp = codeword_vector(Cp, dec.front());
            const double g = dot(u, cp);
            const double t1 = p.cos_theta_prime, t2 = p.cos_alpha_prime;
            const double a = (t1 - g * t2) / (1 - g * g), bb = (t2 - g * t1) / (1 - g * g);
            std::vector<double> z0(d);
            for (int i = 0; i < d; ++i) z0[i] = a * u.coords[i] + bb * cp.coords[i];
            const double rest = 1.0 - norm(z0) * norm(z0);
            if (rest <= 0.0) continue;
            // Orthonormalize {u, cp} for the orthogonal component.
            std::vector<double> e2(d);
            for (int i = 0; i < d; ++i) e2[i] = cp.coords[i] - g * u.coords[i];
            const double n2 = norm(e2);
            for (auto& v : e2) v /= n2;
            const auto w = random_orthogonal(d, {u.coords, e2}, r);
            for (int i = 0; i < d; ++i) z0[i] += std::sqrt(rest) * w[i];
            const std::size_t cluster = 64;
            for (std::size_t k = 0; k < cluster; ++k) {
                std::vector<double> z = z0;
                for (auto& v : z) v += 1e-5 * r.normal();
                L[2 + k] = UnitVector::normalize(z);
            }
            tried = true;
            const auto rep = goodness_check(L, C, Cp, p, kGoodnessSlack, 4);
            INFO(rep.to_json().dump());
            CHECK(rep.conditions[0].pass);
            CHECK_FALSE(rep.conditions[1].pass);
            CHECK(rep.conditions[2].pass);
            CHECK(rep.conditions[3].pass);
        }
        CHECK(tried);
    }

    TEST_CASE("random instances at d = 16, m = 512 are good at least a fifth of the time") {
        const int d = 16;
        const std::size_t m = 512;
        const auto p = make_sieve_params(d, m, 0.347606, 0.427124);
        const int b = default_block_count(d);
        const double M = 1.0 / band_probability(d, p.cos_alpha, p.epsilon);
        const double Mp = 1.0 / band_probability(d, p.cos_alpha_prime, p.epsilon);
        int good = 0;
        const int draws = 100;
        for (int i = 0; i < draws; ++i) {
            Rng r = Rng(35).sub(static_cast<std::uint64_t>(i));
            const auto L = random_list(d, m, r);
            const auto C = sample_rpc({d, b, M, 1, false}, r.next_u64());
            const auto Cp = sample_rpc({d, b, Mp, 1, false}, r.next_u64());
            good += goodness_check(L, C, Cp, p, kGoodnessSlack, 4).good ? 1 : 0;
        }
        INFO("good draws: " << good);
        CHECK(good >= draws / 5);
    }
}
