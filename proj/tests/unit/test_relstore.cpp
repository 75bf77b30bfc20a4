#include <map>
#include <set>

#include "doctest.h"

#include "trisieve/errors.hpp"
#include "trisieve/relstore.hpp"

using namespace trisieve;

TEST_SUITE("relstore") {
    TEST_CASE("unseen keys are empty") {
        RelationStore s;
        CHECK(s.lookup_by_x(5).empty());
        CHECK(s.lookup_by_c(5).empty());
        Rng r(1);
        CHECK_FALSE(s.sample_bucket(5, Direction::ByX, r).has_value());
    }

    TEST_CASE("buckets keep insertion order") {
        RelationStore s;
        s.insert(1, 20);
        s.insert(1, 10);
        const auto b = s.lookup_by_x(1);
        REQUIRE(b.size() == 2);
        CHECK(b[0] == 20);
        CHECK(b[1] == 10);
        CHECK(s.lookup_by_c(10).size() == 1);
        CHECK(s.contains(1, 10));
        CHECK_FALSE(s.contains(10, 1));
    }

    TEST_CASE("duplicates and frozen inserts are rejected") {
        RelationStore s;
        s.insert(1, 2);
        CHECK_THROWS_AS(s.insert(1, 2), DuplicatePair);
        s.freeze();
        CHECK(s.frozen());
        CHECK_THROWS_AS(s.insert(3, 4), FrozenStore);
        CHECK(s.size() == 1);
    }

    TEST_CASE("bucket sizes add up in both directions") {
        RelationStore s;
        Rng r(2);
        std::size_t inserted = 0;
        while (inserted < 100000) {
            const auto x = r.index(5000), c = r.index(5000);
            if (s.contains(x, c)) continue;
            s.insert(x, c);
            ++inserted;
        }
        std::size_t fw = 0, bw = 0;
        for (const auto& [k, v] : s.forward()) fw += v.size();
        for (const auto& [k, v] : s.backward()) bw += v.size();
        CHECK(fw == 100000);
        CHECK(bw == 100000);
    }

    TEST_CASE("lookups agree with a shadow set of pairs") {
        RelationStore s;
        std::set<std::pair<std::uint64_t, std::uint64_t>> shadow;
        Rng r(3);
        while (shadow.size() < 10000) {
            const std::uint64_t x = r.index(300), c = r.index(300);
            if (shadow.insert({x, c}).second) s.insert(x, c);
        }
        std::map<std::uint64_t, std::multiset<std::uint64_t>> byx, byc;
        for (auto [x, c] : shadow) {
            byx[x].insert(c);
            byc[c].insert(x);
        }
        for (std::uint64_t k = 0; k < 300; ++k) {
            const auto a = s.lookup_by_x(k), b = s.lookup_by_c(k);
            CHECK(std::multiset<std::uint64_t>(a.begin(), a.end()) == byx[k]);
            CHECK(std::multiset<std::uint64_t>(b.begin(), b.end()) == byc[k]);
        }
    }

    TEST_CASE("singleton bucket sampling") {
        RelationStore s;
        s.insert(7, 9);
        Rng r(4);
        for (int i = 0; i < 100; ++i) CHECK(*s.sample_bucket(7, Direction::ByX, r) == 9);
        for (int i = 0; i < 100; ++i) CHECK(*s.sample_bucket(9, Direction::ByC, r) == 7);
    }

    TEST_CASE("bucket of four is sampled uniformly") {
        RelationStore s;
        for (std::uint64_t c : {11, 12, 13, 14}) s.insert(1, c);
        Rng r(5);
        std::map<std::uint64_t, int> counts;
        const int n = 100000;
        for (int i = 0; i < n; ++i) counts[*s.sample_bucket(1, Direction::ByX, r)]++;
        for (auto [c, k] : counts) CHECK(std::abs(static_cast<double>(k) / n - 0.25) <= 0.006);
        CHECK(counts.size() == 4);
    }

    TEST_CASE("snapshot round trip") {
        RelationStore s;
        Rng r(6);
        for (int i = 0; i < 500; ++i) {
            const auto x = r.index(50), c = r.index(50);
            if (!s.contains(x, c)) s.insert(x, c);
        }
        s.freeze();
        const auto back = RelationStore::from_snapshot(s.snapshot());
        CHECK(back.pairs() == s.pairs());
        CHECK(back.frozen());
    }
}
