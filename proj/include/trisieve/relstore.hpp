#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "trisieve/rng.hpp"

namespace trisieve {

enum class Direction { ByX, ByC };

// Finite relation R ⊆ X × C stored in both directions with append-ordered
// buckets. Ids are opaque to the store.
class RelationStore {
public:
    void insert(std::uint64_t x, std::uint64_t c);
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    std::span<const std::uint64_t> lookup_by_x(std::uint64_t x) const;
    std::span<const std::uint64_t> lookup_by_c(std::uint64_t c) const;
    std::span<const std::uint64_t> lookup(std::uint64_t key, Direction dir) const {
        return dir == Direction::ByX ? lookup_by_x(key) : lookup_by_c(key);
    }
    bool contains(std::uint64_t x, std::uint64_t c) const;

    std::optional<std::uint64_t> sample_bucket(std::uint64_t key, Direction dir, Rng& rng) const;

    std::size_t size() const { return log_.size(); }
    const std::unordered_map<std::uint64_t, std::vector<std::uint64_t>>& forward() const { return fwd_; }
    const std::unordered_map<std::uint64_t, std::vector<std::uint64_t>>& backward() const { return bwd_; }
    // Pairs in insertion order.
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pairs() const { return log_; }

    nlohmann::json snapshot() const;
    static RelationStore from_snapshot(const nlohmann::json& j);

private:
    struct PairHash {
        std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept;
    };
    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> fwd_;
    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> bwd_;
    std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, PairHash> set_;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> log_;
    bool frozen_ = false;
};

}  // namespace trisieve
