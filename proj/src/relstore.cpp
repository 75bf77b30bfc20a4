#include "trisieve/relstore.hpp"

#include "trisieve/errors.hpp"

namespace trisieve {

std::size_t RelationStore::PairHash::operator()(
    const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept {
    return static_cast<std::size_t>(splitmix64(p.first * 0x9e3779b97f4a7c15ULL ^ p.second));
}

void RelationStore::insert(std::uint64_t x, std::uint64_t c) {
    if (frozen_) throw FrozenStore("insert into a frozen relation store");
    if (!set_.insert({x, c}).second) throw DuplicatePair("pair already present");
    fwd_[x].push_back(c);
    bwd_[c].push_back(x);
    log_.emplace_back(x, c);
}

std::span<const std::uint64_t> RelationStore::lookup_by_x(std::uint64_t x) const {
    auto it = fwd_.find(x);
    if (it == fwd_.end()) return {};
    return it->second;
}

std::span<const std::uint64_t> RelationStore::lookup_by_c(std::uint64_t c) const {
    auto it = bwd_.find(c);
    if (it == bwd_.end()) return {};
    return it->second;
}

bool RelationStore::contains(std::uint64_t x, std::uint64_t c) const {
    return set_.count({x, c}) != 0;
}

std::optional<std::uint64_t> RelationStore::sample_bucket(std::uint64_t key, Direction dir,
                                                          Rng& rng) const {
    const auto bucket = lookup(key, dir);
    if (bucket.empty()) return std::nullopt;
    return bucket[rng.index(bucket.size())];
}

nlohmann::json RelationStore::snapshot() const {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [x, c] : log_) pairs.push_back({x, c});
    return {{"format", "trisieve-relation"}, {"version", 1}, {"frozen", frozen_}, {"pairs", pairs}};
}

RelationStore RelationStore::from_snapshot(const nlohmann::json& j) {
    if (j.value("format", "") != "trisieve-relation" || j.value("version", 0) != 1)
        throw ConfigError("unsupported relation snapshot");
    RelationStore s;
    for (const auto& p : j.at("pairs")) s.insert(p.at(0).get<std::uint64_t>(), p.at(1).get<std::uint64_t>());
    if (j.at("frozen").get<bool>()) s.freeze();
    return s;
}

}  // namespace trisieve
