#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

namespace trisieve {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t name_tag(std::string_view name);

// Seeded stream. Sub-streams are derived from (seed, name) or (seed, index)
// so that adding a consumer never perturbs the others.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t seed() const { return seed_; }
    Rng sub(std::string_view name) const;
    Rng sub(std::uint64_t index) const;

    std::mt19937_64& engine() { return eng_; }
    std::uint64_t next_u64() { return eng_(); }
    double uniform();
    double normal();
    std::size_t index(std::size_t n);
    bool bernoulli(double p);

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Runs fn(chunk) for chunk in [0, n_chunks) on up to `workers` threads.
// Callers write results into per-chunk slots and reduce in chunk order, so
// the outcome does not depend on the worker count.
void parallel_chunks(std::size_t n_chunks, unsigned workers,
                     const std::function<void(std::size_t)>& fn);

unsigned default_workers();

}  // namespace trisieve
