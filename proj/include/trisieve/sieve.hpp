#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "trisieve/aasim.hpp"
#include "trisieve/relstore.hpp"
#include "trisieve/rng.hpp"
#include "trisieve/rpc.hpp"
#include "trisieve/sphere.hpp"

namespace trisieve {

struct ListSize {
    double value = 0.0;
    double exponent = 0.0;  // log2(value)/d
};

// ((k^{k/(k-1)})/(k+1))^{d/2}
ListSize min_list_size(int k, int d);

struct SieveParams {
    int d = 0;
    std::size_t m = 0;
    double cos_theta = 1.0 / 3.0;
    double cos_theta_prime = 0.0;
    double cos_alpha = 0.0;
    double cos_alpha_prime = 0.0;
    double epsilon = 0.0;
    std::uint64_t ell1 = 1, ell2 = 1;
    std::uint64_t r1 = 1, r2 = 1, r3 = 1;
    double mu = 0.0;

    void validate() const;
    nlohmann::json to_json() const;
};

// (1/3, eps + sqrt(1/3 - eps/2))
std::pair<double, double> choose_theta(double epsilon);

// epsilon_for(d), choose_theta, mu = 1/d.
SieveParams make_sieve_params(int d, std::size_t m, double cos_alpha, double cos_alpha_prime);

struct CostModel {
    double S = 1.0;   // RCollisionSamp
    double C1 = 1.0;  // inner-product check on (x, y)
    double S2 = 1.0;  // decode of the normalized difference
    double S3 = 1.0;  // zSamp
    double C3 = 1.0;  // zCheck
    double C = 1.0;   // outer check on the flag
};

enum class Step1Mode { Enumerate, Reject };

struct SearchConfig {
    double delta = kDefaultDelta;
    double eta = kDefaultEta;
    CostModel costs;
    double truncation_cap = 0.0;  // <= 0: 2^{d/log2 d}
    Step1Mode mode = Step1Mode::Enumerate;
};

double default_truncation_cap(int d);

struct TripleSolution {
    std::size_t x_id = 0, y_id = 0, z_id = 0;
    double inner_xy = 0.0;
    double inner_diff_z = 0.0;
    std::optional<CodewordId> witness_c;
    std::optional<CodewordId> witness_c_prime;

    auto key() const { return std::make_tuple(x_id, y_id, z_id); }
};

// (x - y)/||x - y||
UnitVector diff_unit(const UnitVector& x, const UnitVector& y);
bool in_band(double v, double center, double eps);
// T_sol membership for pairwise distinct indices.
bool in_T_sol(const std::vector<UnitVector>& L, std::size_t x, std::size_t y, std::size_t z,
              const SieveParams& p);

struct Preprocessed {
    RelationStore D;   // R_L over C   (codeword ids are flat indices)
    RelationStore Dp;  // R'_L over C'
};

Preprocessed preprocess(const std::vector<UnitVector>& L, const RpcDescription& C,
                        const RpcDescription& Cp, const SieveParams& p);

struct RCollision {
    std::size_t x = 0;
    std::optional<std::uint64_t> c;
    std::optional<std::size_t> y;
};

RCollision r_collision_sample(const RelationStore& D, std::size_t m, Rng& rng);

struct TupleSample {
    std::size_t x = 0;
    std::uint64_t c = 0;
    std::size_t y = 0;
    std::optional<std::uint64_t> c_prime;
    std::optional<std::size_t> z;
    bool flag = false;
    bool truncated = false;
};

// Everything the emulated search needs about one (L, C, C') draw, with the
// exact amplitudes enumerated up front.
class SearchContext {
public:
    SearchContext(const std::vector<UnitVector>& L, const RpcDescription& C, const RpcDescription& Cp,
                  const Preprocessed& pre, const SieveParams& p, const SearchConfig& cfg);

    struct M1Triple {
        std::size_t x;
        std::uint64_t c;
        std::size_t y;
        double weight;  // 1/(m |R(x)| |R^{-1}(c)|)
    };

    struct PairInfo {
        UnitVector u;
        std::vector<std::uint64_t> rprime;  // truncated R'(u), ascending flat ids
        bool truncated = false;
        std::size_t rprime_full = 0;
        // For each c' in rprime: L(x, y, c').
        std::vector<std::vector<std::size_t>> good_z;
    };

    const std::vector<M1Triple>& m1() const { return m1_; }
    double pi_mass() const { return pi_mass_; }        // ||Π ψ||^2
    double pi_prime_mass() const { return pi_prime_mass_; }  // ||Π' ψ'||^2
    std::uint64_t r1() const { return r1_; }
    std::uint64_t r2() const { return r2_; }
    std::uint64_t r3() const { return r3_; }
    std::size_t max_bucket_prime() const { return max_bucket_prime_; }
    bool any_truncated() const { return any_truncated_; }
    double cap() const { return cap_; }

    const PairInfo& pair(std::size_t x, std::size_t y) const;

    const std::vector<UnitVector>& L;
    const RpcDescription& C;
    const RpcDescription& Cp;
    const Preprocessed& pre;
    SieveParams params;
    SearchConfig cfg;

private:
    std::vector<M1Triple> m1_;
    std::vector<double> cumulative_;
    std::map<std::pair<std::size_t, std::size_t>, PairInfo> pairs_;
    double pi_mass_ = 0.0;
    double pi_prime_mass_ = 0.0;
    std::uint64_t r1_ = 1, r2_ = 1, r3_ = 1;
    std::size_t max_bucket_prime_ = 0;
    bool any_truncated_ = false;
    double cap_ = 0.0;

    friend TupleSample tuple_sample(const SearchContext&, Rng&, QueryLedger&);
};

TupleSample tuple_sample(const SearchContext& ctx, Rng& rng, QueryLedger& ledger);
TripleSolution solution_search(const SearchContext& ctx, Rng& rng, QueryLedger& ledger);

// Closed-form squared amplitudes of flagged TupleSamp outputs.
struct TupleKey {
    std::size_t x;
    std::uint64_t c;
    std::size_t y;
    std::uint64_t c_prime;
    std::size_t z;
    auto operator<=>(const TupleKey&) const = default;
};
std::map<TupleKey, double> tuple_distribution(const SearchContext& ctx);
// Per-triple SolutionSearch output probabilities (sum over c, c').
std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> solution_distribution(
    const SearchContext& ctx);

// T_tuple = r1(S+C1) + S2 + r2(S3+C3); total = r3(T_tuple + C).
double symbolic_search_cost(const CostModel& c, std::uint64_t r1, std::uint64_t r2, std::uint64_t r3);

std::vector<TripleSolution> enumerate_T_sol(const std::vector<UnitVector>& L, const SieveParams& p,
                                            std::size_t max_m = 2000);

struct TRRResult {
    std::vector<TripleSolution> T;       // T(R, R')
    std::vector<bool> in_T_star;         // parallel to T
    std::size_t T_sol_size = 0;
};

TRRResult enumerate_T_RRprime(const std::vector<UnitVector>& L, const RpcDescription& C,
                              const RpcDescription& Cp, const SieveParams& p, double cap = 0.0,
                              std::size_t max_m = 2000);

struct ThreeListConfig {
    SearchConfig search;
    double ell1_multiplier = 4.0;
    double ell2_multiplier = 3.0;
    bool code_size_from_band = true;  // |C| = 1/p̂_band, otherwise 1/p_formula
    int b = 0;                        // 0: default_block_count(d)
    int t_rotations = 1;
};

struct ThreeListIteration {
    std::uint64_t realized_M = 0, realized_M_prime = 0;
    std::size_t m1_size = 0;
    std::size_t T_size = 0;
    std::uint64_t ell2 = 0;
    std::size_t new_triples = 0;
    bool skipped = false;
};

struct ThreeListResult {
    std::vector<TripleSolution> triples;
    std::vector<ThreeListIteration> iterations;
    QueryLedger ledger;
    std::uint64_t ell1 = 0;
};

// ℓ1 from the exponent shape with the multiplier; ℓ2 = multiplier·|T(R,R')|.
std::uint64_t ell1_from_shape(const SieveParams& p, double multiplier);

ThreeListResult three_list(const std::vector<UnitVector>& L, const SieveParams& p,
                           const ThreeListConfig& cfg, const Rng& rng);

std::vector<UnitVector> random_list(int d, std::size_t m, Rng& rng);

}  // namespace trisieve
