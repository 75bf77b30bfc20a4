#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "json.hpp"

#include "trisieve/rng.hpp"
#include "trisieve/sphere.hpp"
#include "trisieve/stats.hpp"

namespace trisieve {

struct CodewordId {
    std::uint32_t rotation = 0;
    std::vector<std::uint32_t> blocks;

    auto operator<=>(const CodewordId&) const = default;
    bool operator==(const CodewordId&) const = default;
};

struct RpcParams {
    int d = 0;
    int b = 1;
    double M = 1.0;          // nominal code size per rotation
    int t_rotations = 1;
    bool pad = false;        // pad d up to a multiple of b with zero coordinates
};

// Nearest divisor of d to round(log2 d); ties go to the smaller divisor.
int default_block_count(int d);

// Per-block size ceil(M^{1/b}), guarded against floating round-up.
std::uint32_t per_block_size(double M, int b);

class RpcDescription {
public:
    int d = 0;           // ambient dimension of the inputs
    int padded_d = 0;    // b * block_dim
    int b = 1;
    int block_dim = 0;
    std::uint32_t per_block = 1;
    int t = 1;
    double M_nominal = 1.0;
    std::uint64_t seed = 0;

    // codebooks[i][j] is the j-th vector of block i, norm 1/sqrt(b).
    std::vector<std::vector<std::vector<double>>> codebooks;
    // Row-major padded_d x padded_d orthogonal matrices.
    std::vector<std::vector<double>> rotations;

    std::uint64_t realized_M() const;
    std::uint64_t total_codewords() const { return realized_M() * static_cast<std::uint64_t>(t); }

    std::uint64_t flat_index(const CodewordId& id) const;
    CodewordId from_flat(std::uint64_t k) const;
    bool valid(const CodewordId& id) const;

    // Q^T x, padded with zeros when padded_d > d.
    std::vector<double> rotate_in(std::size_t rotation, std::span<const double> x) const;

    void check_invariants() const;
};

RpcDescription sample_rpc(const RpcParams& params, std::uint64_t seed);

// Q (c^{(1)} || ... || c^{(b)}); length padded_d.
UnitVector codeword_vector(const RpcDescription& rpc, const CodewordId& id);

struct DecodeStats {
    // Children admitted at each block level (after the interval bound and,
    // for the second-to-last level, the exact last-block look-ahead).
    std::vector<std::uint64_t> nodes_per_level;
};

// All codewords with |<x,c> - cos_alpha| <= epsilon, lexicographic by id.
std::vector<CodewordId> decode(const RpcDescription& rpc, const UnitVector& x, double cos_alpha,
                               double epsilon, DecodeStats* stats = nullptr);

// Reference filter over every codeword.
std::vector<CodewordId> decode_bruteforce(const RpcDescription& rpc, const UnitVector& x,
                                          double cos_alpha, double epsilon);

// Number of distinct length-(i+1) block prefixes among brute-force survivors.
std::vector<std::uint64_t> survivor_prefix_counts(const std::vector<CodewordId>& survivors,
                                                  int b);

struct CollisionEstimate {
    Estimate estimate;
    double predicted = 0.0;        // min{1, M W_d} with the exponent formula
    double predicted_band = 0.0;   // min{1, M W_band} with quadrature
    std::uint64_t realized_M = 0;
};

CollisionEstimate mc_collision_probability(int d, int b, double M, const AngleSpec& spec,
                                           std::uint64_t n_trials, const Rng& rng,
                                           unsigned workers = 1);

nlohmann::json rpc_to_json(const RpcDescription& rpc, bool materialize);
RpcDescription rpc_from_json(const nlohmann::json& j);

}  // namespace trisieve
