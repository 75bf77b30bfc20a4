#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "trisieve/rng.hpp"
#include "trisieve/sieve.hpp"

namespace trisieve {

using IntVec = std::vector<std::int64_t>;

// Square integer basis; rows[i] is the i-th basis vector.
struct LatticeBasis {
    std::vector<IntVec> rows;

    int dim() const { return static_cast<int>(rows.size()); }
    // coeffs^T B, exact. Throws SizeGuard on int64 overflow.
    IntVec combine(const IntVec& coeffs) const;
    void validate() const;  // square, nonempty, full rank
};

struct LatticeVector {
    IntVec coeffs;  // with respect to the basis that produced it
    IntVec vec;     // exact embedding
    double norm = 0.0;

    static LatticeVector from_coeffs(const LatticeBasis& B, IntVec coeffs);
};

std::int64_t squared_norm(const IntVec& v);
IntVec add_scaled(const IntVec& a, const IntVec& b, std::int64_t s);  // a + s b, overflow-checked

// Bracketed text format: "[[a b]\n[c d]\n]\n".
LatticeBasis parse_basis(const std::string& text);
std::string format_basis(const LatticeBasis& B);
LatticeBasis load_basis(const std::string& path);
void save_basis(const LatticeBasis& B, const std::string& path);

// Entries uniform in [-2^{bits-1}, 2^{bits-1}); resampled until full rank.
LatticeBasis random_basis(int d, int bits, Rng& rng);

// Decimal string of det(B) by fraction-free elimination.
std::string exact_determinant(const LatticeBasis& B);

struct Gso {
    std::vector<std::vector<long double>> mu;
    std::vector<long double> bstar_sq;
};
Gso gram_schmidt(const LatticeBasis& B);

struct LllResult {
    LatticeBasis basis;
    std::vector<IntVec> U;  // reduced rows = U · input rows
    std::uint64_t swaps = 0;
};

LllResult lll_reduce(const LatticeBasis& B, double delta = 0.99);
bool is_lll_reduced(const LatticeBasis& B, double delta, double tol = 1e-9);

struct Lambda1 {
    double lambda1 = 0.0;
    LatticeVector witness;  // coefficients w.r.t. the input basis
    std::uint64_t nodes = 0;
};

// Exact shortest nonzero vector by Schnorr–Euchner enumeration (d <= 24).
Lambda1 enumerate_lambda1(const LatticeBasis& B, int max_dim = 24);

struct AnnulusSample {
    std::vector<LatticeVector> vectors;
    double acceptance_rate = 0.0;
    double width = 0.0;
    int retunes = 0;
    std::uint64_t draws = 0;
};

// Klein-style sampler on an LLL-reduced basis, kept to rho R <= |v| <= R.
// The width is retuned toward the annulus; SamplerFailure when the
// acceptance rate stays under `floor` after `max_retunes`.
AnnulusSample sample_annulus_vectors(const LatticeBasis& B, std::size_t n, double rho, double R, Rng& rng,
                                     double floor = 1e-3, int max_retunes = 30);

struct SvpConfig {
    double list_multiplier = 32.0;  // m = multiplier · min_list_size(3, d); pilot-calibrated at d = 20
    std::size_t min_list = 64;
    double rho = 0.9;
    double mu = 0.0;               // <= 0: 1/d
    double cos_alpha = 0.347606;
    double cos_alpha_prime = 0.427124;
    int max_iterations = 400;
    int patience = 3;
    int max_dim = 40;
    double initial_radius_factor = 1.0;  // R0 = factor · max row norm of the LLL basis
    unsigned workers = 1;
    bool timing = false;

    nlohmann::json to_json() const;
};

struct IterationStats {
    int iteration = 0;
    double R_in = 0.0, R_out = 0.0;
    std::size_t list_in = 0;
    std::size_t emitted = 0;
    std::size_t kept_old = 0;
    std::size_t list_out = 0;
    std::uint64_t pairs_in_band = 0;
    std::uint64_t triples_in_band = 0;
    std::size_t bucket_max = 0;
    double bucket_mean = 0.0;
    bool shortfall = false;
    double best_norm = 0.0;
    double shortest_emitted = 0.0;  // 0 when nothing was emitted
    double wall_ms = 0.0;

    nlohmann::json to_json(bool timing) const;
};

struct SieveState {
    double R = 0.0;
    std::vector<LatticeVector> vectors;  // coefficients w.r.t. the working (reduced) basis
    int iteration = 0;
    std::vector<IterationStats> history;
    LatticeVector best;
    bool best_from_sieve = false;
};

// One 3-sieve step over the two-level code structure.
SieveState sieve_iteration(const SieveState& state, const LatticeBasis& B, const SieveParams& params,
                           const SvpConfig& cfg, Rng& rng);

struct SvpResult {
    LatticeVector vector;  // coefficients w.r.t. the input basis
    bool incomplete = false;
    std::uint64_t lll_swaps = 0;
    std::size_t list_size = 0;
    double initial_radius = 0.0;
    std::string best_source;  // "lll", "sample", "sieve" or "enumeration"
    double sieve_shortest = 0.0;  // shortest vector the sieve itself emitted; 0 if none
    SieveParams params;
    std::vector<IterationStats> trace;

    nlohmann::json to_json(bool timing) const;
};

SvpResult solve_svp(const LatticeBasis& B, const SvpConfig& cfg, Rng& rng);

}  // namespace trisieve
