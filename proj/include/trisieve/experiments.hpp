#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "trisieve/exponents.hpp"
#include "trisieve/lattice.hpp"
#include "trisieve/sieve.hpp"

// Experiment drivers shared by the CLI and the acceptance binary. Each
// returns a JSON report with a top-level "pass" field.
namespace trisieve {

struct GateReport {
    bool pass = false;
    nlohmann::json report;
};

GateReport run_exponents(double m_exp, const SearchBox& box, double tol);

struct GeometryConfig {
    std::vector<int> dims{16, 20, 24};
    std::uint64_t samples = 1000000;
    std::vector<double> caps{0.3, 0.347606, 0.427124, 0.5};
    // (cos α, cos β, cos θ)
    std::vector<std::array<double, 3>> wedges{{0.347606, 0.347606, 1.0 / 3.0},
                                              {0.427124, 0.427124, 0.5773502691896258},
                                              {0.45, 0.45, 1.0 / 3.0}};
    double slack = 0.04;
    bool zero_band_rows = true;
};

GateReport geometry_verify(const GeometryConfig& cfg, const Rng& rng, unsigned workers);

struct RpcVerifyConfig {
    int decode_instances = 100;
    int collision_d = 20;
    double collision_cos_alpha = 0.45;
    double collision_cos_theta = 1.0 / 3.0;
    double collision_M = 0.0;  // <= 0: the whole b-th power nearest M·W_d = 1/2
    std::uint64_t collision_draws = 400;
    double slack = 0.05;
};

GateReport rpc_decode_check(int instances, const Rng& rng);
GateReport rpc_collision_check(const RpcVerifyConfig& cfg, const Rng& rng, unsigned workers);

struct EmulateConfig {
    int d = 12;
    std::size_t m = 128;
    double cos_alpha = 0.347606;
    double cos_alpha_prime = 0.427124;
    std::uint64_t draws = 100000;
    Step1Mode mode = Step1Mode::Enumerate;
    double delta = kDefaultDelta;
    double eta = kDefaultEta;
    bool chi_square = true;
};

// Closed-form chi-square checks of TupleSamp and SolutionSearch plus the
// soundness check against T(R, R').
GateReport sieve_distribution_check(const EmulateConfig& cfg, const Rng& rng);

// Ledger total against r3(r1(S+C1) + S2 + r2(S3+C3) + C) on random settings.
GateReport ledger_identity_check(int parameterizations, const Rng& rng);

struct ThreeListExperiment {
    int d = 14;
    double m_multiplier = 8.0;  // >= 2^{1.5}; at the minimum, |T_sol| barely reaches m/4
    ThreeListConfig list;
    int runs = 10;
};
GateReport three_list_check(const ThreeListExperiment& cfg, const Rng& rng);

struct AaDemoConfig {
    std::vector<double> masses{1.0, 0.5, 0.25, 1.0 / 64.0};
    double delta = 1e-3;
    double eta = kDefaultEta;
    int max_multiple = 8;  // fidelity is checked for r, r+1, ..., max_multiple·r
};
GateReport aa_contract_check(const AaDemoConfig& cfg, const Rng& rng);

struct ConcentrationConfig {
    int d = 14;
    std::size_t m = 400;
    int seeds = 50;
    double slack = 0.04;
    double max_rsd = 0.5;
};
GateReport concentration_check(const ConcentrationConfig& cfg, const Rng& rng, unsigned workers);

struct SvpBatchConfig {
    int d = 20;
    int bits = 10;
    int instances = 20;
    double ratio = 1.05;
    double min_success = 0.9;
    SvpConfig svp;
};
GateReport svp_batch_check(const SvpBatchConfig& cfg, const Rng& rng);

}  // namespace trisieve
