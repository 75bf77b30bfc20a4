#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "trisieve/rng.hpp"

namespace trisieve {

struct AmplifiableState {
    double good_mass = 0.0;      // ||Π ψ||^2
    double sampler_cost = 0.0;   // S
    double checker_cost = 0.0;   // C
};

struct LedgerEntry {
    std::string label;
    std::uint64_t r = 0;
    double S = 0.0;
    double C = 0.0;
    double steps = 0.0;
};

struct QueryLedger {
    std::uint64_t samp_calls = 0;
    std::uint64_t check_calls = 0;
    double total_steps = 0.0;
    std::vector<LedgerEntry> entries;

    void charge(const std::string& label, std::uint64_t r, double S, double C);
    // One plain (non-amplified) call costing `cost`.
    void charge_once(const std::string& label, double cost);
    void merge(const QueryLedger& other);
    nlohmann::json to_json() const;
};

inline constexpr double kDefaultDelta = 0x1p-64;
inline constexpr double kDefaultEta = 2.0;

// ⌈eta·log2(1/delta)/sqrt(good_mass)⌉; nullopt when good_mass = 0.
std::optional<std::uint64_t> rounds_needed(double good_mass, double delta, double eta);

struct AaOutcome {
    bool flag = false;
    bool heuristic = false;  // sub-threshold coin, not the ideal contract
    std::uint64_t r = 0;
};

// Idealized fixed-point AA: the caller realizes the conditioned state when
// flag = 1. Charges r·(S + C) to the ledger.
AaOutcome ideal_amplify(const AmplifiableState& state, std::uint64_t r, double delta, double eta,
                        QueryLedger& ledger, Rng& rng, const std::string& label = "aa");

// Exact 2-D simulation of a fixed-point schedule with r iterations (2r+1
// queries), tuned for fidelity >= 1 - delta/2 once r is past threshold.
double numeric_fixed_point_aa(double good_mass, std::uint64_t r, double delta);

// Smallest r for which the schedule's fixed-point guarantee covers good_mass.
std::uint64_t guaranteed_rounds(double good_mass, double delta);

struct EtaCalibration {
    double eta = 0.0;
    double worst_mass = 0.0;
    double worst_delta = 0.0;
};

// Max over the grid of guaranteed_rounds·sqrt(mass)/log2(1/delta).
EtaCalibration calibrate_eta(const std::vector<double>& masses, const std::vector<double>& deltas);

}  // namespace trisieve
