#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

namespace trisieve {

inline constexpr double kMemoryExponent3 = 0.188722;
inline constexpr double kWellDefinedKappa = 1e-6;

// Per-dimension log2 exponents of the search cost model. θ = arccos(1/3),
// θ' = arccos(1/sqrt 3).
struct ExponentPoint {
    double cos_alpha = 0.0;
    double cos_alpha_prime = 0.0;
    double m_exp = 0.0;
    double e_p_alpha = 0.0;
    double e_p_alpha_prime = 0.0;
    double e_W_theta_alpha = 0.0;          // W(θ, α | α)
    double e_W_thetaP_alphaP = 0.0;        // W(θ', α' | α')
    double e_W_alpha_alpha_theta = 0.0;    // W(α, α | θ)
    double e_W_alphaP_alphaP_thetaP = 0.0; // W(α', α' | θ')
    double e_mW = 0.0;                     // m + W(θ', α' | α')
    double e_ell1 = 0.0;
    double e_search = 0.0;
    double e_total = 0.0;
    std::array<double, 4> constraint_margins{};  // m+pα, m+pα', m+W(θ,α|α), 2m+W(θ',α'|α')
    bool feasible = false;
    std::string infeasible_reason;

    nlohmann::json to_json() const;
};

ExponentPoint time_exponent(double cos_alpha, double cos_alpha_prime, double m_exp);

struct SearchBox {
    double a_lo = 0.01, a_hi = 0.99;
    double ap_lo = 0.01, ap_hi = 0.99;
};

struct OptimizeResult {
    double cos_alpha = 0.0;
    double cos_alpha_prime = 0.0;
    ExponentPoint point;
    bool boundary = false;
    // No-descent certificate: minimum one-sided slope over 8 directions.
    double min_directional_slope = 0.0;
    bool certified = false;
    std::array<double, 2> central_differences{};
    double balance_gap = 0.0;  // |e_ell1 - e_search|
    std::size_t grid_points = 0;
    std::size_t feasible_grid_points = 0;
    std::size_t simplex_iterations = 0;
    std::vector<std::array<double, 3>> trace;  // (cos α, cos α', e_total) per restart

    nlohmann::json to_json() const;
};

// Grid (step 1e-3) then Nelder–Mead restarts; `tolerance` bounds the final
// simplex size. Throws InfeasibleBox when no grid point is feasible.
OptimizeResult optimize(double m_exp, const SearchBox& box, double tolerance = 1e-10);

struct Table1Row {
    int k = 0;
    double memory_exponent = 0.0;
    double classical_time = 0.0;  // literature value
    double quantum_time = 0.0;    // literature value
    double new_quantum_time = 0.0;  // this artifact, k = 3 only (0 otherwise)
};

std::vector<Table1Row> table1_report(double new_quantum_time);
nlohmann::json table1_json(const std::vector<Table1Row>& rows);

}  // namespace trisieve
