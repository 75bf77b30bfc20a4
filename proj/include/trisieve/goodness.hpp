#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "trisieve/rpc.hpp"
#include "trisieve/sieve.hpp"
#include "trisieve/sphere.hpp"

namespace trisieve {

// Per-dimension log2 tolerance for the goodness conditions. Set from a pilot
// at d = 16, m = 512 (see README).
inline constexpr double kGoodnessSlack = 0.15;

struct GoodnessCondition {
    std::string name;
    double measured = 0.0;   // worst-case count for (i)/(ii), total count for (iii)/(iv)
    double expected = 0.0;
    double deviation = 0.0;  // worst |log2(measured/expected)|/d over the checked quantities
    bool pass = false;
};

struct GoodnessReport {
    std::vector<GoodnessCondition> conditions;  // (i), (ii), (iii), (iv)
    bool good = false;
    std::size_t m1 = 0, m1_star = 0;
    std::size_t t = 0, t_star = 0;
    std::size_t max_z_count = 0;

    nlohmann::json to_json() const;
};

// Expected counts use quadrature band probabilities and the realized code
// sizes; every condition is two-sided except (ii), which is an upper bound.
GoodnessReport goodness_check(const std::vector<UnitVector>& L, const RpcDescription& C,
                              const RpcDescription& Cp, const SieveParams& p,
                              double slack = kGoodnessSlack, unsigned workers = 1);

}  // namespace trisieve
