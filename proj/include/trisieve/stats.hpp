#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace trisieve {

// z for a two-sided 1e-4 test; used as the default "joint CI" width.
inline constexpr double kZ4 = 3.890591886413095;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return lo <= v && v <= hi; }
};

struct Estimate {
    std::uint64_t hits = 0;
    std::uint64_t n = 0;
    double p = 0.0;
    Interval ci;
    bool zero_hits = false;
};

Interval wilson_interval(std::uint64_t hits, std::uint64_t n, double z = kZ4);
Estimate make_estimate(std::uint64_t hits, std::uint64_t n, double z = kZ4);

// |p_hat - p| within z standard errors of a binomial(n, p).
bool binomial_consistent(const Estimate& e, double p, double z = kZ4);

double binomial_two_sided_p(std::uint64_t hits, std::uint64_t n, double p);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
    std::size_t cells = 0;         // after pooling
    std::size_t pooled_from = 0;   // cells merged into the tail bin
};

// Cells with expected count < min_expected are pooled into one bin.
ChiSquareResult chi_square_test(const std::vector<std::uint64_t>& observed,
                                const std::vector<double>& probs,
                                double min_expected = 5.0);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

double mean(const std::vector<double>& v);
double stddev(const std::vector<double>& v);  // sample sd

}  // namespace trisieve
