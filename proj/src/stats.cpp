#include "trisieve/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "trisieve/errors.hpp"

namespace trisieve {

Interval wilson_interval(std::uint64_t hits, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double ph = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (ph + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Estimate make_estimate(std::uint64_t hits, std::uint64_t n, double z) {
    Estimate e;
    e.hits = hits;
    e.n = n;
    e.p = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    e.ci = wilson_interval(hits, n, z);
    e.zero_hits = hits == 0;
    if (e.zero_hits) e.ci.lo = 0.0;
    return e;
}

bool binomial_consistent(const Estimate& e, double p, double z) {
    if (e.n == 0) return true;
    const double se = std::sqrt(std::max(p * (1.0 - p), 1e-300) / static_cast<double>(e.n));
    // One extra count of slack keeps p = 0 or 1 from being unmatchable.
    return std::abs(e.p - p) <= z * se + 1.0 / static_cast<double>(e.n);
}

double binomial_two_sided_p(std::uint64_t hits, std::uint64_t n, double p) {
    boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
    const double k = static_cast<double>(hits);
    const double lo = boost::math::cdf(dist, k);
    const double hi = hits == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, k - 1.0));
    return std::min(1.0, 2.0 * std::min(lo, hi));
}

ChiSquareResult chi_square_test(const std::vector<std::uint64_t>& observed,
                                const std::vector<double>& probs, double min_expected) {
    if (observed.size() != probs.size()) throw InvalidArgument("chi-square: size mismatch");
    const double n = static_cast<double>(
        std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
    const double total_p = std::accumulate(probs.begin(), probs.end(), 0.0);
    ChiSquareResult r;
    double pooled_obs = 0.0, pooled_exp = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = n * probs[i] / total_p;
        const double o = static_cast<double>(observed[i]);
        if (e < min_expected) {
            pooled_obs += o;
            pooled_exp += e;
            ++r.pooled_from;
            continue;
        }
        r.statistic += (o - e) * (o - e) / e;
        ++r.cells;
    }
    if (r.pooled_from > 0) {
        if (pooled_exp > 0.0) {
            r.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
            ++r.cells;
        } else if (pooled_obs > 0.0) {
            r.statistic = INFINITY;
        }
    }
    if (r.cells < 2) {
        r.dof = 0;
        r.p_value = std::isfinite(r.statistic) ? 1.0 : 0.0;
        return r;
    }
    r.dof = r.cells - 1;
    if (!std::isfinite(r.statistic)) {
        r.p_value = 0.0;
        return r;
    }
    boost::math::chi_squared_distribution<double> dist(static_cast<double>(r.dof));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    KsResult r;
    if (samples.empty()) return r;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    r.statistic = d;
    // Asymptotic Kolmogorov tail with the Stephens small-sample correction.
    const double sn = std::sqrt(n);
    const double lam = (sn + 0.12 + 0.11 / sn) * d;
    if (lam < 1e-3) {
        r.p_value = 1.0;
        return r;
    }
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lam * lam);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    r.p_value = std::clamp(2.0 * sum, 0.0, 1.0);
    return r;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace trisieve
