#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trisieve/rng.hpp"
#include "trisieve/stats.hpp"

namespace trisieve {

inline constexpr double kNormTol = 1e-12;

struct UnitVector {
    std::vector<double> coords;

    std::size_t dim() const { return coords.size(); }

    // Normalizes v; throws DomainError on the zero vector.
    static UnitVector normalize(std::vector<double> v);
    // Requires ||v|| = 1 within kNormTol.
    static UnitVector checked(std::vector<double> v);
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
inline double dot(const UnitVector& a, const UnitVector& b) { return dot(a.coords, b.coords); }

double epsilon_for(int d);

UnitVector sample_unit_vector(int d, Rng& rng);

struct AngleSpec {
    double cos_alpha = 0.5;
    double cos_beta = 0.5;
    double cos_theta = 0.0;
    double epsilon = 0.0;

    // cos_theta = 1 is admitted for the equal-angle degenerate path only.
    void validate() const;
    bool equal_angles() const { return cos_alpha == cos_beta; }
};

double cap_exponent(double cos_alpha);
double wedge_gamma_sq(const AngleSpec& spec);
double wedge_exponent(const AngleSpec& spec);
bool is_well_defined(const AngleSpec& spec, double kappa_prime);

// Monte Carlo band frequencies. Work is split into fixed-size chunks seeded
// from rng.sub(chunk), so results are identical for any worker count.
Estimate mc_cap_probability(int d, double cos_alpha, double epsilon, std::uint64_t n_samples,
                            const Rng& rng, unsigned workers = 1);
Estimate mc_wedge_probability(int d, const AngleSpec& spec, std::uint64_t n_samples,
                              const Rng& rng, unsigned workers = 1);

// Marginal of <x, c> for c uniform on S^{d-1}: density ∝ (1 - t^2)^{(d-3)/2}.
double marginal_density(int d, double t);
double marginal_cdf(int d, double t);  // incomplete-beta closed form

// Pr[|<x,c> - center| <= eps] by adaptive quadrature of the marginal density.
double band_probability(int d, double center, double eps);
// Same quantity through the closed-form CDF.
double band_probability_closed(int d, double center, double eps);
// Pr over c of both bands, x and y at separation cos_theta (d >= 3).
double wedge_band_probability(int d, const AngleSpec& spec);

// Pair (x, y) with <x, y> = cos_theta exactly, embedded along two random axes.
std::pair<UnitVector, UnitVector> pair_at_separation(int d, double cos_theta, Rng& rng);

}  // namespace trisieve
