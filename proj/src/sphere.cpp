#include "trisieve/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "trisieve/errors.hpp"

namespace trisieve {

namespace {
constexpr std::uint64_t kChunk = 1u << 16;

std::vector<double> gaussian_vector(int d, Rng& rng) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (auto& x : v) x = rng.normal();
    return v;
}

// Count of samples in [begin, end) passing pred, one sub-stream per chunk.
template <class Pred>
std::uint64_t chunked_count(std::uint64_t n, const Rng& rng, unsigned workers, Pred pred) {
    const std::size_t n_chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
    std::vector<std::uint64_t> hits(n_chunks, 0);
    parallel_chunks(n_chunks, workers, [&](std::size_t k) {
        Rng local = rng.sub(static_cast<std::uint64_t>(k));
        const std::uint64_t len = std::min<std::uint64_t>(kChunk, n - k * kChunk);
        std::uint64_t h = 0;
        for (std::uint64_t i = 0; i < len; ++i) h += pred(local) ? 1 : 0;
        hits[k] = h;
    });
    return std::accumulate(hits.begin(), hits.end(), std::uint64_t{0});
}

double log_norm_const(int d) {
    // 1 / B(1/2, (d-1)/2)
    return std::lgamma(0.5 * d) - std::lgamma(0.5) - std::lgamma(0.5 * (d - 1));
}
}  // namespace

UnitVector UnitVector::normalize(std::vector<double> v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero vector");
    for (auto& x : v) x /= n;
    return UnitVector{std::move(v)};
}

UnitVector UnitVector::checked(std::vector<double> v) {
    if (std::abs(norm(v) - 1.0) > kNormTol) throw DomainError("vector is not unit norm");
    return UnitVector{std::move(v)};
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double epsilon_for(int d) {
    if (d < 4) throw InvalidDimension("epsilon_for needs d >= 4");
    const double l = std::log2(static_cast<double>(d));
    return 1.0 / (l * l);
}

UnitVector sample_unit_vector(int d, Rng& rng) {
    if (d < 1) throw InvalidDimension("dimension must be positive");
    for (;;) {
        auto v = gaussian_vector(d, rng);
        const double n = norm(v);
        if (n > 1e-300) {
            for (auto& x : v) x /= n;
            return UnitVector{std::move(v)};
        }
    }
}

void AngleSpec::validate() const {
    auto open01 = [](double c) { return c > 0.0 && c < 1.0; };
    if (!open01(cos_alpha) || !open01(cos_beta))
        throw DomainError("cap cosines must lie in (0,1)");
    if (!(cos_theta >= 0.0 && cos_theta <= 1.0)) throw DomainError("cos_theta must lie in [0,1]");
    if (cos_theta == 1.0 && !equal_angles())
        throw DegenerateGeometry("theta = 0 with distinct cap angles");
    if (epsilon < 0.0) throw DomainError("epsilon must be nonnegative");
    if (epsilon > 0.0 && epsilon >= std::min(cos_alpha, 1.0 - cos_alpha))
        throw DomainError("epsilon too large for cos_alpha");
}

double cap_exponent(double cos_alpha) {
    if (cos_alpha >= 1.0 || cos_alpha <= -1.0) throw DomainError("cap cosine must be < 1");
    return 0.5 * std::log2(1.0 - cos_alpha * cos_alpha);
}

double wedge_gamma_sq(const AngleSpec& s) {
    const double ca = s.cos_alpha, cb = s.cos_beta, ct = s.cos_theta;
    if (s.equal_angles()) return 2.0 * ca * ca / (1.0 + ct);
    if (ct >= 1.0) throw DegenerateGeometry("theta = 0 with distinct cap angles");
    return (ca * ca + cb * cb - 2.0 * ca * cb * ct) / (1.0 - ct * ct);
}

double wedge_exponent(const AngleSpec& s) {
    const double g2 = wedge_gamma_sq(s);
    if (!(g2 > 0.0 && g2 < 1.0)) throw NotWellDefined("gamma^2 outside (0,1)");
    return 0.5 * std::log2(1.0 - g2);
}

bool is_well_defined(const AngleSpec& s, double kappa_prime) {
    const double ca = s.cos_alpha, ct = s.cos_theta;
    if (s.equal_angles() && 2.0 * ca * ca / (1.0 + ct) <= 1.0 - kappa_prime) return true;
    if (ct >= 1.0) return false;
    const double g2 = (ca * ca + s.cos_beta * s.cos_beta - 2.0 * ca * s.cos_beta * ct) /
                      (1.0 - ct * ct);
    return kappa_prime <= g2 && g2 <= 1.0 - kappa_prime;
}

Estimate mc_cap_probability(int d, double cos_alpha, double epsilon, std::uint64_t n_samples,
                            const Rng& rng, unsigned workers) {
    if (n_samples < 10000) throw InvalidArgument("mc_cap_probability needs >= 1e4 samples");
    Rng fix = rng.sub("fixed-point");
    const UnitVector x = sample_unit_vector(d, fix);
    const Rng draws = rng.sub("draws");
    const std::uint64_t hits = chunked_count(n_samples, draws, workers, [&](Rng& r) {
        const UnitVector c = sample_unit_vector(d, r);
        return std::abs(dot(x, c) - cos_alpha) <= epsilon;
    });
    return make_estimate(hits, n_samples);
}

std::pair<UnitVector, UnitVector> pair_at_separation(int d, double cos_theta, Rng& rng) {
    UnitVector x = sample_unit_vector(d, rng);
    std::vector<double> w = sample_unit_vector(d, rng).coords;
    const double p = dot(w, x.coords);
    for (int i = 0; i < d; ++i) w[i] -= p * x.coords[i];
    const UnitVector wu = UnitVector::normalize(std::move(w));
    const double st = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    std::vector<double> y(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) y[i] = cos_theta * x.coords[i] + st * wu.coords[i];
    return {std::move(x), UnitVector::normalize(std::move(y))};
}

Estimate mc_wedge_probability(int d, const AngleSpec& spec, std::uint64_t n_samples,
                              const Rng& rng, unsigned workers) {
    spec.validate();
    if (n_samples < 10000) throw InvalidArgument("mc_wedge_probability needs >= 1e4 samples");
    Rng fix = rng.sub("fixed-pair");
    const auto [x, y] = pair_at_separation(d, spec.cos_theta, fix);
    const Rng draws = rng.sub("draws");
    const std::uint64_t hits = chunked_count(n_samples, draws, workers, [&](Rng& r) {
        const UnitVector c = sample_unit_vector(d, r);
        return std::abs(dot(x, c) - spec.cos_alpha) <= spec.epsilon &&
               std::abs(dot(y, c) - spec.cos_beta) <= spec.epsilon;
    });
    return make_estimate(hits, n_samples);
}

double marginal_density(int d, double t) {
    if (d < 2) throw InvalidDimension("marginal density needs d >= 2");
    if (t <= -1.0 || t >= 1.0) return 0.0;
    return std::exp(log_norm_const(d) + 0.5 * (d - 3) * std::log1p(-t * t));
}

double marginal_cdf(int d, double t) {
    if (d < 2) throw InvalidDimension("marginal cdf needs d >= 2");
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double ib = boost::math::ibeta(0.5, 0.5 * (d - 1), t * t);
    return t >= 0.0 ? 0.5 + 0.5 * ib : 0.5 - 0.5 * ib;
}

double band_probability(int d, double center, double eps) {
    const double lo = std::max(-1.0, center - eps), hi = std::min(1.0, center + eps);
    if (!(hi > lo)) return 0.0;
    auto f = [d](double t) { return marginal_density(d, t); };
    if (d >= 3) {
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
    }
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, lo, hi);
}

double band_probability_closed(int d, double center, double eps) {
    const double lo = std::max(-1.0, center - eps), hi = std::min(1.0, center + eps);
    if (!(hi > lo)) return 0.0;
    return marginal_cdf(d, hi) - marginal_cdf(d, lo);
}

double wedge_band_probability(int d, const AngleSpec& spec) {
    spec.validate();
    if (d < 3) throw InvalidDimension("wedge band quadrature needs d >= 3");
    const double a = spec.cos_alpha, b = spec.cos_beta, ct = spec.cos_theta, e = spec.epsilon;
    if (ct >= 1.0) {
        const double lo = std::max(a - e, b - e), hi = std::min(a + e, b + e);
        return hi > lo ? band_probability(d, 0.5 * (lo + hi), 0.5 * (hi - lo)) : 0.0;
    }
    const double st = std::sqrt(1.0 - ct * ct);
    // c = s x + t w + rest; given s, t / sqrt(1 - s^2) has the (d-1)-dim marginal.
    auto inner = [&](double s) {
        const double r = std::sqrt(std::max(0.0, 1.0 - s * s)) * st;
        if (r <= 0.0) return 0.0;
        const double ulo = (b - e - ct * s) / r, uhi = (b + e - ct * s) / r;
        const double p = marginal_cdf(d - 1, uhi) - marginal_cdf(d - 1, ulo);
        return marginal_density(d, s) * std::max(0.0, p);
    };
    const double lo = std::max(-1.0, a - e), hi = std::min(1.0, a + e);
    if (!(hi > lo)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(inner, lo, hi, 15, 1e-12);
}

}  // namespace trisieve
