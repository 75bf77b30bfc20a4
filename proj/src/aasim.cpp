#include "trisieve/aasim.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "trisieve/errors.hpp"

namespace trisieve {

void QueryLedger::charge(const std::string& label, std::uint64_t r, double S, double C) {
    const double steps = static_cast<double>(r) * (S + C);
    samp_calls += r;
    check_calls += r;
    total_steps += steps;
    entries.push_back({label, r, S, C, steps});
}

void QueryLedger::charge_once(const std::string& label, double cost) {
    samp_calls += 1;
    total_steps += cost;
    entries.push_back({label, 1, cost, 0.0, cost});
}

void QueryLedger::merge(const QueryLedger& o) {
    samp_calls += o.samp_calls;
    check_calls += o.check_calls;
    total_steps += o.total_steps;
    entries.insert(entries.end(), o.entries.begin(), o.entries.end());
}

nlohmann::json QueryLedger::to_json() const {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& e : entries)
        levels.push_back({{"label", e.label}, {"r", e.r}, {"S", e.S}, {"C", e.C}, {"steps", e.steps}});
    return {{"samp_calls", samp_calls}, {"check_calls", check_calls}, {"total_steps", total_steps},
            {"levels", levels}};
}

std::optional<std::uint64_t> rounds_needed(double good_mass, double delta, double eta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
    if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
    if (!(good_mass >= 0.0 && good_mass <= 1.0)) throw InvalidArgument("good mass outside [0,1]");
    if (good_mass == 0.0) return std::nullopt;
    const double r = std::ceil(eta * std::log2(1.0 / delta) / std::sqrt(good_mass));
    return static_cast<std::uint64_t>(std::max(1.0, r));
}

AaOutcome ideal_amplify(const AmplifiableState& s, std::uint64_t r, double delta, double eta,
                        QueryLedger& ledger, Rng& rng, const std::string& label) {
    if (r < 1) throw InvalidArgument("ideal_amplify needs r >= 1");
    ledger.charge(label, r, s.sampler_cost, s.checker_cost);
    AaOutcome out;
    out.r = r;
    const auto need = rounds_needed(s.good_mass, delta, eta);
    if (!need) return out;
    if (r >= *need) {
        out.flag = true;
        return out;
    }
    out.heuristic = true;
    out.flag = rng.bernoulli(std::min(1.0, static_cast<double>(r) * static_cast<double>(r) * s.good_mass));
    return out;
}

namespace {
// Target infidelity of the schedule: fidelity >= 1 - delta/2, i.e.
// success probability >= (1 - delta/2)^2 = 1 - dy^2.
double schedule_delta(double delta) {
    const double h = 0.5 * delta;
    return std::sqrt(2.0 * h - h * h);
}
}  // namespace

std::uint64_t guaranteed_rounds(double good_mass, double delta) {
    if (!(good_mass > 0.0 && good_mass <= 1.0)) throw InvalidArgument("good mass outside (0,1]");
    if (good_mass == 1.0) return 1;
    const double dy = schedule_delta(delta);
    const double L = std::acosh(1.0 / dy) / std::acosh(1.0 / std::sqrt(1.0 - good_mass));
    const double l = std::ceil((L - 1.0) / 2.0);
    return static_cast<std::uint64_t>(std::max(1.0, l));
}

double numeric_fixed_point_aa(double good_mass, std::uint64_t r, double delta) {
    if (!(good_mass > 0.0 && good_mass <= 1.0)) throw InvalidArgument("good mass outside (0,1]");
    if (r < 1) throw InvalidArgument("numeric_fixed_point_aa needs r >= 1");
    using cd = std::complex<double>;
    const double pi = std::numbers::pi;
    const auto l = static_cast<double>(r);
    const double L = 2.0 * l + 1.0;
    const double dy = schedule_delta(delta);
    const double gamma = 1.0 / std::cosh(std::acosh(1.0 / dy) / L);
    const double sg = std::sqrt(std::max(0.0, 1.0 - gamma * gamma));

    // Basis {|t>, |t_perp>}; start |s> = sqrt(λ)|t> + sqrt(1-λ)|t_perp>.
    const double a0 = std::sqrt(good_mass), a1 = std::sqrt(1.0 - good_mass);
    cd p0 = a0, p1 = a1;
    auto phase_angle = [&](double j) { return 2.0 * std::atan(1.0 / (std::tan(2.0 * pi * j / L) * sg)); };
    for (std::uint64_t j = 1; j <= r; ++j) {
        const double alpha = phase_angle(static_cast<double>(j));
        const double beta = -phase_angle(l - static_cast<double>(j) + 1.0);
        // S_t(β) = I - (1 - e^{iβ})|t><t|
        p0 *= std::exp(cd(0.0, beta));
        // S_s(α) = I - (1 - e^{-iα})|s><s|
        const cd overlap = a0 * p0 + a1 * p1;
        const cd k = (1.0 - std::exp(cd(0.0, -alpha))) * overlap;
        p0 = -(p0 - k * a0);
        p1 = -(p1 - k * a1);
    }
    return std::abs(p0);
}

EtaCalibration calibrate_eta(const std::vector<double>& masses, const std::vector<double>& deltas) {
    EtaCalibration c;
    for (double m : masses)
        for (double d : deltas) {
            const double need = static_cast<double>(guaranteed_rounds(m, d)) * std::sqrt(m) /
                                std::log2(1.0 / d);
            if (need > c.eta) c = {need, m, d};
        }
    return c;
}

}  // namespace trisieve
