#include "trisieve/goodness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "trisieve/errors.hpp"
#include "trisieve/rng.hpp"

namespace trisieve {

nlohmann::json GoodnessReport::to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : conditions)
        cs.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"expected", c.expected},
                      {"deviation", std::isfinite(c.deviation) ? nlohmann::json(c.deviation) : nlohmann::json()},
                      {"pass", c.pass}});
    return {{"good", good}, {"conditions", cs}, {"m1", m1}, {"m1_star", m1_star},
            {"t", t}, {"t_star", t_star}, {"max_z_count", max_z_count}};
}

namespace {
std::vector<std::uint64_t> decode_flat(const RpcDescription& rpc, const UnitVector& x, double ca,
                                       double eps) {
    std::vector<std::uint64_t> out;
    for (const auto& id : decode(rpc, x, ca, eps)) out.push_back(rpc.flat_index(id));
    return out;
}

bool intersects(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else return true;
    }
    return false;
}

double deviation(double measured, double expected, int d) {
    if (measured <= 0.0 || expected <= 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(std::log2(measured / expected)) / d;
}

struct Partial {
    std::size_t m1 = 0, m1_star = 0, t = 0, t_star = 0, max_z = 0;
};
}  // namespace

GoodnessReport goodness_check(const std::vector<UnitVector>& L, const RpcDescription& C,
                              const RpcDescription& Cp, const SieveParams& p, double slack,
                              unsigned workers) {
    if (!(slack >= 0.0)) throw InvalidArgument("slack must be nonnegative");
    const std::size_t m = L.size();
    const int d = p.d;
    const double eps = p.epsilon;
    const double cap = default_truncation_cap(d);

    std::vector<std::vector<std::uint64_t>> rx(m), rz(m);
    std::vector<std::size_t> bucket(C.total_codewords(), 0);
    std::vector<std::vector<std::size_t>> bucket_p(Cp.total_codewords());
    for (std::size_t i = 0; i < m; ++i) {
        rx[i] = decode_flat(C, L[i], p.cos_alpha, eps);
        rz[i] = decode_flat(Cp, L[i], p.cos_alpha_prime, eps);
        for (auto c : rx[i]) ++bucket[c];
        for (auto c : rz[i]) bucket_p[c].push_back(i);
    }

    // Pair loop: M1, T and the z-count of (ii), chunked over x.
    std::vector<Partial> parts(m);
    parallel_chunks(m, workers, [&](std::size_t x) {
        Partial& pt = parts[x];
        std::vector<char> mark(m, 0);
        std::vector<std::size_t> touched;
        for (std::size_t y = 0; y < m; ++y) {
            if (y == x) continue;
            const bool pair_band = in_band(dot(L[x], L[y]), p.cos_theta, eps);
            const bool collide = pair_band && intersects(rx[x], rx[y]);
            const UnitVector u = diff_unit(L[x], L[y]);
            const auto ru = decode_flat(Cp, u, p.cos_alpha_prime, eps);
            std::size_t zc = 0, tc = 0;
            touched.clear();
            for (auto c : ru)
                for (auto z : bucket_p[c]) {
                    if (mark[z]) continue;
                    mark[z] = 1;
                    touched.push_back(z);
                    if (!in_band(dot(u, L[z]), p.cos_theta_prime, eps)) continue;
                    ++zc;
                    if (collide && z != x && z != y) ++tc;
                }
            for (auto z : touched) mark[z] = 0;
            pt.max_z = std::max(pt.max_z, zc);
            if (!collide) continue;
            const bool star_x = static_cast<double>(rx[x].size()) <= cap;
            ++pt.m1;
            if (star_x) ++pt.m1_star;
            pt.t += tc;
            if (star_x && static_cast<double>(ru.size()) <= cap) pt.t_star += tc;
        }
    });
    GoodnessReport rep;
    for (const auto& pt : parts) {
        rep.m1 += pt.m1;
        rep.m1_star += pt.m1_star;
        rep.t += pt.t;
        rep.t_star += pt.t_star;
        rep.max_z_count = std::max(rep.max_z_count, pt.max_z);
    }

    const double md = static_cast<double>(m);
    // A band that spans [-1, 1] holds every inner product.
    auto spans = [&](double c) { return c - eps <= -1.0 && c + eps >= 1.0; };
    auto band = [&](double c) { return spans(c) ? 1.0 : band_probability(d, c, eps); };
    auto wedge = [&](double a, double b, double t) {
        if (spans(a) && spans(b) && spans(t)) return 1.0;
        return wedge_band_probability(d, {a, b, t, eps});
    };
    const double pa = band(p.cos_alpha);
    const double pap = band(p.cos_alpha_prime);
    const double pt = band(p.cos_theta);
    const double ptp = band(p.cos_theta_prime);
    const double w_aa_t = wedge(p.cos_alpha, p.cos_alpha, p.cos_theta);
    const double w_apap_tp = wedge(p.cos_alpha_prime, p.cos_alpha_prime, p.cos_theta_prime);
    const double w_tp_ap = wedge(p.cos_theta_prime, p.cos_alpha_prime, p.cos_alpha_prime);
    const double nC = static_cast<double>(C.total_codewords());
    const double nCp = static_cast<double>(Cp.total_codewords());
    const double lim = std::exp2(slack * d);

    // (i) every bucket of C and C'
    {
        GoodnessCondition c{"i", 0.0, md * pa, 0.0, true};
        double worst = 0.0, worst_count = 0.0;
        auto check = [&](double count, double expect) {
            const double dev = deviation(count, expect, d);
            if (dev >= worst) {
                worst = dev;
                worst_count = count;
                c.expected = expect;
            }
        };
        for (auto n : bucket) check(static_cast<double>(n), md * pa);
        for (const auto& b : bucket_p) check(static_cast<double>(b.size()), md * pap);
        c.measured = worst_count;
        c.deviation = worst;
        c.pass = worst <= slack;
        rep.conditions.push_back(c);
    }
    // (ii) upper bound on the z-count
    {
        const double expect = std::max(1.0, md * nCp * pap * w_tp_ap);
        GoodnessCondition c{"ii", static_cast<double>(rep.max_z_count), expect, 0.0, false};
        c.deviation = rep.max_z_count == 0 ? 0.0 : std::max(0.0, std::log2(c.measured / expect) / d);
        c.pass = c.measured <= expect * lim;
        rep.conditions.push_back(c);
    }
    // (iii) |M1| and |M1*|
    {
        const double expect = md * (md - 1.0) * pt * std::min(1.0, nC * w_aa_t);
        GoodnessCondition c{"iii", static_cast<double>(rep.m1), expect, 0.0, false};
        c.deviation = std::max(deviation(static_cast<double>(rep.m1), expect, d),
                               deviation(static_cast<double>(rep.m1_star), expect, d));
        c.pass = c.deviation <= slack;
        rep.conditions.push_back(c);
    }
    // (iv) |T| and |T*|
    {
        const double expect = md * (md - 1.0) * (md - 2.0) * pt * ptp * std::min(1.0, nC * w_aa_t) *
                              std::min(1.0, nCp * w_apap_tp);
        GoodnessCondition c{"iv", static_cast<double>(rep.t), expect, 0.0, false};
        c.deviation = std::max(deviation(static_cast<double>(rep.t), expect, d),
                               deviation(static_cast<double>(rep.t_star), expect, d));
        c.pass = c.deviation <= slack;
        rep.conditions.push_back(c);
    }
    rep.good = std::all_of(rep.conditions.begin(), rep.conditions.end(), [](const auto& c) { return c.pass; });
    return rep;
}

}  // namespace trisieve
