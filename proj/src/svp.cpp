#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "trisieve/errors.hpp"
#include "trisieve/lattice.hpp"
#include "trisieve/rpc.hpp"

namespace trisieve {

nlohmann::json SvpConfig::to_json() const {
    return {{"list_multiplier", list_multiplier},
            {"min_list", min_list},
            {"rho", rho},
            {"mu", mu},
            {"cos_alpha", cos_alpha},
            {"cos_alpha_prime", cos_alpha_prime},
            {"max_iterations", max_iterations},
            {"patience", patience},
            {"max_dim", max_dim},
            {"initial_radius_factor", initial_radius_factor},
            {"workers", workers}};
}

nlohmann::json IterationStats::to_json(bool timing) const {
    nlohmann::json j = {{"iteration", iteration},     {"R_in", R_in},
                        {"R_out", R_out},             {"list_in", list_in},
                        {"emitted", emitted},         {"kept_old", kept_old},
                        {"list_out", list_out},       {"pairs_in_band", pairs_in_band},
                        {"triples_in_band", triples_in_band}, {"bucket_max", bucket_max},
                        {"bucket_mean", bucket_mean}, {"shortfall", shortfall},
                        {"best_norm", best_norm}, {"shortest_emitted", shortest_emitted}};
    if (timing) j["wall_ms"] = wall_ms;
    return j;
}

nlohmann::json SvpResult::to_json(bool timing) const {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& t : trace) tr.push_back(t.to_json(timing));
    return {{"norm", vector.norm},
            {"norm_sq", squared_norm(vector.vec)},
            {"coeffs", vector.coeffs},
            {"vector", vector.vec},
            {"incomplete", incomplete},
            {"lll_swaps", lll_swaps},
            {"list_size", list_size},
            {"initial_radius", initial_radius},
            {"best_source", best_source},
            {"sieve_shortest", sieve_shortest},
            {"params", params.to_json()},
            {"trace", tr}};
}

namespace {
IntVec canonical(IntVec v) {
    for (auto x : v) {
        if (x == 0) continue;
        if (x < 0)
            for (auto& y : v) y = -y;
        break;
    }
    return v;
}

struct Signed {
    std::size_t i;
    int s;
};

IntVec signed_copy(IntVec v, int s) {
    if (s < 0)
        for (auto& x : v) x = -x;
    return v;
}

UnitVector unit_of(const IntVec& v) {
    return UnitVector::normalize(std::vector<double>(v.begin(), v.end()));
}

double code_size(int d, double ca, double eps) { return std::max(1.0, 1.0 / band_probability(d, ca, eps)); }
}  // namespace

SieveState sieve_iteration(const SieveState& state, const LatticeBasis& B, const SieveParams& p,
                           const SvpConfig& cfg, Rng& rng) {
    const auto t0 = std::chrono::steady_clock::now();
    const int d = p.d;
    const double eps = p.epsilon;
    const double mu = p.mu > 0.0 ? p.mu : 1.0 / d;
    const auto& list = state.vectors;
    const std::size_t n = list.size();
    if (n < 3) throw EmptySearch("sieve list needs at least 3 vectors");

    SieveState next;
    next.iteration = state.iteration + 1;
    next.history = state.history;
    next.best = state.best;
    next.best_from_sieve = state.best_from_sieve;
    next.R = (1.0 - mu) * state.R;
    IterationStats st;
    st.iteration = next.iteration;
    st.R_in = state.R;
    st.R_out = next.R;
    st.list_in = n;

    const int b = default_block_count(d);
    const RpcDescription C = sample_rpc({d, b, code_size(d, p.cos_alpha, eps), 1, false}, rng.next_u64());
    const RpcDescription Cp = sample_rpc({d, b, code_size(d, p.cos_alpha_prime, eps), 1, false}, rng.next_u64());

    std::vector<UnitVector> units;
    units.reserve(n);
    for (const auto& v : list) units.push_back(unit_of(v.vec));
    // Both signs go into the buckets so that x ± y ± z are all reachable.
    std::vector<std::vector<Signed>> bucket(C.total_codewords()), bucket_p(Cp.total_codewords());
    for (std::size_t i = 0; i < n; ++i)
        for (int s : {1, -1}) {
            UnitVector u = units[i];
            if (s < 0)
                for (auto& x : u.coords) x = -x;
            for (const auto& id : decode(C, u, p.cos_alpha, eps)) bucket[C.flat_index(id)].push_back({i, s});
            for (const auto& id : decode(Cp, u, p.cos_alpha_prime, eps)) bucket_p[Cp.flat_index(id)].push_back({i, s});
        }
    std::size_t filled = 0, total = 0;
    for (const auto& bk : bucket) {
        st.bucket_max = std::max(st.bucket_max, bk.size());
        total += bk.size();
        filled += bk.empty() ? 0 : 1;
    }
    st.bucket_mean = filled ? static_cast<double>(total) / static_cast<double>(filled) : 0.0;

    struct Chunk {
        std::vector<LatticeVector> out;
        std::uint64_t pairs = 0, triples = 0;
    };
    std::vector<Chunk> chunks(bucket.size());
    parallel_chunks(bucket.size(), cfg.workers, [&](std::size_t ci) {
        Chunk& ch = chunks[ci];
        const auto& bk = bucket[ci];
        for (const auto& a : bk)
            for (const auto& bb : bk) {
                if (a.i == bb.i) continue;
                const double ip = a.s * bb.s * dot(units[a.i], units[bb.i]);
                if (!in_band(ip, p.cos_theta, eps)) continue;
                ++ch.pairs;
                std::vector<double> diff(d);
                for (int k = 0; k < d; ++k) diff[k] = a.s * units[a.i].coords[k] - bb.s * units[bb.i].coords[k];
                const UnitVector u = UnitVector::normalize(std::move(diff));
                const IntVec xy_coeffs = add_scaled(signed_copy(list[a.i].coeffs, a.s), list[bb.i].coeffs, -bb.s);
                const IntVec xy_vec = add_scaled(signed_copy(list[a.i].vec, a.s), list[bb.i].vec, -bb.s);
                std::set<std::pair<std::size_t, int>> zs;
                for (const auto& id : decode(Cp, u, p.cos_alpha_prime, eps))
                    for (const auto& z : bucket_p[Cp.flat_index(id)]) {
                        if (z.i == a.i || z.i == bb.i) continue;
                        if (!zs.insert({z.i, z.s}).second) continue;
                        if (!in_band(z.s * dot(u, units[z.i]), p.cos_theta_prime, eps)) continue;
                        ++ch.triples;
                        LatticeVector cand;
                        cand.vec = add_scaled(xy_vec, list[z.i].vec, -z.s);
                        const std::int64_t sq = squared_norm(cand.vec);
                        if (sq == 0) continue;
                        cand.norm = std::sqrt(static_cast<double>(sq));
                        if (cand.norm > next.R) continue;
                        cand.coeffs = add_scaled(xy_coeffs, list[z.i].coeffs, -z.s);
                        ch.out.push_back(std::move(cand));
                    }
            }
    });

    std::map<IntVec, LatticeVector> emitted;
    for (auto& ch : chunks) {
        st.pairs_in_band += ch.pairs;
        st.triples_in_band += ch.triples;
        for (auto& c : ch.out) {
            IntVec key = canonical(c.vec);
            if (key != c.vec) {
                for (auto& x : c.vec) x = -x;
                for (auto& x : c.coeffs) x = -x;
            }
            emitted.emplace(std::move(key), std::move(c));
        }
    }
    std::vector<LatticeVector> fresh;
    for (auto& [k, v] : emitted) fresh.push_back(std::move(v));
    auto by_norm = [](const LatticeVector& a, const LatticeVector& b) {
        return a.norm != b.norm ? a.norm < b.norm : a.vec < b.vec;
    };
    std::sort(fresh.begin(), fresh.end(), by_norm);
    st.emitted = fresh.size();
    if (!fresh.empty()) st.shortest_emitted = fresh.front().norm;
    st.shortfall = fresh.size() < p.m;
    if (!fresh.empty() && (next.best.vec.empty() || fresh.front().norm < next.best.norm)) {
        next.best = fresh.front();
        next.best_from_sieve = true;
    }
    if (fresh.size() > p.m) fresh.resize(p.m);

    // Old vectors already inside the new radius keep the list at size m.
    if (fresh.size() < p.m) {
        std::set<IntVec> have;
        for (const auto& v : fresh) have.insert(canonical(v.vec));
        std::vector<LatticeVector> old;
        for (const auto& v : list)
            if (v.norm <= next.R && !have.count(canonical(v.vec))) old.push_back(v);
        std::sort(old.begin(), old.end(), by_norm);
        for (auto& v : old) {
            if (fresh.size() >= p.m) break;
            fresh.push_back(std::move(v));
            ++st.kept_old;
        }
    }
    next.vectors = std::move(fresh);
    st.list_out = next.vectors.size();
    st.best_norm = next.best.norm;
    (void)B;
    st.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    next.history.push_back(st);
    return next;
}

SvpResult solve_svp(const LatticeBasis& B, const SvpConfig& cfg, Rng& rng) {
    B.validate();
    const int d = B.dim();
    if (d > cfg.max_dim) throw SizeGuard("dimension exceeds configured maximum");
    SvpResult res;
    const LllResult red = lll_reduce(B, 0.99);
    res.lll_swaps = red.swaps;

    auto to_input = [&](const LatticeVector& v) {
        IntVec coeffs(d, 0);
        for (int i = 0; i < d; ++i)
            if (v.coeffs[i] != 0) coeffs = add_scaled(coeffs, red.U[i], v.coeffs[i]);
        return LatticeVector::from_coeffs(B, coeffs);
    };

    LatticeVector best;
    for (int i = 0; i < d; ++i) {
        IntVec e(d, 0);
        e[i] = 1;
        LatticeVector v = LatticeVector::from_coeffs(red.basis, e);
        if (best.vec.empty() || v.norm < best.norm) best = v;
    }
    res.best_source = "lll";
    if (d < 4) {
        // Too small for the sieve parameters; LLL already reaches λ1 for d <= 2
        // and the enumeration is cheap otherwise.
        const Lambda1 l = enumerate_lambda1(B, d);
        res.vector = l.witness;
        if (l.lambda1 < best.norm) res.best_source = "enumeration";
        return res;
    }

    const std::size_t m = std::max<std::size_t>(
        cfg.min_list, static_cast<std::size_t>(std::ceil(cfg.list_multiplier * min_list_size(3, d).value)));
    SieveParams p = make_sieve_params(d, m, cfg.cos_alpha, cfg.cos_alpha_prime);
    if (cfg.mu > 0.0) p.mu = cfg.mu;
    res.list_size = m;

    double max_row = 0.0;
    for (const auto& r : red.basis.rows) max_row = std::max(max_row, std::sqrt(static_cast<double>(squared_norm(r))));
    double R = cfg.initial_radius_factor * max_row;
    Rng sample_rng = rng.sub("annulus");
    AnnulusSample smp;
    for (int attempt = 0;; ++attempt) {
        try {
            smp = sample_annulus_vectors(red.basis, m, cfg.rho, R, sample_rng);
            break;
        } catch (const SamplerFailure&) {
            if (attempt >= 20) throw;
            R *= 1.25;
        }
    }
    res.initial_radius = R;
    SieveState state;
    state.R = R;
    state.vectors = std::move(smp.vectors);
    state.best = best;
    for (const auto& v : state.vectors)
        if (v.norm < state.best.norm) {
            state.best = v;
            res.best_source = "sample";
        }

    Rng sieve_rng = rng.sub("sieve");
    int stale = 0;
    bool budget_hit = true;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const double before = state.best.norm;
        state = sieve_iteration(state, red.basis, p, cfg, sieve_rng);
        const auto& h = state.history.back();
        stale = (state.best.norm < before || h.emitted > 0) ? 0 : stale + 1;
        if (state.vectors.size() < 3 || stale >= cfg.patience) {
            budget_hit = false;
            break;
        }
    }
    res.incomplete = budget_hit;
    if (state.best_from_sieve) res.best_source = "sieve";
    res.vector = to_input(state.best);
    res.params = p;
    res.trace = std::move(state.history);
    for (const auto& h : res.trace)
        if (h.shortest_emitted > 0.0 && (res.sieve_shortest == 0.0 || h.shortest_emitted < res.sieve_shortest))
            res.sieve_shortest = h.shortest_emitted;
    return res;
}

}  // namespace trisieve
