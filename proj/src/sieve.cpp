#include "trisieve/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "trisieve/errors.hpp"

namespace trisieve {

ListSize min_list_size(int k, int d) {
    if (k < 2) throw InvalidArgument("min_list_size needs k >= 2");
    const double kk = static_cast<double>(k);
    const double base = std::pow(kk, kk / (kk - 1.0)) / (kk + 1.0);
    const double e = 0.5 * std::log2(base);
    return {std::exp2(e * d), e};
}

void SieveParams::validate() const {
    if (d < 4) throw InvalidDimension("sieve needs d >= 4");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (ell1 == 0 || ell2 == 0 || r1 == 0 || r2 == 0 || r3 == 0)
        throw ConfigError("ell1, ell2, r1, r2, r3 must be positive");
    for (double c : {cos_theta, cos_theta_prime, cos_alpha, cos_alpha_prime})
        if (!(c > 0.0 && c < 1.0)) throw ConfigError("sieve cosines must lie in (0,1)");
}

nlohmann::json SieveParams::to_json() const {
    return {{"d", d},         {"m", m},
            {"cos_theta", cos_theta}, {"cos_theta_prime", cos_theta_prime},
            {"cos_alpha", cos_alpha}, {"cos_alpha_prime", cos_alpha_prime},
            {"epsilon", epsilon}, {"ell1", ell1}, {"ell2", ell2},
            {"r1", r1}, {"r2", r2}, {"r3", r3}, {"mu", mu}};
}

std::pair<double, double> choose_theta(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.1)) throw DomainError("choose_theta needs epsilon in (0, 0.1)");
    return {1.0 / 3.0, epsilon + std::sqrt(1.0 / 3.0 - epsilon / 2.0)};
}

SieveParams make_sieve_params(int d, std::size_t m, double cos_alpha, double cos_alpha_prime) {
    SieveParams p;
    p.d = d;
    p.m = m;
    p.epsilon = epsilon_for(d);
    const auto th = choose_theta(p.epsilon);
    p.cos_theta = th.first;
    p.cos_theta_prime = th.second;
    p.cos_alpha = cos_alpha;
    p.cos_alpha_prime = cos_alpha_prime;
    p.mu = 1.0 / d;
    return p;
}

double default_truncation_cap(int d) {
    return std::exp2(static_cast<double>(d) / std::log2(static_cast<double>(d)));
}

UnitVector diff_unit(const UnitVector& x, const UnitVector& y) {
    std::vector<double> v(x.dim());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = x.coords[i] - y.coords[i];
    return UnitVector::normalize(std::move(v));
}

bool in_band(double v, double center, double eps) { return std::abs(v - center) <= eps; }

bool in_T_sol(const std::vector<UnitVector>& L, std::size_t x, std::size_t y, std::size_t z,
              const SieveParams& p) {
    if (x == y || x == z || y == z) return false;
    if (!in_band(dot(L[x], L[y]), p.cos_theta, p.epsilon)) return false;
    return in_band(dot(diff_unit(L[x], L[y]), L[z]), p.cos_theta_prime, p.epsilon);
}

namespace {
std::vector<std::uint64_t> flats(const RpcDescription& rpc, const std::vector<CodewordId>& ids) {
    std::vector<std::uint64_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(rpc.flat_index(id));
    return out;
}

std::optional<std::uint64_t> first_common(const std::vector<std::uint64_t>& a,
                                          const std::vector<std::uint64_t>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else return *i;
    }
    return std::nullopt;
}
}  // namespace

Preprocessed preprocess(const std::vector<UnitVector>& L, const RpcDescription& C,
                        const RpcDescription& Cp, const SieveParams& p) {
    Preprocessed out;
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (L[i].dim() != static_cast<std::size_t>(p.d)) throw InvalidDimension("list vector dimension");
        for (auto f : flats(C, decode(C, L[i], p.cos_alpha, p.epsilon))) out.D.insert(i, f);
        for (auto f : flats(Cp, decode(Cp, L[i], p.cos_alpha_prime, p.epsilon))) out.Dp.insert(i, f);
    }
    out.D.freeze();
    out.Dp.freeze();
    return out;
}

RCollision r_collision_sample(const RelationStore& D, std::size_t m, Rng& rng) {
    if (!D.frozen()) throw InvalidArgument("relation store must be frozen");
    if (m == 0) throw EmptySearch("empty list");
    RCollision out;
    out.x = rng.index(m);
    out.c = D.sample_bucket(out.x, Direction::ByX, rng);
    if (!out.c) return out;
    const auto y = D.sample_bucket(*out.c, Direction::ByC, rng);
    if (y) out.y = static_cast<std::size_t>(*y);
    return out;
}

SearchContext::SearchContext(const std::vector<UnitVector>& L_, const RpcDescription& C_,
                             const RpcDescription& Cp_, const Preprocessed& pre_, const SieveParams& p,
                             const SearchConfig& cfg_)
    : L(L_), C(C_), Cp(Cp_), pre(pre_), params(p), cfg(cfg_) {
    const std::size_t m = L.size();
    cap_ = cfg.truncation_cap > 0.0 ? cfg.truncation_cap : default_truncation_cap(p.d);
    const auto cap_n = static_cast<std::size_t>(std::floor(cap_));

    for (std::size_t x = 0; x < m; ++x) {
        const auto rx = pre.D.lookup_by_x(x);
        for (auto c : rx) {
            const auto bucket = pre.D.lookup_by_c(c);
            const double w = 1.0 / (static_cast<double>(m) * static_cast<double>(rx.size()) *
                                    static_cast<double>(bucket.size()));
            for (auto yy : bucket) {
                const auto y = static_cast<std::size_t>(yy);
                if (y == x) continue;
                if (!in_band(dot(L[x], L[y]), p.cos_theta, p.epsilon)) continue;
                m1_.push_back({x, c, y, w});
                pi_mass_ += w;
            }
        }
    }
    cumulative_.reserve(m1_.size());
    double acc = 0.0;
    for (const auto& t : m1_) cumulative_.push_back(acc += t.weight);

    for (const auto& [c, bucket] : pre.Dp.backward()) max_bucket_prime_ = std::max(max_bucket_prime_, bucket.size());

    for (const auto& t : m1_) {
        const auto key = std::make_pair(t.x, t.y);
        if (pairs_.count(key)) continue;
        PairInfo info{diff_unit(L[t.x], L[t.y]), {}, false, 0, {}};
        auto full = flats(Cp, decode(Cp, info.u, p.cos_alpha_prime, p.epsilon));
        info.rprime_full = full.size();
        if (full.size() > cap_n) {
            full.resize(cap_n);
            info.truncated = true;
            any_truncated_ = true;
        }
        info.rprime = std::move(full);
        for (auto cp : info.rprime) {
            std::vector<std::size_t> good;
            for (auto zz : pre.Dp.lookup_by_c(cp)) {
                const auto z = static_cast<std::size_t>(zz);
                if (z == t.x || z == t.y) continue;
                if (in_band(dot(info.u, L[z]), p.cos_theta_prime, p.epsilon)) good.push_back(z);
            }
            info.good_z.push_back(std::move(good));
        }
        pairs_.emplace(key, std::move(info));
    }

    if (pi_mass_ > 0.0) {
        for (const auto& t : m1_) {
            const PairInfo& info = pairs_.at({t.x, t.y});
            if (info.rprime.empty()) continue;
            std::size_t live = 0;
            for (const auto& g : info.good_z) live += g.empty() ? 0 : 1;
            pi_prime_mass_ += (t.weight / pi_mass_) * static_cast<double>(live) /
                              static_cast<double>(info.rprime.size());
        }
    }
    if (auto r = rounds_needed(pi_mass_, cfg.delta, cfg.eta)) r1_ = *r;
    if (max_bucket_prime_ > 0)
        if (auto r = rounds_needed(1.0 / static_cast<double>(max_bucket_prime_), cfg.delta, cfg.eta)) r2_ = *r;
    if (auto r = rounds_needed(std::min(1.0, pi_prime_mass_), cfg.delta, cfg.eta)) r3_ = *r;
    params.r1 = r1_;
    params.r2 = r2_;
    params.r3 = r3_;
}

const SearchContext::PairInfo& SearchContext::pair(std::size_t x, std::size_t y) const {
    auto it = pairs_.find({x, y});
    if (it == pairs_.end()) throw InvalidArgument("pair is not in M1(R)");
    return it->second;
}

TupleSample tuple_sample(const SearchContext& ctx, Rng& rng, QueryLedger& ledger) {
    if (ctx.m1_.empty()) throw EmptySearch("M1(R) is empty");
    const auto& p = ctx.params;
    const auto& k = ctx.cfg.costs;
    TupleSample out;

    // Step 1: amplitude amplification onto M1(R).
    const AaOutcome a1 = ideal_amplify({ctx.pi_mass_, k.S, k.C1}, ctx.r1_, ctx.cfg.delta, ctx.cfg.eta,
                                       ledger, rng, "tuple.step1");
    if (!a1.flag) throw EmptySearch("step 1 amplification failed");
    if (ctx.cfg.mode == Step1Mode::Enumerate) {
        const double u = rng.uniform() * ctx.cumulative_.back();
        auto it = std::upper_bound(ctx.cumulative_.begin(), ctx.cumulative_.end(), u);
        if (it == ctx.cumulative_.end()) --it;
        const auto& t = ctx.m1_[static_cast<std::size_t>(it - ctx.cumulative_.begin())];
        out.x = t.x;
        out.c = t.c;
        out.y = t.y;
    } else {
        for (;;) {
            const RCollision rc = r_collision_sample(ctx.pre.D, ctx.L.size(), rng);
            if (!rc.y) continue;
            if (!in_band(dot(ctx.L[rc.x], ctx.L[*rc.y]), p.cos_theta, p.epsilon)) continue;
            out.x = rc.x;
            out.c = *rc.c;
            out.y = *rc.y;
            break;
        }
    }

    // Step 2: a codeword of C' near (x - y)/||x - y||.
    ledger.charge_once("tuple.step2", k.S2);
    const auto& info = ctx.pair(out.x, out.y);
    out.truncated = info.truncated;
    std::size_t idx = 0;
    if (!info.rprime.empty()) {
        idx = rng.index(info.rprime.size());
        out.c_prime = info.rprime[idx];
    }

    // Step 3: amplitude amplification over the bucket of c'.
    double mass = 0.0;
    if (out.c_prime) {
        const auto bucket = ctx.pre.Dp.lookup_by_c(*out.c_prime);
        if (!bucket.empty())
            mass = static_cast<double>(info.good_z[idx].size()) / static_cast<double>(bucket.size());
    }
    const AaOutcome a3 = ideal_amplify({mass, k.S3, k.C3}, ctx.r2_, ctx.cfg.delta, ctx.cfg.eta, ledger,
                                       rng, "tuple.step3");
    if (!a3.flag) return out;
    if (a3.heuristic) throw EmptySearch("step 3 ran below threshold");
    if (ctx.cfg.mode == Step1Mode::Enumerate) {
        const auto& good = info.good_z[idx];
        out.z = good[rng.index(good.size())];
    } else {
        for (;;) {
            const auto z = static_cast<std::size_t>(
                *ctx.pre.Dp.sample_bucket(*out.c_prime, Direction::ByC, rng));
            if (z == out.x || z == out.y) continue;
            if (in_band(dot(info.u, ctx.L[z]), p.cos_theta_prime, p.epsilon)) {
                out.z = z;
                break;
            }
        }
    }
    out.flag = true;
    return out;
}

TripleSolution solution_search(const SearchContext& ctx, Rng& rng, QueryLedger& ledger) {
    if (!(ctx.pi_prime_mass() > 0.0)) throw NoSolution("T(R,R') is empty");
    QueryLedger inner;
    bool first = true;
    TupleSample t;
    for (;;) {
        QueryLedger scratch;
        t = tuple_sample(ctx, rng, scratch);
        if (first) {
            inner = scratch;
            first = false;
        }
        if (t.flag) break;
    }
    const AaOutcome a = ideal_amplify({ctx.pi_prime_mass(), inner.total_steps, ctx.cfg.costs.C}, ctx.r3(),
                                      ctx.cfg.delta, ctx.cfg.eta, ledger, rng, "solution_search");
    if (!a.flag) throw NoSolution("outer amplification failed");
    TripleSolution s;
    s.x_id = t.x;
    s.y_id = t.y;
    s.z_id = *t.z;
    s.inner_xy = dot(ctx.L[t.x], ctx.L[t.y]);
    s.inner_diff_z = dot(ctx.pair(t.x, t.y).u, ctx.L[*t.z]);
    s.witness_c = ctx.C.from_flat(t.c);
    s.witness_c_prime = ctx.Cp.from_flat(*t.c_prime);
    return s;
}

std::map<TupleKey, double> tuple_distribution(const SearchContext& ctx) {
    std::map<TupleKey, double> out;
    if (!(ctx.pi_mass() > 0.0)) return out;
    for (const auto& t : ctx.m1()) {
        const auto& info = ctx.pair(t.x, t.y);
        if (info.rprime.empty()) continue;
        const double base = t.weight / ctx.pi_mass() / static_cast<double>(info.rprime.size());
        for (std::size_t k = 0; k < info.rprime.size(); ++k) {
            const auto& good = info.good_z[k];
            for (auto z : good)
                out[{t.x, t.c, t.y, info.rprime[k], z}] += base / static_cast<double>(good.size());
        }
    }
    return out;
}

std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> solution_distribution(
    const SearchContext& ctx) {
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> out;
    const double norm = ctx.pi_prime_mass();
    if (!(norm > 0.0)) return out;
    for (const auto& [k, p] : tuple_distribution(ctx)) out[{k.x, k.y, k.z}] += p / norm;
    return out;
}

double symbolic_search_cost(const CostModel& c, std::uint64_t r1, std::uint64_t r2, std::uint64_t r3) {
    const double t_tuple = static_cast<double>(r1) * (c.S + c.C1) + c.S2 + static_cast<double>(r2) * (c.S3 + c.C3);
    return static_cast<double>(r3) * (t_tuple + c.C);
}

std::vector<TripleSolution> enumerate_T_sol(const std::vector<UnitVector>& L, const SieveParams& p,
                                            std::size_t max_m) {
    if (L.size() > max_m) throw SizeGuard("list too large for exhaustive enumeration");
    std::vector<TripleSolution> out;
    const std::size_t m = L.size();
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y) {
            if (x == y) continue;
            const double ip = dot(L[x], L[y]);
            if (!in_band(ip, p.cos_theta, p.epsilon)) continue;
            const UnitVector u = diff_unit(L[x], L[y]);
            for (std::size_t z = 0; z < m; ++z) {
                if (z == x || z == y) continue;
                const double iz = dot(u, L[z]);
                if (!in_band(iz, p.cos_theta_prime, p.epsilon)) continue;
                out.push_back({x, y, z, ip, iz, std::nullopt, std::nullopt});
            }
        }
    return out;
}

TRRResult enumerate_T_RRprime(const std::vector<UnitVector>& L, const RpcDescription& C,
                              const RpcDescription& Cp, const SieveParams& p, double cap,
                              std::size_t max_m) {
    TRRResult res;
    const auto sol = enumerate_T_sol(L, p, max_m);
    res.T_sol_size = sol.size();
    if (cap <= 0.0) cap = default_truncation_cap(p.d);
    std::vector<std::vector<std::uint64_t>> rx(L.size()), rz(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) {
        rx[i] = flats(C, decode(C, L[i], p.cos_alpha, p.epsilon));
        rz[i] = flats(Cp, decode(Cp, L[i], p.cos_alpha_prime, p.epsilon));
    }
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::uint64_t>> ru;
    for (const auto& t : sol) {
        const auto wc = first_common(rx[t.x_id], rx[t.y_id]);
        if (!wc) continue;
        auto key = std::make_pair(t.x_id, t.y_id);
        auto it = ru.find(key);
        if (it == ru.end())
            it = ru.emplace(key, flats(Cp, decode(Cp, diff_unit(L[t.x_id], L[t.y_id]), p.cos_alpha_prime,
                                                  p.epsilon))).first;
        const auto wcp = first_common(it->second, rz[t.z_id]);
        if (!wcp) continue;
        TripleSolution s = t;
        s.witness_c = C.from_flat(*wc);
        s.witness_c_prime = Cp.from_flat(*wcp);
        res.T.push_back(std::move(s));
        res.in_T_star.push_back(static_cast<double>(rx[t.x_id].size()) <= cap &&
                                static_cast<double>(it->second.size()) <= cap);
    }
    return res;
}

std::uint64_t ell1_from_shape(const SieveParams& p, double multiplier) {
    const double e = (cap_exponent(p.cos_alpha) -
                      wedge_exponent({p.cos_alpha, p.cos_alpha, p.cos_theta, 0.0})) +
                     (cap_exponent(p.cos_alpha_prime) -
                      wedge_exponent({p.cos_alpha_prime, p.cos_alpha_prime, p.cos_theta_prime, 0.0}));
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(multiplier * std::exp2(e * p.d))));
}

ThreeListResult three_list(const std::vector<UnitVector>& L, const SieveParams& p_in,
                           const ThreeListConfig& cfg, const Rng& rng) {
    SieveParams p = p_in;
    ThreeListResult res;
    const int b = cfg.b > 0 ? cfg.b : default_block_count(p.d);
    auto code_size = [&](double ca) {
        const double prob = cfg.code_size_from_band ? band_probability(p.d, ca, p.epsilon)
                                                    : std::exp2(p.d * cap_exponent(ca));
        return std::max(1.0, 1.0 / prob);
    };
    const double M = code_size(p.cos_alpha), Mp = code_size(p.cos_alpha_prime);
    res.ell1 = p.ell1 = ell1_from_shape(p, cfg.ell1_multiplier);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    const Rng iters = rng.sub("three_list");
    for (std::uint64_t i = 0; i < res.ell1; ++i) {
        const Rng it_rng = iters.sub(i);
        const RpcDescription C = sample_rpc({p.d, b, M, cfg.t_rotations, false}, it_rng.sub("C").seed());
        const RpcDescription Cp = sample_rpc({p.d, b, Mp, cfg.t_rotations, false}, it_rng.sub("Cp").seed());
        const Preprocessed pre = preprocess(L, C, Cp, p);
        const SearchContext ctx(L, C, Cp, pre, p, cfg.search);
        ThreeListIteration st;
        st.realized_M = C.realized_M();
        st.realized_M_prime = Cp.realized_M();
        st.m1_size = ctx.m1().size();
        if (!(ctx.pi_prime_mass() > 0.0)) {
            st.skipped = true;
            res.iterations.push_back(st);
            continue;
        }
        st.T_size = solution_distribution(ctx).size();
        st.ell2 = static_cast<std::uint64_t>(
            std::max(1.0, std::ceil(cfg.ell2_multiplier * static_cast<double>(st.T_size))));
        Rng s_rng = it_rng.sub("search");
        for (std::uint64_t j = 0; j < st.ell2; ++j) {
            const TripleSolution s = solution_search(ctx, s_rng, res.ledger);
            if (!in_T_sol(L, s.x_id, s.y_id, s.z_id, p)) continue;
            if (seen.insert(s.key()).second) {
                res.triples.push_back(s);
                ++st.new_triples;
            }
        }
        res.iterations.push_back(st);
    }
    return res;
}

std::vector<UnitVector> random_list(int d, std::size_t m, Rng& rng) {
    std::vector<UnitVector> L;
    L.reserve(m);
    for (std::size_t i = 0; i < m; ++i) L.push_back(sample_unit_vector(d, rng));
    return L;
}

}  // namespace trisieve
