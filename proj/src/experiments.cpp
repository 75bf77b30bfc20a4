#include "trisieve/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "trisieve/aasim.hpp"
#include "trisieve/errors.hpp"
#include "trisieve/rpc.hpp"
#include "trisieve/sphere.hpp"
#include "trisieve/stats.hpp"

namespace trisieve {

namespace {
nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

double per_dim_gap(double p_hat, double exponent, int d) {
    if (!(p_hat > 0.0)) return INFINITY;
    return std::abs(std::log2(p_hat) / d - exponent);
}

nlohmann::json estimate_json(const Estimate& e) {
    return {{"hits", e.hits}, {"n", e.n}, {"p", e.p}, {"ci", {e.ci.lo, e.ci.hi}}, {"zero_hits", e.zero_hits}};
}
}  // namespace

GateReport run_exponents(double m_exp, const SearchBox& box, double tol) {
    const OptimizeResult opt = optimize(m_exp, box, tol);
    GateReport g;
    g.pass = opt.point.feasible && (opt.certified || opt.boundary);
    g.report = {{"m_exp", m_exp},
                {"box", {box.a_lo, box.a_hi, box.ap_lo, box.ap_hi}},
                {"tol", tol},
                {"optimum", opt.to_json()},
                {"table1", table1_json(table1_report(opt.point.e_total))},
                {"pass", g.pass}};
    return g;
}

GateReport geometry_verify(const GeometryConfig& cfg, const Rng& rng, unsigned workers) {
    GateReport g;
    g.pass = true;
    nlohmann::json rows = nlohmann::json::array();
    const Rng base = rng.sub("geometry");
    for (int d : cfg.dims) {
        const double eps = epsilon_for(d);
        for (std::size_t i = 0; i < cfg.caps.size(); ++i) {
            const double ca = cfg.caps[i];
            const Estimate e = mc_cap_probability(d, ca, eps, cfg.samples,
                                                  base.sub("cap").sub(static_cast<std::uint64_t>(d) * 1000 + i), workers);
            const double quad = band_probability(d, ca, eps);
            const double expo = cap_exponent(ca);
            const double gap = per_dim_gap(e.p, expo, d);
            const bool ci_ok = e.ci.contains(quad);
            const bool slack_ok = gap <= cfg.slack;
            g.pass = g.pass && ci_ok && slack_ok;
            rows.push_back({{"kind", "cap"}, {"d", d}, {"cos_alpha", ca}, {"epsilon", eps},
                            {"estimate", estimate_json(e)}, {"quadrature", quad},
                            {"closed_form", band_probability_closed(d, ca, eps)},
                            {"exponent", expo}, {"per_dim_gap", num(gap)},
                            {"quadrature_in_ci", ci_ok}, {"within_slack", slack_ok}});
        }
        for (std::size_t i = 0; i < cfg.wedges.size(); ++i) {
            const auto& w = cfg.wedges[i];
            const AngleSpec spec{w[0], w[1], w[2], eps};
            const Estimate e = mc_wedge_probability(d, spec, cfg.samples,
                                                    base.sub("wedge").sub(static_cast<std::uint64_t>(d) * 1000 + i), workers);
            const double quad = wedge_band_probability(d, spec);
            const double expo = wedge_exponent(spec);
            const double gap = per_dim_gap(e.p, expo, d);
            const bool ci_ok = e.ci.contains(quad);
            const bool slack_ok = gap <= cfg.slack;
            g.pass = g.pass && ci_ok && slack_ok;
            rows.push_back({{"kind", "wedge"}, {"d", d}, {"cos_alpha", w[0]}, {"cos_beta", w[1]},
                            {"cos_theta", w[2]}, {"epsilon", eps}, {"estimate", estimate_json(e)},
                            {"quadrature", quad}, {"exponent", expo}, {"per_dim_gap", num(gap)},
                            {"quadrature_in_ci", ci_ok}, {"within_slack", slack_ok}});
        }
        if (cfg.zero_band_rows) {
            const Estimate e = mc_cap_probability(d, 0.5, 0.0, 10000, base.sub("zero").sub(d), workers);
            rows.push_back({{"kind", "cap"}, {"d", d}, {"cos_alpha", 0.5}, {"epsilon", 0.0},
                            {"estimate", estimate_json(e)}, {"zero_hits", e.zero_hits}});
        }
    }
    g.report = {{"slack", cfg.slack}, {"samples", cfg.samples}, {"rows", rows}, {"pass", g.pass}};
    return g;
}

GateReport rpc_decode_check(int instances, const Rng& rng) {
    GateReport g;
    std::size_t mismatches = 0, bound_violations = 0, total_survivors = 0;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < instances; ++i) {
        Rng r = rng.sub("decode").sub(static_cast<std::uint64_t>(i));
        const int b = std::array<int, 3>{1, 2, 4}[r.index(3)];
        const int max_k = 16 / b;
        const int k = 1 + static_cast<int>(r.index(static_cast<std::size_t>(max_k)));
        const int d = std::max(2, b * k);  // b = 1 when b k = 1
        const std::uint32_t kmax = b == 1 ? 4096 : b == 2 ? 64 : 8;
        const std::uint32_t K = 1 + static_cast<std::uint32_t>(r.index(kmax));
        const double M = std::pow(static_cast<double>(K), b);
        const int t = 1 + static_cast<int>(r.index(2));
        const double ca = 0.05 + 0.75 * r.uniform();
        const double eps = 0.01 + 0.19 * r.uniform();
        const RpcDescription rpc = sample_rpc({d, b, M, t, false}, r.next_u64());
        const UnitVector x = sample_unit_vector(d, r);
        DecodeStats stats;
        const auto fast = decode(rpc, x, ca, eps, &stats);
        const auto brute = decode_bruteforce(rpc, x, ca, eps);
        total_survivors += brute.size();
        const bool same = fast == brute;
        if (!same) ++mismatches;
        const auto prefixes = survivor_prefix_counts(brute, b);
        bool bound_ok = true;
        for (int lv = 0; lv < b; ++lv)
            if (stats.nodes_per_level[lv] > prefixes[lv] + static_cast<std::uint64_t>(t) * rpc.per_block)
                bound_ok = false;
        if (!bound_ok) ++bound_violations;
        rows.push_back({{"d", d}, {"b", b}, {"M", rpc.realized_M()}, {"t", t}, {"cos_alpha", ca},
                        {"epsilon", eps}, {"survivors", brute.size()}, {"set_equal", same},
                        {"nodes_per_level", stats.nodes_per_level}, {"prefix_counts", prefixes},
                        {"bound_ok", bound_ok}});
    }
    g.pass = mismatches == 0 && bound_violations == 0;
    g.report = {{"instances", instances}, {"mismatches", mismatches}, {"bound_violations", bound_violations},
                {"total_survivors", total_survivors}, {"rows", rows}, {"pass", g.pass}};
    return g;
}

GateReport rpc_collision_check(const RpcVerifyConfig& cfg, const Rng& rng, unsigned workers) {
    const int d = cfg.collision_d;
    const AngleSpec spec{cfg.collision_cos_alpha, cfg.collision_cos_alpha, cfg.collision_cos_theta, epsilon_for(d)};
    const double w = wedge_exponent(spec);
    const int b = default_block_count(d);
    // Derived M is a whole b-th power so the realized code keeps M·W near 1/2.
    const double per_block = std::max(1.0, std::round(std::pow(0.5 / std::exp2(d * w), 1.0 / b)));
    const double M = cfg.collision_M > 0.0 ? cfg.collision_M : std::pow(per_block, b);
    const CollisionEstimate ce = mc_collision_probability(d, b, M, spec, cfg.collision_draws, rng.sub("collision"), workers);
    const double gap = ce.estimate.p > 0.0 ? std::abs(std::log2(ce.estimate.p / ce.predicted)) / d : INFINITY;
    GateReport g;
    g.pass = gap <= cfg.slack;
    g.report = {{"d", d},
                {"b", b},
                {"M_nominal", M},
                {"M_realized", ce.realized_M},
                {"cos_alpha", spec.cos_alpha},
                {"cos_theta", spec.cos_theta},
                {"epsilon", spec.epsilon},
                {"draws", cfg.collision_draws},
                {"estimate", estimate_json(ce.estimate)},
                {"predicted", ce.predicted},
                {"predicted_band", ce.predicted_band},
                {"band_prediction_in_ci", ce.estimate.ci.contains(ce.predicted_band)},
                {"per_dim_gap", num(gap)},
                {"slack", cfg.slack},
                {"pass", g.pass}};
    return g;
}

namespace {
struct Instance {
    std::vector<UnitVector> L;
    RpcDescription C, Cp;
    Preprocessed pre;
    SieveParams p;
};

// A (L, C, C') draw with nonempty T(R, R'); C and C' are redrawn as needed.
std::unique_ptr<Instance> make_instance(int d, std::size_t m, double ca, double cap, const Rng& rng, int max_attempts = 200) {
    auto inst = std::make_unique<Instance>();
    Rng lr = rng.sub("list");
    inst->L = random_list(d, m, lr);
    inst->p = make_sieve_params(d, m, ca, cap);
    const int b = default_block_count(d);
    const double M = 1.0 / band_probability(d, ca, inst->p.epsilon);
    const double Mp = 1.0 / band_probability(d, cap, inst->p.epsilon);
    for (int a = 0; a < max_attempts; ++a) {
        const Rng ar = rng.sub("codes").sub(static_cast<std::uint64_t>(a));
        inst->C = sample_rpc({d, b, M, 1, false}, ar.sub("C").seed());
        inst->Cp = sample_rpc({d, b, Mp, 1, false}, ar.sub("Cp").seed());
        inst->pre = preprocess(inst->L, inst->C, inst->Cp, inst->p);
        const SearchContext ctx(inst->L, inst->C, inst->Cp, inst->pre, inst->p, SearchConfig{});
        if (ctx.pi_prime_mass() > 0.0) return inst;
    }
    throw NoSolution("no code draw with nonempty T(R,R')");
}

nlohmann::json chi_json(const ChiSquareResult& c) {
    return {{"statistic", num(c.statistic)}, {"dof", c.dof}, {"p_value", c.p_value},
            {"cells", c.cells}, {"pooled_from", c.pooled_from}};
}
}  // namespace

GateReport sieve_distribution_check(const EmulateConfig& cfg, const Rng& rng) {
    const auto inst = make_instance(cfg.d, cfg.m, cfg.cos_alpha, cfg.cos_alpha_prime, rng.sub("instance"));
    SearchConfig sc;
    sc.delta = cfg.delta;
    sc.eta = cfg.eta;
    sc.mode = cfg.mode;
    const SearchContext ctx(inst->L, inst->C, inst->Cp, inst->pre, inst->p, sc);

    const auto tdist = tuple_distribution(ctx);
    const auto sdist = solution_distribution(ctx);
    const TRRResult trr = enumerate_T_RRprime(inst->L, inst->C, inst->Cp, inst->p);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> T;
    for (const auto& t : trr.T) T.insert(t.key());

    GateReport g;
    nlohmann::json rep = {{"d", cfg.d},
                          {"m", cfg.m},
                          {"params", ctx.params.to_json()},
                          {"code_size", inst->C.total_codewords()},
                          {"code_size_prime", inst->Cp.total_codewords()},
                          {"relation_size", inst->pre.D.size()},
                          {"relation_size_prime", inst->pre.Dp.size()},
                          {"m1_size", ctx.m1().size()},
                          {"pi_mass", ctx.pi_mass()},
                          {"pi_prime_mass", ctx.pi_prime_mass()},
                          {"any_truncated", ctx.any_truncated()},
                          {"T_sol", trr.T_sol_size},
                          {"T_RR", trr.T.size()},
                          {"tuple_support", tdist.size()},
                          {"solution_support", sdist.size()},
                          {"mode", cfg.mode == Step1Mode::Enumerate ? "enumerate" : "reject"}};

    // TupleSamp, flagged outputs only.
    std::map<TupleKey, std::size_t> tidx;
    std::vector<double> tprob;
    for (const auto& [k, p] : tdist) {
        tidx.emplace(k, tprob.size());
        tprob.push_back(p);
    }
    std::vector<std::uint64_t> tobs(tprob.size(), 0);
    std::uint64_t flagged = 0, tries = 0, off_support = 0;
    Rng tr = rng.sub("tuple");
    while (flagged < cfg.draws && tries < 1000 * cfg.draws) {
        ++tries;
        QueryLedger led;
        const TupleSample s = tuple_sample(ctx, tr, led);
        if (!s.flag) continue;
        ++flagged;
        auto it = tidx.find({s.x, s.c, s.y, *s.c_prime, *s.z});
        if (it == tidx.end()) ++off_support;
        else ++tobs[it->second];
    }
    const ChiSquareResult tchi = chi_square_test(tobs, tprob);

    // SolutionSearch outputs.
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> sidx;
    std::vector<double> sprob;
    for (const auto& [k, p] : sdist) {
        sidx.emplace(k, sprob.size());
        sprob.push_back(p);
    }
    std::vector<std::uint64_t> sobs(sprob.size(), 0);
    std::uint64_t unsound = 0, s_off = 0, ledger_mismatch = 0, norm_violations = 0;
    const double symbolic = symbolic_search_cost(sc.costs, ctx.r1(), ctx.r2(), ctx.r3());
    Rng sr = rng.sub("solution");
    for (std::uint64_t i = 0; i < cfg.draws; ++i) {
        QueryLedger led;
        const TripleSolution s = solution_search(ctx, sr, led);
        if (!T.count(s.key()) || !in_T_sol(inst->L, s.x_id, s.y_id, s.z_id, inst->p)) ++unsound;
        if (led.total_steps != symbolic) ++ledger_mismatch;
        double n2 = 0.0;
        for (int k = 0; k < cfg.d; ++k) {
            const double v = inst->L[s.x_id].coords[k] - inst->L[s.y_id].coords[k] - inst->L[s.z_id].coords[k];
            n2 += v * v;
        }
        if (std::sqrt(n2) > 1.0 + 1e-10) ++norm_violations;
        auto it = sidx.find(s.key());
        if (it == sidx.end()) ++s_off;
        else ++sobs[it->second];
    }
    const ChiSquareResult schi = chi_square_test(sobs, sprob);

    const bool tuple_ok = tchi.p_value > 1e-4 && off_support == 0 && flagged == cfg.draws;
    const bool sol_ok = schi.p_value > 1e-4 && s_off == 0;
    g.pass = tuple_ok && sol_ok && unsound == 0;
    rep["tuple"] = {{"flagged", flagged}, {"tries", tries}, {"off_support", off_support},
                    {"chi_square", chi_json(tchi)}, {"pass", tuple_ok}};
    rep["solution"] = {{"draws", cfg.draws}, {"off_support", s_off}, {"unsound", unsound},
                       {"norm_violations", norm_violations}, {"ledger_mismatches", ledger_mismatch},
                       {"ledger_symbolic", symbolic}, {"chi_square", chi_json(schi)}, {"pass", sol_ok}};
    rep["pass"] = g.pass;
    g.report = std::move(rep);
    return g;
}

GateReport ledger_identity_check(int n, const Rng& rng) {
    GateReport g;
    g.pass = true;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
        Rng r = rng.sub("ledger").sub(static_cast<std::uint64_t>(i));
        const int d = r.bernoulli(0.5) ? 10 : 12;
        const std::size_t m = 64 + r.index(65);
        const auto inst = make_instance(d, m, 0.347606, 0.427124, r.sub("instance"));
        SearchConfig sc;
        auto cost = [&] { return static_cast<double>(1 + r.index(1000)); };
        sc.costs = {cost(), cost(), cost(), cost(), cost(), cost()};
        sc.delta = std::exp2(-static_cast<double>(10 + r.index(55)));
        sc.eta = 0.5 + 2.5 * r.uniform();
        const SearchContext ctx(inst->L, inst->C, inst->Cp, inst->pre, inst->p, sc);
        QueryLedger led;
        Rng sr = r.sub("search");
        solution_search(ctx, sr, led);
        const double symbolic = symbolic_search_cost(sc.costs, ctx.r1(), ctx.r2(), ctx.r3());
        const bool eq = led.total_steps == symbolic;
        g.pass = g.pass && eq;
        rows.push_back({{"d", d}, {"m", m},
                        {"costs", {sc.costs.S, sc.costs.C1, sc.costs.S2, sc.costs.S3, sc.costs.C3, sc.costs.C}},
                        {"delta_log2", std::log2(sc.delta)}, {"eta", sc.eta},
                        {"r1", ctx.r1()}, {"r2", ctx.r2()}, {"r3", ctx.r3()},
                        {"ledger_total", led.total_steps}, {"symbolic", symbolic}, {"equal", eq}});
    }
    g.report = {{"parameterizations", n}, {"rows", rows}, {"pass", g.pass}};
    return g;
}

GateReport three_list_check(const ThreeListExperiment& cfg, const Rng& rng) {
    const int d = cfg.d;
    if (cfg.m_multiplier < std::exp2(1.5) - 1e-12) throw InvalidArgument("three_list m multiplier below 2^1.5");
    const auto m = static_cast<std::size_t>(std::ceil(min_list_size(3, d).value * cfg.m_multiplier));
    const double target = static_cast<double>(m) / 4.0;
    int successes = 0;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < cfg.runs; ++i) {
        const Rng r = rng.sub("three_list").sub(static_cast<std::uint64_t>(i));
        Rng lr = r.sub("list");
        const auto L = random_list(d, m, lr);
        const SieveParams p = make_sieve_params(d, m, 0.347606, 0.427124);
        const ThreeListResult res = three_list(L, p, cfg.list, r.sub("algo"));
        const std::size_t tsol = enumerate_T_sol(L, p).size();
        const bool ok = static_cast<double>(res.triples.size()) >= target;
        successes += ok ? 1 : 0;
        std::size_t skipped = 0;
        for (const auto& it : res.iterations) skipped += it.skipped ? 1 : 0;
        rows.push_back({{"triples", res.triples.size()}, {"T_sol", tsol}, {"ell1", res.ell1},
                        {"skipped_iterations", skipped}, {"ledger_total", res.ledger.total_steps}, {"ok", ok}});
    }
    GateReport g;
    g.pass = 2 * successes >= cfg.runs;
    g.report = {{"d", d}, {"m", m}, {"target", target}, {"ell1_multiplier", cfg.list.ell1_multiplier},
                {"ell2_multiplier", cfg.list.ell2_multiplier}, {"runs", cfg.runs}, {"successes", successes},
                {"rows", rows}, {"pass", g.pass}};
    return g;
}

GateReport aa_contract_check(const AaDemoConfig& cfg, const Rng& rng) {
    GateReport g;
    g.pass = true;
    const double floor = 1.0 - cfg.delta;
    nlohmann::json rows = nlohmann::json::array();
    for (double mass : cfg.masses) {
        const std::uint64_t r = *rounds_needed(mass, cfg.delta, cfg.eta);
        const double f = numeric_fixed_point_aa(mass, r, cfg.delta);
        double worst = f;
        std::uint64_t worst_r = r;
        // Every r' in [r, max_multiple r], thinned to at most ~400 points.
        const std::uint64_t top = r * static_cast<std::uint64_t>(cfg.max_multiple);
        const std::uint64_t step = std::max<std::uint64_t>(1, (top - r) / 400);
        for (std::uint64_t rr = r; rr <= top; rr += step) {
            const double fr = numeric_fixed_point_aa(mass, rr, cfg.delta);
            if (fr < worst) {
                worst = fr;
                worst_r = rr;
            }
        }
        const bool ok = f >= floor && worst >= floor;
        g.pass = g.pass && ok;
        rows.push_back({{"good_mass", mass}, {"r", r}, {"fidelity", f}, {"min_fidelity_beyond", worst},
                        {"argmin_r", worst_r}, {"guaranteed_rounds", guaranteed_rounds(mass, cfg.delta)},
                        {"pass", ok}});
    }
    bool zero_ok = true;
    Rng zr = rng.sub("zero");
    for (std::uint64_t r : {1ULL, 10ULL, 100ULL, 1000ULL, 100000ULL}) {
        QueryLedger led;
        const AaOutcome o = ideal_amplify({0.0, 1.0, 1.0}, r, cfg.delta, cfg.eta, led, zr);
        zero_ok = zero_ok && !o.flag && led.total_steps == 2.0 * static_cast<double>(r);
    }
    g.pass = g.pass && zero_ok;
    const EtaCalibration cal = calibrate_eta({1.0, 0.5, 0.25, 1.0 / 64.0, 1e-3, 1e-4, 1e-6},
                                             {1e-3, 1e-6, 1e-9, 0x1p-64});
    g.report = {{"delta", cfg.delta}, {"eta", cfg.eta}, {"rows", rows}, {"zero_mass_flag_zero", zero_ok},
                {"eta_calibration", {{"eta", cal.eta}, {"worst_mass", cal.worst_mass}, {"worst_delta", cal.worst_delta}}},
                {"pass", g.pass}};
    return g;
}

namespace {
std::uint64_t count_T_sol(const std::vector<UnitVector>& L, const SieveParams& p) {
    const std::size_t m = L.size();
    std::uint64_t n = 0;
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y) {
            if (x == y || !in_band(dot(L[x], L[y]), p.cos_theta, p.epsilon)) continue;
            const UnitVector u = diff_unit(L[x], L[y]);
            for (std::size_t z = 0; z < m; ++z)
                if (z != x && z != y && in_band(dot(u, L[z]), p.cos_theta_prime, p.epsilon)) ++n;
        }
    return n;
}
}  // namespace

GateReport concentration_check(const ConcentrationConfig& cfg, const Rng& rng, unsigned workers) {
    const SieveParams p = make_sieve_params(cfg.d, cfg.m, 0.347606, 0.427124);
    std::vector<double> counts(static_cast<std::size_t>(cfg.seeds));
    parallel_chunks(counts.size(), workers, [&](std::size_t s) {
        Rng r = rng.sub("concentration").sub(s);
        counts[s] = static_cast<double>(count_T_sol(random_list(cfg.d, cfg.m, r), p));
    });
    const double md = static_cast<double>(cfg.m);
    const double pt = band_probability(cfg.d, p.cos_theta, p.epsilon);
    const double ptp = band_probability(cfg.d, p.cos_theta_prime, p.epsilon);
    const double expected = md * md * md * pt * ptp;
    const double mu = mean(counts), sd = stddev(counts);
    const double gap = mu > 0.0 ? std::abs(std::log2(mu / expected)) / cfg.d : INFINITY;
    const double rsd = mu > 0.0 ? sd / mu : INFINITY;
    GateReport g;
    g.pass = gap <= cfg.slack && rsd < cfg.max_rsd;
    g.report = {{"d", cfg.d}, {"m", cfg.m}, {"seeds", cfg.seeds}, {"epsilon", p.epsilon},
                {"p_theta", pt}, {"p_theta_prime", ptp}, {"expected", expected}, {"mean", mu},
                {"stddev", sd}, {"relative_sd", num(rsd)}, {"per_dim_gap", num(gap)},
                {"slack", cfg.slack}, {"max_rsd", cfg.max_rsd}, {"counts", counts}, {"pass", g.pass}};
    return g;
}

GateReport svp_batch_check(const SvpBatchConfig& cfg, const Rng& rng) {
    int successes = 0, sieve_successes = 0;
    bool exact_all = true, dominance = true;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < cfg.instances; ++i) {
        Rng br = rng.sub("basis").sub(static_cast<std::uint64_t>(i));
        const LatticeBasis B = random_basis(cfg.d, cfg.bits, br);
        const Lambda1 oracle = enumerate_lambda1(B);
        Rng sr = rng.sub("svp").sub(static_cast<std::uint64_t>(i));
        const SvpResult res = solve_svp(B, cfg.svp, sr);
        const IntVec recomputed = B.combine(res.vector.coeffs);
        const bool exact = recomputed == res.vector.vec && squared_norm(recomputed) > 0;
        const double ratio = res.vector.norm / oracle.lambda1;
        const bool ok = exact && ratio <= cfg.ratio;
        exact_all = exact_all && exact;
        if (squared_norm(recomputed) < squared_norm(oracle.witness.vec)) dominance = false;
        successes += ok ? 1 : 0;
        const bool sieve_ok = res.sieve_shortest > 0.0 && res.sieve_shortest <= cfg.ratio * oracle.lambda1;
        sieve_successes += sieve_ok ? 1 : 0;
        rows.push_back({{"lambda1", oracle.lambda1}, {"found", res.vector.norm}, {"ratio", ratio},
                        {"exact", exact}, {"best_source", res.best_source},
                        {"sieve_shortest", res.sieve_shortest}, {"sieve_ratio", res.sieve_shortest / oracle.lambda1},
                        {"iterations", res.trace.size()},
                        {"list_size", res.list_size}, {"incomplete", res.incomplete}, {"ok", ok}});
    }
    const double rate = static_cast<double>(successes) / cfg.instances;
    GateReport g;
    g.pass = exact_all && dominance && rate >= cfg.min_success;
    g.report = {{"d", cfg.d}, {"bits", cfg.bits}, {"instances", cfg.instances}, {"ratio_bound", cfg.ratio},
                {"successes", successes}, {"success_rate", rate},
                {"sieve_alone_successes", sieve_successes}, {"all_exact", exact_all},
                {"oracle_dominance", dominance}, {"svp_config", cfg.svp.to_json()}, {"rows", rows},
                {"pass", g.pass}};
    return g;
}

}  // namespace trisieve
