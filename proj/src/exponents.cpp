#include "trisieve/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "trisieve/errors.hpp"
#include "trisieve/sieve.hpp"
#include "trisieve/sphere.hpp"

namespace trisieve {

namespace {
const double kCosTheta = 1.0 / 3.0;
const double kCosThetaP = 1.0 / std::sqrt(3.0);
constexpr double kPenalty = 1e3;

bool wedge(double ca, double cb, double ct, double& out) {
    AngleSpec s{ca, cb, ct, 0.0};
    if (!is_well_defined(s, kWellDefinedKappa)) return false;
    out = wedge_exponent(s);
    return true;
}
}  // namespace

ExponentPoint time_exponent(double ca, double cap, double m) {
    ExponentPoint p;
    p.cos_alpha = ca;
    p.cos_alpha_prime = cap;
    p.m_exp = m;
    if (!(ca > 0.0 && ca < 1.0 && cap > 0.0 && cap < 1.0)) {
        p.infeasible_reason = "cosines outside (0,1)";
        return p;
    }
    p.e_p_alpha = cap_exponent(ca);
    p.e_p_alpha_prime = cap_exponent(cap);
    if (!wedge(kCosTheta, ca, ca, p.e_W_theta_alpha) ||
        !wedge(kCosThetaP, cap, cap, p.e_W_thetaP_alphaP) ||
        !wedge(ca, ca, kCosTheta, p.e_W_alpha_alpha_theta) ||
        !wedge(cap, cap, kCosThetaP, p.e_W_alphaP_alphaP_thetaP)) {
        p.infeasible_reason = "wedge not well defined";
        return p;
    }
    p.e_mW = m + p.e_W_thetaP_alphaP;
    p.e_ell1 = (p.e_p_alpha - p.e_W_alpha_alpha_theta) + (p.e_p_alpha_prime - p.e_W_alphaP_alphaP_thetaP);
    // (1/sqrt(min{1, mW})) (sqrt(pα / W(θ,α|α)) + sqrt(m pα'))
    p.e_search = -0.5 * std::min(0.0, p.e_mW) +
                 std::max(0.5 * (p.e_p_alpha - p.e_W_theta_alpha), 0.5 * (m + p.e_p_alpha_prime));
    p.e_total = m + std::max(p.e_ell1, p.e_search);
    p.constraint_margins = {m + p.e_p_alpha, m + p.e_p_alpha_prime, m + p.e_W_theta_alpha,
                            2.0 * m + p.e_W_thetaP_alphaP};
    if (*std::min_element(p.constraint_margins.begin(), p.constraint_margins.end()) <= 0.0) {
        p.infeasible_reason = "list-size constraint violated";
        return p;
    }
    p.feasible = true;
    return p;
}

nlohmann::json ExponentPoint::to_json() const {
    return {{"cos_alpha", cos_alpha},
            {"cos_alpha_prime", cos_alpha_prime},
            {"m_exp", m_exp},
            {"e_p_alpha", e_p_alpha},
            {"e_p_alpha_prime", e_p_alpha_prime},
            {"e_W_theta_alpha", e_W_theta_alpha},
            {"e_W_thetaP_alphaP", e_W_thetaP_alphaP},
            {"e_W_alpha_alpha_theta", e_W_alpha_alpha_theta},
            {"e_W_alphaP_alphaP_thetaP", e_W_alphaP_alphaP_thetaP},
            {"e_mW", e_mW},
            {"e_ell1", e_ell1},
            {"e_search", e_search},
            {"e_total", e_total},
            {"constraint_margins", constraint_margins},
            {"feasible", feasible},
            {"infeasible_reason", infeasible_reason}};
}

namespace {
struct Objective {
    double m;
    SearchBox box;
};

double clamp_box(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

double objective_at(const Objective& o, double a, double ap) {
    const double ca = clamp_box(a, o.box.a_lo, o.box.a_hi);
    const double cap = clamp_box(ap, o.box.ap_lo, o.box.ap_hi);
    const double outside = std::abs(ca - a) + std::abs(cap - ap);
    const ExponentPoint p = time_exponent(ca, cap, o.m);
    if (!p.feasible) return kPenalty + outside;
    return p.e_total + 10.0 * outside;
}

double gsl_objective(const gsl_vector* v, void* params) {
    const auto* o = static_cast<const Objective*>(params);
    return objective_at(*o, gsl_vector_get(v, 0), gsl_vector_get(v, 1));
}
}  // namespace

OptimizeResult optimize(double m_exp, const SearchBox& box, double tolerance) {
    if (!(box.a_lo > 0.0 && box.a_hi < 1.0 && box.ap_lo > 0.0 && box.ap_hi < 1.0 &&
          box.a_lo <= box.a_hi && box.ap_lo <= box.ap_hi))
        throw InfeasibleBox("search box must lie inside (0,1)^2");
    OptimizeResult res;
    const Objective obj{m_exp, box};
    constexpr double step = 1e-3;
    const auto na = static_cast<std::size_t>(std::floor((box.a_hi - box.a_lo) / step + 1e-9)) + 1;
    const auto np = static_cast<std::size_t>(std::floor((box.ap_hi - box.ap_lo) / step + 1e-9)) + 1;
    double best = std::numeric_limits<double>::infinity();
    double ba = 0.0, bp = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        const double a = std::min(box.a_hi, box.a_lo + step * static_cast<double>(i));
        for (std::size_t j = 0; j < np; ++j) {
            const double ap = std::min(box.ap_hi, box.ap_lo + step * static_cast<double>(j));
            ++res.grid_points;
            const ExponentPoint p = time_exponent(a, ap, m_exp);
            if (!p.feasible) continue;
            ++res.feasible_grid_points;
            if (p.e_total < best) {
                best = p.e_total;
                ba = a;
                bp = ap;
            }
        }
    }
    if (res.feasible_grid_points == 0) throw InfeasibleBox("no feasible point in search box");
    res.trace.push_back({ba, bp, best});

    gsl_set_error_handler_off();
    const gsl_multimin_fminimizer_type* T = gsl_multimin_fminimizer_nmsimplex2;
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(T, 2);
    gsl_vector* x = gsl_vector_alloc(2);
    gsl_vector* ss = gsl_vector_alloc(2);
    gsl_multimin_function f{&gsl_objective, 2, const_cast<Objective*>(&obj)};
    // Restart until a full run no longer improves; a simplex can collapse
    // along a ridge of the max-of-terms objective.
    for (int restart = 0; restart < 50; ++restart) {
        gsl_vector_set(x, 0, ba);
        gsl_vector_set(x, 1, bp);
        gsl_vector_set_all(ss, step);
        gsl_multimin_fminimizer_set(s, &f, x, ss);
        for (int it = 0; it < 10000; ++it) {
            ++res.simplex_iterations;
            if (gsl_multimin_fminimizer_iterate(s)) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), tolerance) != GSL_CONTINUE) break;
        }
        const double fa = clamp_box(gsl_vector_get(s->x, 0), box.a_lo, box.a_hi);
        const double fp = clamp_box(gsl_vector_get(s->x, 1), box.ap_lo, box.ap_hi);
        const double fv = objective_at(obj, fa, fp);
        res.trace.push_back({fa, fp, fv});
        const bool improved = fv < best - 1e-15;
        if (fv <= best) {
            best = fv;
            ba = fa;
            bp = fp;
        }
        if (!improved) break;
    }
    gsl_vector_free(ss);
    gsl_vector_free(x);
    gsl_multimin_fminimizer_free(s);

    res.cos_alpha = ba;
    res.cos_alpha_prime = bp;
    res.point = time_exponent(ba, bp, m_exp);
    const double edge = 1e-6;
    res.boundary = ba - box.a_lo < edge || box.a_hi - ba < edge || bp - box.ap_lo < edge ||
                   box.ap_hi - bp < edge;

    const double h = 1e-6;
    const double f0 = objective_at(obj, ba, bp);
    res.min_directional_slope = std::numeric_limits<double>::infinity();
    const double dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                               {M_SQRT1_2, M_SQRT1_2}, {-M_SQRT1_2, -M_SQRT1_2},
                               {M_SQRT1_2, -M_SQRT1_2}, {-M_SQRT1_2, M_SQRT1_2}};
    for (const auto& dv : dirs) {
        const double slope = (objective_at(obj, ba + h * dv[0], bp + h * dv[1]) - f0) / h;
        res.min_directional_slope = std::min(res.min_directional_slope, slope);
    }
    res.certified = res.min_directional_slope >= -1e-4;
    res.central_differences = {
        (objective_at(obj, ba + h, bp) - objective_at(obj, ba - h, bp)) / (2 * h),
        (objective_at(obj, ba, bp + h) - objective_at(obj, ba, bp - h)) / (2 * h)};
    res.balance_gap = std::abs(res.point.e_ell1 - res.point.e_search);
    return res;
}

nlohmann::json OptimizeResult::to_json() const {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& t : trace) tr.push_back({{"cos_alpha", t[0]}, {"cos_alpha_prime", t[1]}, {"e_total", t[2]}});
    return {{"cos_alpha", cos_alpha},
            {"cos_alpha_prime", cos_alpha_prime},
            {"point", point.to_json()},
            {"boundary", boundary},
            {"certificate",
             {{"min_directional_slope", min_directional_slope},
              {"certified", certified},
              {"central_differences", central_differences},
              {"balance_gap", balance_gap}}},
            {"grid_points", grid_points},
            {"feasible_grid_points", feasible_grid_points},
            {"simplex_iterations", simplex_iterations},
            {"trace", tr}};
}

std::vector<Table1Row> table1_report(double new_quantum_time) {
    // Time columns are literature values for the prior best algorithms.
    std::vector<Table1Row> rows = {{2, 0.0, 0.2925, 0.2563, 0.0},
                                   {3, 0.0, 0.3383, 0.3098, new_quantum_time},
                                   {4, 0.0, 0.3766, 0.3178, 0.0}};
    for (auto& r : rows) r.memory_exponent = min_list_size(r.k, 1).exponent;
    return rows;
}

nlohmann::json table1_json(const std::vector<Table1Row>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j = {{"k", r.k},
                            {"memory_exponent", r.memory_exponent},
                            {"classical_time_literature", r.classical_time},
                            {"quantum_time_literature", r.quantum_time}};
        if (r.new_quantum_time > 0.0) j["quantum_time_this_artifact"] = r.new_quantum_time;
        out.push_back(j);
    }
    return out;
}

}  // namespace trisieve
