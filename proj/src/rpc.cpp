#include "trisieve/rpc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <Eigen/Dense>

#include "trisieve/errors.hpp"

namespace trisieve {

namespace {
constexpr double kPruneSlack = 1e-12;
constexpr std::size_t kSuffixTableCap = std::size_t{1} << 16;

std::vector<double> haar_rotation(int n, Rng& rng) {
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd& r = qr.matrixQR();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    std::vector<double> out(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i) * n + j] = q(i, j);
    return out;
}
}  // namespace

int default_block_count(int d) {
    if (d < 1) throw InvalidDimension("dimension must be positive");
    const int target = std::max(1, static_cast<int>(std::lround(std::log2(static_cast<double>(d)))));
    int best = 1;
    for (int k = 1; k <= d; ++k) {
        if (d % k) continue;
        if (std::abs(k - target) < std::abs(best - target)) best = k;
    }
    return best;
}

std::uint32_t per_block_size(double M, int b) {
    if (!(M >= 1.0)) throw ConfigError("code size M must be >= 1");
    const double root = std::pow(M, 1.0 / b);
    const double near = std::round(root);
    if (near >= 1.0 && std::pow(near, b) >= M * (1.0 - 1e-12)) {
        if (std::abs(root - near) < 1e-9) return static_cast<std::uint32_t>(near);
    }
    return static_cast<std::uint32_t>(std::ceil(root));
}

std::uint64_t RpcDescription::realized_M() const {
    std::uint64_t m = 1;
    for (int i = 0; i < b; ++i) m *= per_block;
    return m;
}

bool RpcDescription::valid(const CodewordId& id) const {
    if (id.rotation >= static_cast<std::uint32_t>(t)) return false;
    if (id.blocks.size() != static_cast<std::size_t>(b)) return false;
    return std::all_of(id.blocks.begin(), id.blocks.end(),
                       [&](std::uint32_t j) { return j < per_block; });
}

std::uint64_t RpcDescription::flat_index(const CodewordId& id) const {
    if (!valid(id)) throw InvalidArgument("codeword id out of range");
    std::uint64_t k = id.rotation;
    for (auto j : id.blocks) k = k * per_block + j;
    return k;
}

CodewordId RpcDescription::from_flat(std::uint64_t k) const {
    if (k >= total_codewords()) throw InvalidArgument("flat codeword index out of range");
    CodewordId id;
    id.blocks.resize(static_cast<std::size_t>(b));
    for (int i = b - 1; i >= 0; --i) {
        id.blocks[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(k % per_block);
        k /= per_block;
    }
    id.rotation = static_cast<std::uint32_t>(k);
    return id;
}

std::vector<double> RpcDescription::rotate_in(std::size_t r, std::span<const double> x) const {
    const auto n = static_cast<std::size_t>(padded_d);
    const auto& q = rotations[r];
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* row = &q[i * n];
        for (std::size_t j = 0; j < n; ++j) y[j] += row[j] * xi;
    }
    return y;
}

void RpcDescription::check_invariants() const {
    if (padded_d != b * block_dim) throw ConfigError("b does not divide the padded dimension");
    const double target = 1.0 / std::sqrt(static_cast<double>(b));
    for (const auto& book : codebooks)
        for (const auto& v : book)
            if (std::abs(norm(v) - target) > 1e-12)
                throw DomainError("block codeword norm differs from 1/sqrt(b)");
    const auto n = static_cast<std::size_t>(padded_d);
    for (const auto& q : rotations) {
        Eigen::MatrixXd m(padded_d, padded_d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) = q[i * n + j];
        const Eigen::MatrixXd e = m.transpose() * m - Eigen::MatrixXd::Identity(padded_d, padded_d);
        if (e.cwiseAbs().maxCoeff() > 1e-10) throw DomainError("rotation is not orthogonal");
        if (m.determinant() <= 0.0) throw DomainError("rotation has negative determinant");
    }
}

RpcDescription sample_rpc(const RpcParams& p, std::uint64_t seed) {
    if (p.d < 1) throw InvalidDimension("dimension must be positive");
    if (p.b < 1 || p.t_rotations < 1) throw ConfigError("b and t_rotations must be >= 1");
    if (p.d % p.b != 0 && !p.pad) throw ConfigError("b must divide d (padding disabled)");
    RpcDescription rpc;
    rpc.d = p.d;
    rpc.b = p.b;
    rpc.block_dim = (p.d + p.b - 1) / p.b;
    rpc.padded_d = rpc.block_dim * p.b;
    rpc.per_block = per_block_size(p.M, p.b);
    rpc.t = p.t_rotations;
    rpc.M_nominal = p.M;
    rpc.seed = seed;

    Rng root(seed);
    Rng books = root.sub("codebooks");
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.b));
    rpc.codebooks.resize(static_cast<std::size_t>(p.b));
    for (auto& book : rpc.codebooks) {
        book.reserve(rpc.per_block);
        for (std::uint32_t j = 0; j < rpc.per_block; ++j) {
            auto v = sample_unit_vector(rpc.block_dim, books).coords;
            for (auto& x : v) x *= scale;
            book.push_back(std::move(v));
        }
    }
    Rng rots = root.sub("rotations");
    for (int r = 0; r < p.t_rotations; ++r) rpc.rotations.push_back(haar_rotation(rpc.padded_d, rots));
    return rpc;
}

UnitVector codeword_vector(const RpcDescription& rpc, const CodewordId& id) {
    if (!rpc.valid(id)) throw InvalidArgument("codeword id out of range");
    const auto n = static_cast<std::size_t>(rpc.padded_d);
    std::vector<double> cat;
    cat.reserve(n);
    for (int i = 0; i < rpc.b; ++i) {
        const auto& v = rpc.codebooks[static_cast<std::size_t>(i)][id.blocks[static_cast<std::size_t>(i)]];
        cat.insert(cat.end(), v.begin(), v.end());
    }
    const auto& q = rpc.rotations[id.rotation];
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = dot(std::span(&q[i * n], n), cat);
    return UnitVector{std::move(out)};
}

std::vector<CodewordId> decode(const RpcDescription& rpc, const UnitVector& x, double cos_alpha,
                               double epsilon, DecodeStats* stats) {
    if (x.dim() != static_cast<std::size_t>(rpc.d)) throw InvalidDimension("decode: dimension mismatch");
    const int b = rpc.b;
    const std::size_t K = rpc.per_block;
    const auto bd = static_cast<std::size_t>(rpc.block_dim);
    const double lo = cos_alpha - epsilon, hi = cos_alpha + epsilon;
    if (stats) stats->nodes_per_level.assign(static_cast<std::size_t>(b), 0);

    std::vector<CodewordId> out;
    std::vector<std::vector<double>> vals(static_cast<std::size_t>(b), std::vector<double>(K));
    std::vector<std::vector<std::uint32_t>> order(static_cast<std::size_t>(b), std::vector<std::uint32_t>(K));
    std::vector<double> max_rest(static_cast<std::size_t>(b) + 1, 0.0), min_rest(max_rest);
    std::vector<std::uint32_t> path(static_cast<std::size_t>(b));

    for (std::size_t r = 0; r < rpc.rotations.size(); ++r) {
        const auto y = rpc.rotate_in(r, x.coords);
        for (int i = 0; i < b; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            std::vector<double> s(K);
            for (std::size_t j = 0; j < K; ++j)
                s[j] = dot(std::span(&y[ii * bd], bd), rpc.codebooks[ii][j]);
            auto& ord = order[ii];
            for (std::size_t j = 0; j < K; ++j) ord[j] = static_cast<std::uint32_t>(j);
            std::stable_sort(ord.begin(), ord.end(), [&](auto a, auto c) { return s[a] > s[c]; });
            for (std::size_t j = 0; j < K; ++j) vals[ii][j] = s[ord[j]];
        }
        for (int i = b - 1; i >= 0; --i) {
            const auto ii = static_cast<std::size_t>(i);
            max_rest[ii] = max_rest[ii + 1] + vals[ii].front();
            min_rest[ii] = min_rest[ii + 1] + vals[ii].back();
        }
        // Sorted achievable sums of levels i..b-1, while small enough to tabulate;
        // a prefix is kept only if some completion lands in the band.
        std::vector<std::vector<double>> suffix(static_cast<std::size_t>(b) + 1);
        suffix[static_cast<std::size_t>(b)] = {0.0};
        int tabulated = b;
        for (int i = b - 1; i >= 1; --i) {
            const auto ii = static_cast<std::size_t>(i);
            if (suffix[ii + 1].size() * K > kSuffixTableCap) break;
            auto& cur = suffix[ii];
            cur.reserve(suffix[ii + 1].size() * K);
            for (double v : vals[ii])
                for (double t : suffix[ii + 1]) cur.push_back(v + t);
            std::sort(cur.begin(), cur.end());
            tabulated = i;
        }
        auto completes = [&](std::size_t level, double p2) {
            if (static_cast<int>(level) < tabulated) return true;
            const auto& v = suffix[level];
            auto it = std::lower_bound(v.begin(), v.end(), lo - p2 - kPruneSlack);
            return it != v.end() && *it <= hi - p2 + kPruneSlack;
        };
        // Indices j of the descending array with a <= vals[j] <= c.
        auto range = [&](std::size_t level, double a, double c) {
            const auto& v = vals[level];
            auto first = std::lower_bound(v.begin(), v.end(), c, std::greater<double>());
            auto last = std::upper_bound(v.begin(), v.end(), a, std::greater<double>());
            return std::pair<std::size_t, std::size_t>(
                static_cast<std::size_t>(first - v.begin()),
                static_cast<std::size_t>(std::max(first, last) - v.begin()));
        };
        std::function<void(int, double)> dfs = [&](int level, double prefix) {
            const auto lv = static_cast<std::size_t>(level);
            const auto [j0, j1] = range(lv, lo - prefix - max_rest[lv + 1] - kPruneSlack,
                                        hi - prefix - min_rest[lv + 1] + kPruneSlack);
            for (std::size_t j = j0; j < j1; ++j) {
                const double p2 = prefix + vals[lv][j];
                if (level < b - 1 && !completes(lv + 1, p2)) continue;
                if (level == b - 1 && (p2 < lo || p2 > hi)) continue;
                if (stats) ++stats->nodes_per_level[lv];
                path[lv] = order[lv][j];
                if (level == b - 1) {
                    out.push_back(CodewordId{static_cast<std::uint32_t>(r), path});
                } else {
                    dfs(level + 1, p2);
                }
            }
        };
        dfs(0, 0.0);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CodewordId> decode_bruteforce(const RpcDescription& rpc, const UnitVector& x,
                                          double cos_alpha, double epsilon) {
    std::vector<double> xp = x.coords;
    xp.resize(static_cast<std::size_t>(rpc.padded_d), 0.0);
    std::vector<CodewordId> out;
    for (std::uint64_t k = 0; k < rpc.total_codewords(); ++k) {
        CodewordId id = rpc.from_flat(k);
        if (std::abs(dot(xp, codeword_vector(rpc, id).coords) - cos_alpha) <= epsilon)
            out.push_back(std::move(id));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint64_t> survivor_prefix_counts(const std::vector<CodewordId>& survivors, int b) {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(b), 0);
    for (int i = 0; i < b; ++i) {
        std::set<std::vector<std::uint32_t>> prefixes;
        for (const auto& id : survivors) {
            std::vector<std::uint32_t> p{id.rotation};
            p.insert(p.end(), id.blocks.begin(), id.blocks.begin() + i + 1);
            prefixes.insert(std::move(p));
        }
        counts[static_cast<std::size_t>(i)] = prefixes.size();
    }
    return counts;
}

CollisionEstimate mc_collision_probability(int d, int b, double M, const AngleSpec& spec,
                                           std::uint64_t n_trials, const Rng& rng,
                                           unsigned workers) {
    spec.validate();
    if (n_trials < 100) throw InvalidArgument("mc_collision_probability needs >= 100 trials");
    Rng pr = rng.sub("pair");
    const auto [x, y] = pair_at_separation(d, spec.cos_theta, pr);
    const Rng codes = rng.sub("codes");
    std::vector<std::uint8_t> hit(n_trials, 0);
    parallel_chunks(n_trials, workers, [&](std::size_t k) {
        const RpcDescription rpc = sample_rpc({d, b, M, 1, false}, codes.sub(k).seed());
        const auto a = decode(rpc, x, spec.cos_alpha, spec.epsilon);
        if (a.empty()) return;
        const auto c = decode(rpc, y, spec.cos_beta, spec.epsilon);
        std::vector<CodewordId> both;
        std::set_intersection(a.begin(), a.end(), c.begin(), c.end(), std::back_inserter(both));
        hit[k] = both.empty() ? 0 : 1;
    });
    std::uint64_t hits = 0;
    for (auto h : hit) hits += h;
    CollisionEstimate out;
    out.estimate = make_estimate(hits, n_trials);
    out.realized_M = static_cast<std::uint64_t>(std::pow(per_block_size(M, b), b) + 0.5);
    const double mw = static_cast<double>(out.realized_M) * std::exp2(d * wedge_exponent(spec));
    out.predicted = std::min(1.0, mw);
    out.predicted_band =
        std::min(1.0, static_cast<double>(out.realized_M) * wedge_band_probability(d, spec));
    return out;
}

nlohmann::json rpc_to_json(const RpcDescription& rpc, bool materialize) {
    nlohmann::json j = {{"format", "trisieve-rpc"}, {"version", 1},     {"d", rpc.d},
                        {"b", rpc.b},               {"M", rpc.M_nominal}, {"t", rpc.t},
                        {"pad", rpc.padded_d != rpc.d}, {"seed", rpc.seed}};
    if (materialize) {
        j["codebooks"] = rpc.codebooks;
        j["rotations"] = rpc.rotations;
    }
    return j;
}

RpcDescription rpc_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "trisieve-rpc" || j.value("version", 0) != 1)
        throw ConfigError("unsupported rpc blob");
    RpcParams p{j.at("d").get<int>(), j.at("b").get<int>(), j.at("M").get<double>(),
                j.at("t").get<int>(), j.at("pad").get<bool>()};
    RpcDescription rpc = sample_rpc(p, j.at("seed").get<std::uint64_t>());
    if (j.contains("codebooks")) {
        rpc.codebooks = j.at("codebooks").get<decltype(rpc.codebooks)>();
        rpc.rotations = j.at("rotations").get<decltype(rpc.rotations)>();
        rpc.check_invariants();
    }
    return rpc;
}

}  // namespace trisieve
