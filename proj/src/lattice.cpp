#include "trisieve/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "trisieve/errors.hpp"

namespace trisieve {

namespace {
std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw SizeGuard("int64 overflow in lattice arithmetic");
    return r;
}
std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw SizeGuard("int64 overflow in lattice arithmetic");
    return r;
}
}  // namespace

std::int64_t squared_norm(const IntVec& v) {
    std::int64_t s = 0;
    for (auto x : v) s = checked_add(s, checked_mul(x, x));
    return s;
}

IntVec add_scaled(const IntVec& a, const IntVec& b, std::int64_t s) {
    IntVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = checked_add(a[i], checked_mul(s, b[i]));
    return out;
}

IntVec LatticeBasis::combine(const IntVec& coeffs) const {
    if (coeffs.size() != rows.size()) throw InvalidArgument("coefficient length does not match basis");
    IntVec v(rows.empty() ? 0 : rows[0].size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (coeffs[i] != 0) v = add_scaled(v, rows[i], coeffs[i]);
    return v;
}

void LatticeBasis::validate() const {
    if (rows.empty()) throw InvalidDimension("empty basis");
    for (const auto& r : rows)
        if (r.size() != rows.size()) throw InvalidDimension("basis must be square");
    if (exact_determinant(*this) == "0") throw RankDeficient("basis rows are linearly dependent");
}

LatticeVector LatticeVector::from_coeffs(const LatticeBasis& B, IntVec coeffs) {
    LatticeVector v;
    v.vec = B.combine(coeffs);
    v.coeffs = std::move(coeffs);
    v.norm = std::sqrt(static_cast<double>(squared_norm(v.vec)));
    return v;
}

// ---- text format ----------------------------------------------------------

namespace {
class Scanner {
public:
    explicit Scanner(const std::string& s) : s_(s) {}
    void skip_ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) advance();
    }
    bool eof() const { return i_ >= s_.size(); }
    char peek() const { return s_[i_]; }
    void expect(char c) {
        skip_ws();
        if (eof() || s_[i_] != c) fail(std::string("expected '") + c + "'");
        advance();
    }
    std::int64_t integer() {
        skip_ws();
        const std::size_t l = line_, c = col_;
        std::size_t start = i_;
        if (!eof() && (s_[i_] == '-' || s_[i_] == '+')) advance();
        std::size_t digits = 0;
        while (!eof() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            advance();
            ++digits;
        }
        if (digits == 0) throw ParseError("expected integer", l, c);
        try {
            return std::stoll(s_.substr(start, i_ - start));
        } catch (const std::out_of_range&) {
            throw ParseError("integer out of range", l, c);
        }
    }
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col_); }

private:
    void advance() {
        if (s_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }
    const std::string& s_;
    std::size_t i_ = 0, line_ = 1, col_ = 1;
};
}  // namespace

LatticeBasis parse_basis(const std::string& text) {
    Scanner sc(text);
    LatticeBasis B;
    sc.expect('[');
    for (;;) {
        sc.skip_ws();
        if (sc.eof()) sc.fail("unexpected end of input");
        if (sc.peek() == ']') {
            sc.expect(']');
            break;
        }
        sc.expect('[');
        IntVec row;
        for (;;) {
            sc.skip_ws();
            if (sc.eof()) sc.fail("unexpected end of input");
            if (sc.peek() == ']') {
                sc.expect(']');
                break;
            }
            row.push_back(sc.integer());
        }
        if (row.empty()) sc.fail("empty row");
        if (!B.rows.empty() && row.size() != B.rows[0].size()) sc.fail("row length differs from first row");
        B.rows.push_back(std::move(row));
    }
    sc.skip_ws();
    if (!sc.eof()) sc.fail("trailing characters after basis");
    if (B.rows.empty()) throw InvalidDimension("empty basis");
    B.validate();
    return B;
}

std::string format_basis(const LatticeBasis& B) {
    std::ostringstream os;
    os << '[';
    for (const auto& r : B.rows) {
        os << '[';
        for (std::size_t j = 0; j < r.size(); ++j) os << (j ? " " : "") << r[j];
        os << "]\n";
    }
    os << "]\n";
    return os.str();
}

LatticeBasis load_basis(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open basis file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_basis(ss.str());
}

void save_basis(const LatticeBasis& B, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write basis file " + path);
    out << format_basis(B);
}

LatticeBasis random_basis(int d, int bits, Rng& rng) {
    if (d < 1) throw InvalidDimension("d must be positive");
    if (bits < 1 || bits > 30) throw InvalidArgument("bits must lie in [1, 30]");
    const std::int64_t half = std::int64_t{1} << (bits - 1);
    for (;;) {
        LatticeBasis B;
        B.rows.assign(d, IntVec(d));
        for (auto& r : B.rows)
            for (auto& x : r) x = static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(2 * half))) - half;
        if (exact_determinant(B) != "0") return B;
    }
}

std::string exact_determinant(const LatticeBasis& B) {
    using boost::multiprecision::cpp_int;
    const std::size_t n = B.rows.size();
    for (const auto& r : B.rows)
        if (r.size() != n) throw InvalidDimension("determinant needs a square basis");
    std::vector<std::vector<cpp_int>> a(n, std::vector<cpp_int>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = B.rows[i][j];
    cpp_int prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return "0";
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    cpp_int det = a[n - 1][n - 1] * sign;
    return det.str();
}

// ---- reduction ------------------------------------------------------------

Gso gram_schmidt(const LatticeBasis& B) {
    const std::size_t n = B.rows.size();
    Gso g;
    g.mu.assign(n, std::vector<long double>(n, 0.0L));
    g.bstar_sq.assign(n, 0.0L);
    std::vector<std::vector<long double>> bs(n);
    for (std::size_t i = 0; i < n; ++i) {
        bs[i].assign(B.rows[i].begin(), B.rows[i].end());
        for (std::size_t j = 0; j < i; ++j) {
            long double ip = 0.0L;
            for (std::size_t k = 0; k < bs[i].size(); ++k) ip += static_cast<long double>(B.rows[i][k]) * bs[j][k];
            const long double m = ip / g.bstar_sq[j];
            g.mu[i][j] = m;
            for (std::size_t k = 0; k < bs[i].size(); ++k) bs[i][k] -= m * bs[j][k];
        }
        g.mu[i][i] = 1.0L;
        long double s = 0.0L;
        for (auto v : bs[i]) s += v * v;
        if (!(s > 0.0L)) throw RankDeficient("Gram-Schmidt hit a zero vector");
        g.bstar_sq[i] = s;
    }
    return g;
}

LllResult lll_reduce(const LatticeBasis& B_in, double delta) {
    if (!(delta > 0.25 && delta < 1.0)) throw InvalidArgument("LLL delta must lie in (0.25, 1)");
    const std::size_t n = B_in.rows.size();
    LllResult res;
    res.basis = B_in;
    auto& b = res.basis.rows;
    res.U.assign(n, IntVec(n, 0));
    for (std::size_t i = 0; i < n; ++i) res.U[i][i] = 1;
    if (n < 2) return res;
    Gso g = gram_schmidt(res.basis);
    std::size_t k = 1;
    while (k < n) {
        for (std::size_t jj = k; jj-- > 0;) {
            const long double q = std::llround(g.mu[k][jj]);
            if (q == 0) continue;
            const auto qi = static_cast<std::int64_t>(q);
            b[k] = add_scaled(b[k], b[jj], -qi);
            res.U[k] = add_scaled(res.U[k], res.U[jj], -qi);
            for (std::size_t l = 0; l < jj; ++l) g.mu[k][l] -= q * g.mu[jj][l];
            g.mu[k][jj] -= q;
        }
        const long double m = g.mu[k][k - 1];
        if (g.bstar_sq[k] >= (static_cast<long double>(delta) - m * m) * g.bstar_sq[k - 1]) {
            ++k;
        } else {
            std::swap(b[k], b[k - 1]);
            std::swap(res.U[k], res.U[k - 1]);
            ++res.swaps;
            g = gram_schmidt(res.basis);
            k = std::max<std::size_t>(k - 1, 1);
        }
    }
    return res;
}

bool is_lll_reduced(const LatticeBasis& B, double delta, double tol) {
    const Gso g = gram_schmidt(B);
    const std::size_t n = B.rows.size();
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(static_cast<double>(g.mu[i][j])) > 0.5 + tol) return false;
        const long double m = g.mu[i][i - 1];
        if (g.bstar_sq[i] < (static_cast<long double>(delta) - m * m) * g.bstar_sq[i - 1] * (1.0L - tol))
            return false;
    }
    return true;
}

// ---- enumeration ----------------------------------------------------------

namespace {
struct Enumerator {
    const LatticeBasis& B;
    const Gso& g;
    std::size_t n;
    IntVec x;
    IntVec best_x;
    std::int64_t best_sq;
    long double bound;
    std::uint64_t nodes = 0;

    void leaf() {
        const std::int64_t sq = squared_norm(B.combine(x));
        if (sq > 0 && sq < best_sq) {
            best_sq = sq;
            best_x = x;
            bound = static_cast<long double>(sq) * (1.0L + 1e-9L);
        }
    }

    // `zero_above`: every x_j with j > k is zero (sign symmetry is broken there).
    void level(std::size_t k, long double partial, bool zero_above) {
        long double c = 0.0L;
        for (std::size_t j = k + 1; j < n; ++j) c -= static_cast<long double>(x[j]) * g.mu[j][k];
        const long double room = bound - partial;
        if (room < 0.0L) return;
        const long double rad = std::sqrt(room / g.bstar_sq[k]);
        auto lo = static_cast<std::int64_t>(std::ceil(c - rad));
        const auto hi = static_cast<std::int64_t>(std::floor(c + rad));
        if (zero_above) lo = std::max<std::int64_t>(lo, 0);
        // Nearest-first order within [lo, hi].
        const auto mid = std::clamp<std::int64_t>(std::llround(c), lo, std::max(lo, hi));
        for (std::int64_t step = 0;; ++step) {
            bool any = false;
            for (int side = 0; side < 2; ++side) {
                if (step == 0 && side == 1) continue;
                const std::int64_t v = side == 0 ? mid + step : mid - step;
                if (v < lo || v > hi) continue;
                any = true;
                const long double diff = static_cast<long double>(v) - c;
                const long double l = partial + diff * diff * g.bstar_sq[k];
                if (l > bound) continue;
                ++nodes;
                x[k] = v;
                const bool z = zero_above && v == 0;
                if (k == 0) {
                    if (!z) leaf();
                } else {
                    level(k - 1, l, z);
                }
            }
            if (!any) break;
        }
        x[k] = 0;
    }
};
}  // namespace

Lambda1 enumerate_lambda1(const LatticeBasis& B_in, int max_dim) {
    B_in.validate();
    if (B_in.dim() > max_dim) throw SizeGuard("enumeration oracle limited to d <= " + std::to_string(max_dim));
    const LllResult red = lll_reduce(B_in, 0.99);
    const Gso g = gram_schmidt(red.basis);
    const std::size_t n = red.basis.rows.size();
    Enumerator e{red.basis, g, n, IntVec(n, 0), IntVec(n, 0), 0, 0.0L};
    std::size_t first = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (squared_norm(red.basis.rows[i]) < squared_norm(red.basis.rows[first])) first = i;
    e.best_x[first] = 1;
    e.best_sq = squared_norm(red.basis.rows[first]);
    e.bound = static_cast<long double>(e.best_sq) * (1.0L + 1e-9L);
    e.level(n - 1, 0.0L, true);

    IntVec coeffs(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (e.best_x[i] != 0) coeffs[j] = checked_add(coeffs[j], checked_mul(e.best_x[i], red.U[i][j]));
    Lambda1 out;
    out.witness = LatticeVector::from_coeffs(B_in, coeffs);
    out.lambda1 = out.witness.norm;
    out.nodes = e.nodes;
    return out;
}

// ---- sampling -------------------------------------------------------------

namespace {
std::int64_t sample_z(double center, double sigma, Rng& rng) {
    const double t = 6.0;
    const auto lo = static_cast<std::int64_t>(std::floor(center - t * sigma));
    const auto hi = static_cast<std::int64_t>(std::ceil(center + t * sigma));
    if (lo == hi) return lo;
    const auto span = static_cast<std::size_t>(hi - lo + 1);
    for (;;) {
        const std::int64_t z = lo + static_cast<std::int64_t>(rng.index(span));
        const double dz = static_cast<double>(z) - center;
        if (rng.uniform() <= std::exp(-dz * dz / (2.0 * sigma * sigma))) return z;
    }
}

IntVec canonical_sign(IntVec v) {
    for (auto x : v) {
        if (x == 0) continue;
        if (x < 0)
            for (auto& y : v) y = -y;
        break;
    }
    return v;
}
}  // namespace

AnnulusSample sample_annulus_vectors(const LatticeBasis& B, std::size_t n, double rho, double R, Rng& rng,
                                     double floor, int max_retunes) {
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in (0,1)");
    if (!(R > 0.0)) throw InvalidArgument("R must be positive");
    AnnulusSample out;
    if (n == 0) return out;
    const Gso g = gram_schmidt(B);
    const std::size_t d = B.rows.size();
    double s = 0.5 * (1.0 + rho) * R / std::sqrt(static_cast<double>(d));
    std::set<IntVec> seen;
    constexpr std::uint64_t batch = 512;
    std::uint64_t accepted_total = 0;
    for (;;) {
        std::uint64_t acc = 0;
        std::vector<double> norms;
        for (std::uint64_t t = 0; t < batch && out.vectors.size() < n; ++t) {
            ++out.draws;
            IntVec x(d, 0);
            for (std::size_t i = d; i-- > 0;) {
                long double c = 0.0L;
                for (std::size_t j = i + 1; j < d; ++j) c -= static_cast<long double>(x[j]) * g.mu[j][i];
                x[i] = sample_z(static_cast<double>(c), s / std::sqrt(static_cast<double>(g.bstar_sq[i])), rng);
            }
            LatticeVector v = LatticeVector::from_coeffs(B, x);
            if (v.norm == 0.0) continue;
            norms.push_back(v.norm);
            if (v.norm < rho * R || v.norm > R) continue;
            if (!seen.insert(canonical_sign(v.vec)).second) continue;
            ++acc;
            out.vectors.push_back(std::move(v));
        }
        accepted_total += acc;
        if (out.vectors.size() >= n) break;
        const double rate = static_cast<double>(acc) / static_cast<double>(batch);
        if (rate < floor) {
            if (out.retunes >= max_retunes)
                throw SamplerFailure("annulus acceptance stayed below floor after retuning");
        }
        if (out.retunes < max_retunes && !norms.empty()) {
            std::nth_element(norms.begin(), norms.begin() + norms.size() / 2, norms.end());
            const double med = norms[norms.size() / 2];
            const double target = 0.5 * (1.0 + rho) * R;
            if (std::abs(med / target - 1.0) > 0.02 || rate < floor) {
                s *= std::clamp(target / med, 0.5, 2.0);
                ++out.retunes;
            }
        } else if (rate < floor) {
            throw SamplerFailure("annulus acceptance stayed below floor after retuning");
        }
    }
    out.width = s;
    out.acceptance_rate = static_cast<double>(accepted_total) / static_cast<double>(out.draws);
    return out;
}

}  // namespace trisieve
