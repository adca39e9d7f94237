#pragma once

// Weighted sums over n in [N, 2N), n = nu0 (mod W):
//   S1   = sum w_n                         S2   = sum w_n #{i : n + h_i prime}
//   S1-  = S1 restricted to P^-(prod(n + h_i)) <  n^c1
//   S1+  = S1 restricted to P^-(prod(n + h_i)) >= n^c1,   S2+ likewise
//   S1*  = #{rough n with at least r_k primes among n + h_i}
//   S1,p = S1 restricted to p | n + h_index
// Every n of the progression is visited; nothing is sampled. Sums are
// accumulated exactly, so S1- + S1+ = S1 holds as an identity and the
// result does not depend on the worker count.

#include "patternsieve/core/parallel.hpp"
#include "patternsieve/core/prime_table.hpp"
#include "patternsieve/core/rational.hpp"
#include "patternsieve/sieve_weights.hpp"
#include "patternsieve/variational/poly.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace patternsieve {

struct Window {
    u64 lo = 0;  // inclusive
    u64 hi = 0;  // exclusive

    static Window dyadic(u64 N) { return {N, 2 * N}; }
    u64 length() const { return hi - lo; }
};

class WindowTooLargeError : public std::length_error {
public:
    WindowTooLargeError(Window requested, Window suggested)
        : std::length_error("window [" + std::to_string(requested.lo) + ", " + std::to_string(requested.hi) +
                            ") exceeds the budget; try [" + std::to_string(suggested.lo) + ", " +
                            std::to_string(suggested.hi) + ")"),
          suggested_(suggested) {}
    Window suggested() const { return suggested_; }

private:
    Window suggested_;
};

struct SumOptions {
    Exec exec{};
    u64 segment = u64{1} << 16;       // n-values per work unit
    u64 budget = 1'000'000'000;       // largest window length accepted
    unsigned r_k = 1;                 // threshold for S1*
    unsigned index = 0;               // distinguished coordinate for S1,p
    std::vector<u64> primes;          // primes p for which S1,p is measured
};

struct S1pRecord {
    u64 p = 0;
    double S1p = 0;
    double S1 = 0;
    double bound = 0;        // log p / (p log R) * S1
    double ratio = 0;        // S1p / bound, the fitted constant
    bool in_c1_range = false;  // D0 < p < N^c1
};

struct SumReport {
    SieveParams params;
    Window window;
    unsigned r_k = 1;
    unsigned index = 0;
    u64 terms = 0;  // n visited in the progression

    Rational S1_exact, S2_exact, S1_minus_exact, S1_plus_exact, S2_plus_exact;
    double S1 = 0, S2 = 0, S1_minus = 0, S1_plus = 0, S2_plus = 0;
    u64 S1_star = 0;
    u64 rough_terms = 0;

    std::optional<double> predicted_S1, predicted_S2;
    std::vector<S1pRecord> s1p;

    bool partition_exact() const { return S1_minus_exact + S1_plus_exact == S1_exact; }
    double S2_over_S1() const { return S1 == 0 ? 0.0 : S2 / S1; }
    /// (S1- / S1) * log R / (c1 log N): the fitted constant in the S1- bound.
    double s1_minus_constant() const {
        if (S1 == 0) return 0.0;
        return (S1_minus / S1) * params.log_R / (params.c1.get_d() * std::log(static_cast<double>(params.N)));
    }
};

/// Main terms with the 1/log N factor on S2:
///   S1 ~ phi(W)^k N (log R)^k I / W^(k+1)
///   S2 ~ phi(W)^k N (log R)^(k+1) sum_j J^(j) / (W^(k+1) log N)
inline std::pair<double, double> predicted_S1_S2(const SieveParams& params, const PolyF& F) {
    const Rational I = compute_I(F);
    if (sgn(I) == 0) throw DegenerateFError();
    Rational J = 0;
    for (unsigned j = 0; j < F.dim(); ++j) {
        Rational Jj = compute_Jj(F, j);
        if (sgn(Jj) == 0) throw std::domain_error("degenerate F: some J_k^(j)(F) = 0");
        J += Jj;
    }
    const double k = params.k;
    const double logN = std::log(static_cast<double>(params.N));
    const double scale = std::exp(k * std::log(static_cast<double>(euler_phi(params.W))) -
                                  (k + 1) * std::log(static_cast<double>(params.W))) *
                         static_cast<double>(params.N) * std::pow(params.log_R, k);
    return {scale * I.get_d(), scale * params.log_R * J.get_d() / logN};
}

template <typename V>
std::pair<double, double> predicted_S1_S2(const WeightContext<V>& ctx) {
    return predicted_S1_S2(ctx.params(), ctx.F());
}

namespace detail {

struct SegmentSums {
    ExactAccumulator s1, s2, s1_minus, s1_plus, s2_plus;
    std::vector<ExactAccumulator> s1p;
    u64 star = 0, terms = 0, rough = 0;
};

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.get_d(); }

}  // namespace detail

/// One pass over the window computing every sum in SumReport.
template <typename V>
SumReport measure_window(const WeightContext<V>& ctx, Window window, const SumOptions& opt = {}) {
    const SieveParams& P = ctx.params();
    if (window.hi < window.lo) throw std::invalid_argument("window upper end below lower end");
    if (window.length() > opt.budget)
        throw WindowTooLargeError(window, {window.lo, window.lo + opt.budget});
    if (opt.segment == 0) throw std::invalid_argument("segment size must be positive");
    if (opt.index >= P.k) throw std::out_of_range("distinguished coordinate out of range");
    for (u64 p : opt.primes)
        if (p <= P.D0 || !is_prime(p)) throw std::domain_error("S1,p requires a prime p > D0, got " + std::to_string(p));
    const u64 h_max = static_cast<u64>(P.H.offsets().back());
    if (window.hi > std::numeric_limits<u64>::max() / 2 - h_max) throw std::overflow_error("window too close to 2^64");

    const u64 length = window.length();
    const std::size_t segments = static_cast<std::size_t>((length + opt.segment - 1) / opt.segment);
    auto parts = parallel_map(segments, opt.exec, [&](std::size_t s) {
        detail::SegmentSums acc;
        acc.s1p.resize(opt.primes.size());
        const u64 a = window.lo + s * opt.segment;
        const u64 b = std::min(window.hi, a + opt.segment);
        u64 first = a + (P.nu0 + P.W - a % P.W) % P.W;
        if (first >= b) return acc;
        const PrimeTable table = sieve_range(first, b + h_max + 1);
        // p < n^c1  <=>  p < ceil(n^c1); the threshold is monotone in n.
        const u64 t_first = root_ceiling(std::max<u64>(first, 1), P.c1);
        const u64 t_last = root_ceiling(std::max<u64>(b - 1, 1), P.c1);
        for (u64 n = first; n < b; n += P.W) {
            const double w = detail::to_double(ctx.compute_weight(n, table));
            unsigned primes_hit = 0;
            u64 least = std::numeric_limits<u64>::max();
            for (Offset h : P.H.offsets()) {
                const u64 m = n + static_cast<u64>(h);
                if (table.is_prime(m)) ++primes_hit;
                if (m >= 2) least = std::min(least, table.least_prime_factor(m));
            }
            const u64 threshold = t_first == t_last ? t_first : root_ceiling(std::max<u64>(n, 1), P.c1);
            const bool rough = least >= threshold;
            ++acc.terms;
            acc.s1.add(w);
            acc.s2.add(w * primes_hit);
            if (rough) {
                ++acc.rough;
                acc.s1_plus.add(w);
                acc.s2_plus.add(w * primes_hit);
                if (primes_hit >= opt.r_k) ++acc.star;
            } else {
                acc.s1_minus.add(w);
            }
            const u64 target = n + static_cast<u64>(P.H[opt.index]);
            for (std::size_t i = 0; i < opt.primes.size(); ++i)
                if (target % opt.primes[i] == 0) acc.s1p[i].add(w);
        }
        return acc;
    });

    detail::SegmentSums total;
    total.s1p.resize(opt.primes.size());
    for (const auto& part : parts) {
        total.s1.merge(part.s1);
        total.s2.merge(part.s2);
        total.s1_minus.merge(part.s1_minus);
        total.s1_plus.merge(part.s1_plus);
        total.s2_plus.merge(part.s2_plus);
        for (std::size_t i = 0; i < total.s1p.size(); ++i) total.s1p[i].merge(part.s1p[i]);
        total.star += part.star;
        total.terms += part.terms;
        total.rough += part.rough;
    }

    SumReport rep;
    rep.params = P;
    rep.window = window;
    rep.r_k = opt.r_k;
    rep.index = opt.index;
    rep.terms = total.terms;
    rep.rough_terms = total.rough;
    rep.S1_exact = total.s1.exact();
    rep.S2_exact = total.s2.exact();
    rep.S1_minus_exact = total.s1_minus.exact();
    rep.S1_plus_exact = total.s1_plus.exact();
    rep.S2_plus_exact = total.s2_plus.exact();
    rep.S1 = total.s1.value();
    rep.S2 = total.s2.value();
    rep.S1_minus = total.s1_minus.value();
    rep.S1_plus = total.s1_plus.value();
    rep.S2_plus = total.s2_plus.value();
    rep.S1_star = total.star;
    const u64 c1_top = root_ceiling(P.N, P.c1);
    for (std::size_t i = 0; i < opt.primes.size(); ++i) {
        S1pRecord r;
        r.p = opt.primes[i];
        r.S1p = total.s1p[i].value();
        r.S1 = rep.S1;
        r.bound = std::log(static_cast<double>(r.p)) / (static_cast<double>(r.p) * P.log_R) * rep.S1;
        r.ratio = r.bound == 0 ? 0.0 : r.S1p / r.bound;
        r.in_c1_range = r.p > P.D0 && r.p < c1_top;
        rep.s1p.push_back(r);
    }
    try {
        auto [p1, p2] = predicted_S1_S2(ctx);
        rep.predicted_S1 = p1;
        rep.predicted_S2 = p2;
    } catch (const std::domain_error&) {
        // F degenerate: measured sums are still meaningful, predictions are not.
    }
    return rep;
}

/// S1 and S2 only.
template <typename V>
std::pair<double, double> compute_S1_S2(const WeightContext<V>& ctx, Window window, const SumOptions& opt = {}) {
    SumOptions o = opt;
    o.primes.clear();
    auto rep = measure_window(ctx, window, o);
    return {rep.S1, rep.S2};
}

template <typename V>
double compute_S1_minus(const WeightContext<V>& ctx, Window window, const SumOptions& opt = {}) {
    SumOptions o = opt;
    o.primes.clear();
    return measure_window(ctx, window, o).S1_minus;
}

struct PlusStar {
    double S1_plus = 0;
    double S2_plus = 0;
    u64 S1_star = 0;
};

template <typename V>
PlusStar compute_S_plus_star(const WeightContext<V>& ctx, Window window, unsigned r_k, const SumOptions& opt = {}) {
    if (r_k < 1) throw std::domain_error("r_k must be at least 1");
    SumOptions o = opt;
    o.primes.clear();
    o.r_k = r_k;
    auto rep = measure_window(ctx, window, o);
    return {rep.S1_plus, rep.S2_plus, rep.S1_star};
}

/// (S1,p, log p / (p log R) * S1). Requires a prime p > D0; whether p also
/// lies below N^c1 is reported in the record rather than enforced.
template <typename V>
S1pRecord compute_S1p(u64 p, const WeightContext<V>& ctx, Window window, const SumOptions& opt = {}) {
    if (!is_prime(p)) throw std::domain_error("S1,p requires a prime");
    if (p <= ctx.params().D0) throw std::domain_error("S1,p requires p > D0");
    SumOptions o = opt;
    o.primes = {p};
    return measure_window(ctx, window, o).s1p.front();
}

/// The p-twisted Selberg form in the distinguished coordinate:
///   lhs = sum_{d,e} lambda_d lambda_e / ( [d_1,e_1,p]/p * prod_{i>=2} [d_i,e_i] )
///   rhs = sum_{u, p does not divide u_1} prod mu^2(u_i)/phi(u_i) * (y_u - y_{u_1 p, u_2..})^2
/// Both are sums over the full support; exact equality with WeightContext<Rational>.
template <typename V>
std::pair<V, V> tp_quadratic_form(u64 p, const WeightContext<V>& ctx) {
    if (!is_prime(p)) throw std::domain_error("tp_quadratic_form requires a prime");
    if (p <= ctx.params().D0) throw std::domain_error("tp_quadratic_form requires p > D0");
    const auto& lambda = ctx.lambda_cache();
    V lhs = V(0);
    for (const auto& [d, ld] : lambda)
        for (const auto& [e, le] : lambda) {
            u64 l1 = std::lcm(d[0], e[0]);
            if (l1 % p == 0) l1 /= p;
            u64 denom = l1;
            for (std::size_t i = 1; i < d.size(); ++i) denom *= std::lcm(d[i], e[i]);
            lhs += ld * le / static_cast<V>(denom);
        }
    V rhs = V(0);
    for (const auto& u : ctx.support()) {
        if (u[0] % p == 0) continue;
        Tuple up = u;
        up[0] *= p;
        const V diff = ctx.compute_y(u) - ctx.compute_y(up);
        rhs += diff * diff / static_cast<V>(WeightContext<V>::phi_product(u));
    }
    return {lhs, rhs};
}

}  // namespace patternsieve
