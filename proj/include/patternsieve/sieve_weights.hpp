#pragma once

// Multidimensional Selberg sieve weights
//     w_n = ( sum_{d_i | n + h_i} lambda_{d_1..d_k} )^2,
//     lambda_d = (prod mu(d_i) d_i) sum_{r : d_i | r_i} mu(prod r_i)^2 / prod phi(r_i) * y_r,
//     y_r = F(log r_1 / log R, ..., log r_k / log R),
// supported on squarefree, pairwise coprime tuples coprime to W with
// prod r_i < R.
//
// WeightContext<double> is the production path. WeightContext<Rational>
// replaces log r / log R by a rational grid point, so every identity that
// is algebraic in y can be checked with exact equality.

#include "patternsieve/admissible.hpp"
#include "patternsieve/core/arith.hpp"
#include "patternsieve/core/prime_table.hpp"
#include "patternsieve/core/rational.hpp"
#include "patternsieve/variational/optimize.hpp"
#include "patternsieve/variational/poly.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace patternsieve {

using Tuple = std::vector<u64>;

struct SieveParams {
    unsigned k = 0;
    AdmissibleTuple H;
    u64 N = 0;
    Rational theta;
    Rational epsilon;
    double R = 0;       // N^(theta/2 - epsilon)
    u64 R_bound = 0;    // ceil(R): for integers x, x < R  <=>  x < R_bound
    double log_R = 0;
    u64 D0 = 0;
    u64 W = 1;
    u64 nu0 = 0;
    Rational c1;
};

/// Validates ranges and derives R, W and nu0.
inline SieveParams build_params(unsigned k, const AdmissibleTuple& H, u64 N, const Rational& theta,
                                const Rational& epsilon, u64 D0, const Rational& c1) {
    if (k == 0 || H.size() != k) throw std::domain_error("tuple size must equal k");
    if (!H.admissible())
        throw std::domain_error("tuple is inadmissible modulo " + std::to_string(*H.verdict().witness_prime));
    if (sgn(theta) <= 0 || theta > 1) throw std::domain_error("theta must lie in (0, 1]");
    const Rational exponent = theta / 2 - epsilon;
    if (sgn(epsilon) <= 0 || sgn(exponent) <= 0) throw std::domain_error("epsilon must satisfy 0 < epsilon < theta/2");
    if (sgn(c1) <= 0 || c1 >= 1) throw std::domain_error("c1 must lie in (0, 1)");
    if (N < 2) throw std::domain_error("N must be at least 2");
    SieveParams p;
    p.k = k;
    p.H = H;
    p.N = N;
    p.theta = theta;
    p.epsilon = epsilon;
    p.log_R = exponent.get_d() * std::log(static_cast<double>(N));
    p.R = std::exp(p.log_R);
    p.R_bound = root_ceiling(N, exponent);
    if (p.R_bound < 2) throw std::domain_error("R must exceed 1");
    p.D0 = D0;
    if (D0 > 52) throw std::domain_error("D0 too large: W must fit in 64 bits");
    p.W = primorial_u64(D0);
    p.nu0 = find_nu0(H, p.W);
    p.c1 = c1;
    return p;
}

/// Same parameters with R replaced by an explicit integer (small-R identity checks).
inline SieveParams with_integer_R(SieveParams p, u64 R) {
    if (R < 2) throw std::domain_error("R must exceed 1");
    p.R = static_cast<double>(R);
    p.R_bound = R;
    p.log_R = std::log(static_cast<double>(R));
    return p;
}

namespace detail {

/// Squarefree divisors of m (given its distinct prime factors), ascending.
inline std::vector<u64> squarefree_divisors(const std::vector<u64>& primes, u64 bound) {
    std::vector<u64> divs{1};
    for (u64 p : primes) {
        const std::size_t n = divs.size();
        for (std::size_t i = 0; i < n; ++i)
            if (static_cast<u128>(divs[i]) * p < bound) divs.push_back(divs[i] * p);
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

inline bool coprime_to(u64 a, u64 b) { return std::gcd(a, b) == 1; }

}  // namespace detail

template <typename V>
class WeightContext {
public:
    static_assert(std::is_same_v<V, double> || std::is_same_v<V, Rational>);

    static constexpr u64 kGrid = u64{1} << 16;

    WeightContext(SieveParams params, PolyF F) : params_(std::move(params)), F_(std::move(F)) {
        if (F_.dim() != params_.k) throw std::invalid_argument("F dimension must equal k");
        enumerate_support();
        for (const auto& r : support_) y_cache_.emplace(r, evaluate_y(r));
        build_lambda();
    }

    const SieveParams& params() const { return params_; }
    const PolyF& F() const { return F_; }
    double log_R() const { return params_.log_R; }

    /// Supported tuples (squarefree, pairwise coprime, coprime to W, product < R), sorted.
    const std::vector<Tuple>& support() const { return support_; }
    const std::map<Tuple, V>& lambda_cache() const { return lambda_cache_; }
    const std::map<Tuple, V>& y_cache() const { return y_cache_; }

    bool supported(const Tuple& r) const {
        if (r.size() != params_.k) return false;
        u128 prod = 1;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (r[i] == 0 || r[i] >= params_.R_bound) return false;
            if (!is_squarefree(r[i]) || !detail::coprime_to(r[i], params_.W)) return false;
            for (std::size_t j = 0; j < i; ++j)
                if (!detail::coprime_to(r[i], r[j])) return false;
            prod *= r[i];
            if (prod >= params_.R_bound) return false;
        }
        return true;
    }

    /// Point of the simplex at which y_r samples F.
    V coordinate(u64 r) const {
        double x = std::log(static_cast<double>(r)) / params_.log_R;
        if constexpr (std::is_same_v<V, double>) {
            return x;
        } else {
            Rational q(static_cast<long>(std::llround(x * static_cast<double>(kGrid))), static_cast<unsigned long>(kGrid));
            q.canonicalize();
            return q;
        }
    }

    V compute_y(const Tuple& r) const {
        if (!supported(r)) return V(0);
        if (auto it = y_cache_.find(r); it != y_cache_.end()) return it->second;
        return evaluate_y(r);
    }

    V compute_lambda(const Tuple& d) const {
        if (!supported(d)) return V(0);
        auto it = lambda_cache_.find(d);
        return it == lambda_cache_.end() ? V(0) : it->second;
    }

    /// lambda_d straight from the defining sum over the support; used to
    /// spot-check the cache.
    V lambda_direct(const Tuple& d) const {
        if (!supported(d)) return V(0);
        V sum = V(0);
        for (const auto& r : support_) {
            bool divides = true;
            for (std::size_t i = 0; i < d.size() && divides; ++i) divides = r[i] % d[i] == 0;
            if (!divides) continue;
            sum += y_cache_.at(r) / static_cast<V>(phi_product(r));
        }
        return mu_d_product(d) * sum;
    }

    /// w_n for a single n; factors n + h_i directly.
    V compute_weight(u64 n) const {
        return weight_with([](u64 m) { return prime_factors(m); }, n);
    }

    /// w_n with factorizations read from a prime table covering n + h_i.
    V compute_weight(u64 n, const PrimeTable& table) const {
        return weight_with(
            [&](u64 m) {
                std::vector<u64> ps;
                while (m > 1) {
                    u64 p = table.contains(m) ? table.least_prime_factor(m) : smallest_prime_factor(m);
                    ps.push_back(p);
                    while (m % p == 0) m /= p;
                }
                return ps;
            },
            n);
    }

    /// Divisor tuples d with d_i | n + h_i and lambda_d possibly nonzero.
    template <typename Factor>
    std::vector<std::vector<u64>> candidate_divisors(u64 n, Factor&& factor) const {
        std::vector<std::vector<u64>> divs(params_.k);
        for (unsigned i = 0; i < params_.k; ++i) {
            const u64 h = static_cast<u64>(params_.H[i]);
            if (n > std::numeric_limits<u64>::max() - h) throw std::overflow_error("n + h_i exceeds 64 bits");
            std::vector<u64> primes;
            for (u64 p : factor(n + h))
                if (params_.W % p != 0) primes.push_back(p);
            divs[i] = detail::squarefree_divisors(primes, params_.R_bound);
        }
        return divs;
    }

    static u64 phi_product(const Tuple& r) {
        u64 out = 1;
        for (u64 v : r) out *= euler_phi(v);
        return out;
    }

    static V mu_d_product(const Tuple& d) {
        long s = 1;
        for (u64 v : d) s *= mobius(v) * static_cast<long>(v);
        return static_cast<V>(s);
    }

private:
    template <typename Factor>
    V weight_with(Factor&& factor, u64 n) const {
        if (n % params_.W != params_.nu0) return V(0);
        const auto divs = candidate_divisors(n, factor);
        V sum = V(0);
        Tuple d(params_.k, 1);
        std::function<void(unsigned, u64)> rec = [&](unsigned i, u64 prod) {
            if (i == params_.k) {
                if (auto it = lambda_cache_.find(d); it != lambda_cache_.end()) sum += it->second;
                return;
            }
            for (u64 v : divs[i]) {
                if (static_cast<u128>(prod) * v >= params_.R_bound) break;
                bool ok = true;
                for (unsigned j = 0; j < i && ok; ++j) ok = detail::coprime_to(v, d[j]);
                if (!ok) continue;
                d[i] = v;
                rec(i + 1, prod * v);
            }
            d[i] = 1;
        };
        rec(0, 1);
        return sum * sum;
    }

    V evaluate_y(const Tuple& r) const {
        std::vector<V> x(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) x[i] = coordinate(r[i]);
        return F_.template evaluate<V>(std::span<const V>(x));
    }

    void enumerate_support() {
        std::vector<u64> candidates;
        for (u64 v = 1; v < params_.R_bound; ++v)
            if (is_squarefree(v) && detail::coprime_to(v, params_.W)) candidates.push_back(v);
        Tuple r(params_.k, 1);
        std::function<void(unsigned, u64)> rec = [&](unsigned i, u64 prod) {
            if (i == params_.k) {
                support_.push_back(r);
                return;
            }
            for (u64 v : candidates) {
                if (static_cast<u128>(prod) * v >= params_.R_bound) break;
                bool ok = true;
                for (unsigned j = 0; j < i && ok; ++j) ok = detail::coprime_to(v, r[j]);
                if (!ok) continue;
                r[i] = v;
                rec(i + 1, prod * v);
            }
            r[i] = 1;
        };
        rec(0, 1);
        std::sort(support_.begin(), support_.end());
    }

    void build_lambda() {
        std::map<Tuple, V> acc;
        for (const auto& r : support_) {
            const V weight = y_cache_.at(r) / static_cast<V>(phi_product(r));
            // Every d with d_i | r_i is itself supported.
            std::vector<std::vector<u64>> divs(params_.k);
            for (unsigned i = 0; i < params_.k; ++i) divs[i] = detail::squarefree_divisors(prime_factors_or_empty(r[i]), r[i] + 1);
            Tuple d(params_.k, 1);
            std::function<void(unsigned)> rec = [&](unsigned i) {
                if (i == params_.k) {
                    auto [it, inserted] = acc.try_emplace(d, weight);
                    if (!inserted) it->second += weight;
                    return;
                }
                for (u64 v : divs[i]) {
                    d[i] = v;
                    rec(i + 1);
                }
                d[i] = 1;
            };
            rec(0);
        }
        for (auto& [d, s] : acc) lambda_cache_.emplace(d, mu_d_product(d) * s);
    }

    static std::vector<u64> prime_factors_or_empty(u64 v) { return v <= 1 ? std::vector<u64>{} : prime_factors(v); }

    SieveParams params_;
    PolyF F_;
    std::vector<Tuple> support_;
    std::map<Tuple, V> y_cache_;
    std::map<Tuple, V> lambda_cache_;
};

/// Selberg diagonalization: sum_{d,e} lambda_d lambda_e / prod [d_i, e_i]
/// against sum_r y_r^2 / prod phi(r_i). Both sides are returned; for
/// WeightContext<Rational> they are equal as rationals.
template <typename V>
std::pair<V, V> selberg_quadratic_form(const WeightContext<V>& ctx) {
    V lhs = V(0);
    const auto& lambda = ctx.lambda_cache();
    for (const auto& [d, ld] : lambda)
        for (const auto& [e, le] : lambda) {
            u64 lcm_prod = 1;
            for (std::size_t i = 0; i < d.size(); ++i) lcm_prod *= std::lcm(d[i], e[i]);
            lhs += ld * le / static_cast<V>(lcm_prod);
        }
    V rhs = V(0);
    for (const auto& [r, y] : ctx.y_cache()) rhs += y * y / static_cast<V>(WeightContext<V>::phi_product(r));
    return {lhs, rhs};
}

/// F used for the weights: the certified optimizer output for the given
/// basis degree (degree 0 is F = 1), expanded into monomials.
inline PolyF weight_function(unsigned k, unsigned degree) {
    if (degree == 0) {
        PolyF one = PolyF::constant(k, Rational(1));
        one.mark_symmetric();
        return one;
    }
    if (k > 10) throw std::domain_error("non-constant weight function limited to k <= 10");
    OptimizeOptions opts;
    opts.exec.threads = 1;
    // Power sums beyond P_k are polynomial in P_1..P_k, so cap the generators at k.
    return optimize_Mk(k, BasisSpec{degree, std::min(3u, k)}, Rational(1, 2), opts).reconstruct().to_poly();
}

}  // namespace patternsieve
