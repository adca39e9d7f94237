#pragma once

// Symmetric polynomials on R_k written as sums of
//     c * (1 - P_1)^b * P_{a_1} * ... * P_{a_r},     P_a = sum_i t_i^a,
// whose integrals over R_k have a closed form that never expands into
// monomials. This keeps k = 105 with degree-18 polynomials cheap:
//
//   int_{R_k} (1-P_1)^b prod_i P_{a_i}
//     = b! / (k + b + sum a)! * sum_{set partitions pi of the factors}
//           (k)_{|pi|} * prod_{blocks B} (sum_{i in B} a_i)!
//
// where (k)_j is the falling factorial.

#include "patternsieve/core/rational.hpp"
#include "patternsieve/variational/poly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace patternsieve {

struct SymKey {
    unsigned one_minus = 0;       // b, exponent of (1 - P_1)
    std::vector<unsigned> sums;   // power-sum indices, sorted ascending

    friend auto operator<=>(const SymKey&, const SymKey&) = default;
};

class SymPoly {
public:
    using Terms = std::map<SymKey, Rational>;

    SymPoly() = default;
    explicit SymPoly(unsigned k) : k_(k) {}

    /// c * (1 - P_1)^b * prod P_{a}.
    static SymPoly monomial(unsigned k, unsigned b, std::vector<unsigned> sums, const Rational& c = Rational(1)) {
        SymPoly f(k);
        f.add_term(b, std::move(sums), c);
        return f;
    }

    void add_term(unsigned b, std::vector<unsigned> sums, const Rational& c) {
        for (unsigned a : sums)
            if (a == 0) throw std::invalid_argument("power-sum index must be positive");
        std::sort(sums.begin(), sums.end());
        add_key(SymKey{b, std::move(sums)}, c);
    }

    unsigned dim() const { return k_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    friend SymPoly operator+(const SymPoly& f, const SymPoly& g) {
        check_dims(f, g);
        SymPoly h = f;
        for (const auto& [key, c] : g.terms_) h.add_key(key, c);
        return h;
    }

    friend SymPoly operator*(const Rational& s, const SymPoly& f) {
        SymPoly h(f.k_);
        for (const auto& [key, c] : f.terms_) h.add_key(key, s * c);
        return h;
    }

    friend SymPoly operator*(const SymPoly& f, const SymPoly& g) {
        check_dims(f, g);
        SymPoly h(f.k_);
        for (const auto& [kf, cf] : f.terms_)
            for (const auto& [kg, cg] : g.terms_) h.add_key(product_key(kf, kg), cf * cg);
        return h;
    }

    double evaluate(std::span<const double> x) const {
        if (x.size() != k_) throw std::invalid_argument("point dimension must equal k");
        std::map<unsigned, double> power_sum;
        double p1 = 0;
        for (double v : x) p1 += v;
        double total = 0;
        for (const auto& [key, c] : terms_) {
            double term = c.get_d() * std::pow(1.0 - p1, key.one_minus);
            for (unsigned a : key.sums) {
                auto it = power_sum.find(a);
                if (it == power_sum.end()) {
                    double s = 0;
                    for (double v : x) s += std::pow(v, a);
                    it = power_sum.emplace(a, s).first;
                }
                term *= it->second;
            }
            total += term;
        }
        return total;
    }

    /// Integrates out the last coordinate over [0, 1 - P_1(rest)], giving a
    /// symmetric polynomial in k - 1 variables. Uses P_a = P'_a + t^a and
    ///   int_0^s (s - t)^b t^A dt = b! A! / (A + b + 1)! * s^{A + b + 1}.
    SymPoly integrate_last() const {
        if (k_ == 0) throw std::domain_error("no coordinate to integrate out");
        SymPoly out(k_ - 1);
        for (const auto& [key, c] : terms_) {
            const std::size_t r = key.sums.size();
            for (std::size_t mask = 0; mask < (std::size_t{1} << r); ++mask) {
                unsigned moved = 0;
                std::vector<unsigned> rest;
                for (std::size_t i = 0; i < r; ++i) {
                    if (mask >> i & 1)
                        moved += key.sums[i];
                    else
                        rest.push_back(key.sums[i]);
                }
                Rational factor(factorial(moved) * factorial(key.one_minus),
                                factorial(moved + key.one_minus + 1));
                factor.canonicalize();
                out.add_key(SymKey{key.one_minus + moved + 1, std::move(rest)}, c * factor);
            }
        }
        return out;
    }

    /// Monomial expansion in k variables (only sensible for small k).
    PolyF to_poly() const {
        PolyF total(k_);
        PolyF one = PolyF::constant(k_, Rational(1));
        PolyF p1(k_);
        for (unsigned i = 0; i < k_; ++i) p1 = p1 + PolyF::coordinate(k_, i);
        PolyF one_minus = one + Rational(-1) * p1;
        for (const auto& [key, c] : terms_) {
            PolyF term = PolyF::constant(k_, c);
            for (unsigned b = 0; b < key.one_minus; ++b) term = term * one_minus;
            for (unsigned a : key.sums) {
                PolyF pa(k_);
                for (unsigned i = 0; i < k_; ++i) {
                    Exponents e(k_, 0);
                    e[i] = a;
                    pa.add_term(e, Rational(1));
                }
                term = term * pa;
            }
            total = total + term;
        }
        if (!total.is_zero()) total.mark_symmetric();
        return total;
    }

    std::string describe() const {
        std::string out;
        for (const auto& [key, c] : terms_) {
            if (!out.empty()) out += " + ";
            out += c.get_str();
            if (key.one_minus) out += "*(1-P1)^" + std::to_string(key.one_minus);
            for (unsigned a : key.sums) out += "*P" + std::to_string(a);
        }
        return out.empty() ? "0" : out;
    }

    static SymKey product_key(const SymKey& a, const SymKey& b) {
        SymKey key{a.one_minus + b.one_minus, {}};
        key.sums.reserve(a.sums.size() + b.sums.size());
        std::merge(a.sums.begin(), a.sums.end(), b.sums.begin(), b.sums.end(), std::back_inserter(key.sums));
        return key;
    }

private:
    void add_key(const SymKey& key, Rational c) {
        c.canonicalize();
        if (sgn(c) == 0) return;
        auto [it, inserted] = terms_.try_emplace(key, c);
        if (!inserted) {
            it->second += c;
            if (sgn(it->second) == 0) terms_.erase(it);
        }
    }

    static void check_dims(const SymPoly& f, const SymPoly& g) {
        if (f.k_ != g.k_) throw std::invalid_argument("polynomial dimensions differ");
    }

    unsigned k_ = 0;
    Terms terms_;
};

/// Closed-form integrals of symmetric terms over R_k. The set-partition
/// sums depend only on the multiset of power-sum indices and are memoized;
/// safe to share between threads.
class SimplexIntegrator {
public:
    /// Entry j: sum over set partitions with j blocks of prod (block sum)!.
    using BlockCounts = std::vector<Integer>;

    const BlockCounts& partition_sums(const std::vector<unsigned>& sums) const {
        {
            std::lock_guard lock(mutex_);
            if (auto it = memo_.find(sums); it != memo_.end()) return it->second;
        }
        BlockCounts result = compute(sums);
        std::lock_guard lock(mutex_);
        return memo_.try_emplace(sums, std::move(result)).first->second;
    }

    Rational integrate(unsigned k, const SymKey& key) const {
        const auto& counts = partition_sums(key.sums);
        Integer total = 0, falling = 1;
        for (std::size_t j = 0; j < counts.size(); ++j) {
            if (j > 0) {
                if (j > k) break;
                falling *= static_cast<unsigned long>(k - (j - 1));
            }
            total += falling * counts[j];
        }
        unsigned long degree = key.one_minus + k;
        for (unsigned a : key.sums) degree += a;
        Rational q(total * factorial(key.one_minus), factorial(degree));
        q.canonicalize();
        return q;
    }

    Rational integrate(const SymPoly& f) const {
        Rational total = 0;
        for (const auto& [key, c] : f.terms()) total += c * integrate(f.dim(), key);
        return total;
    }

private:
    BlockCounts compute(const std::vector<unsigned>& sums) const {
        if (sums.empty()) return {Integer(1)};
        const unsigned first = sums.front();
        const std::size_t n = sums.size() - 1;
        BlockCounts out(sums.size() + 1, Integer(0));
        // The block containing the first factor is first ∪ S for a subset S of the rest.
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            unsigned block = first;
            std::vector<unsigned> rest;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask >> i & 1)
                    block += sums[i + 1];
                else
                    rest.push_back(sums[i + 1]);
            }
            const BlockCounts& sub = partition_sums(rest);
            Integer f = factorial(block);
            for (std::size_t j = 0; j < sub.size(); ++j) out[j + 1] += f * sub[j];
        }
        return out;
    }

    mutable std::mutex mutex_;
    mutable std::map<std::vector<unsigned>, BlockCounts> memo_;
};

/// I_k(F) for a symmetric F.
inline Rational compute_I(const SymPoly& f, const SimplexIntegrator& integ = {}) {
    return integ.integrate(f * f);
}

/// J_k^(j)(F); independent of j by symmetry.
inline Rational compute_Jj(const SymPoly& f, unsigned j, const SimplexIntegrator& integ = {}) {
    if (j >= f.dim()) throw std::out_of_range("J index out of range");
    SymPoly inner = f.integrate_last();
    return integ.integrate(inner * inner);
}

inline Rational rayleigh_ratio(const SymPoly& f, const SimplexIntegrator& integ = {}) {
    Rational denom = compute_I(f, integ);
    if (sgn(denom) == 0) throw DegenerateFError();
    return Rational(f.dim()) * compute_Jj(f, 0, integ) / denom;
}

}  // namespace patternsieve
