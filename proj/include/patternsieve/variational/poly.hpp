#pragma once

// Polynomials on the simplex R_k = {t in [0,1]^k : sum t_i <= 1} and the
// exact functionals I_k(F) = int F^2 and J_k^(j)(F) = int (int F dt_j)^2.
//
// Every integral reduces to the Dirichlet formula
//     int_{R_n} (1 - P_1)^b prod t_i^{a_i} dt = b! prod a_i! / (n + b + sum a_i)!
// which is why intermediate results are kept as sums of such terms.

#include "patternsieve/core/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace patternsieve {

using Exponents = std::vector<unsigned>;

class DegenerateFError : public std::domain_error {
public:
    DegenerateFError() : std::domain_error("degenerate F: I_k(F) = 0") {}
};

/// int_{R_k} prod t_i^{a_i} dt = prod a_i! / (k + sum a_i)!
inline Rational simplex_monomial_integral(unsigned k, const Exponents& exponents) {
    if (exponents.size() != k) throw std::invalid_argument("exponent vector length must equal k");
    Integer num = 1;
    unsigned long total = k;
    for (unsigned a : exponents) {
        num *= factorial(a);
        total += a;
    }
    Rational q(num, factorial(total));
    q.canonicalize();
    return q;
}

/// int_{R_k} (1 - sum t_i)^b prod t_i^{a_i} dt
inline Rational dirichlet_integral(unsigned b, const Exponents& exponents) {
    Integer num = factorial(b);
    unsigned long total = b + exponents.size();
    for (unsigned a : exponents) {
        num *= factorial(a);
        total += a;
    }
    Rational q(num, factorial(total));
    q.canonicalize();
    return q;
}

/// Sparse polynomial F(t_1..t_k) with rational coefficients, understood as
/// supported on R_k and zero outside.
class PolyF {
public:
    using Terms = std::map<Exponents, Rational>;

    PolyF() = default;
    explicit PolyF(unsigned k) : k_(k) {}

    static PolyF constant(unsigned k, const Rational& c) {
        PolyF f(k);
        f.add_term(Exponents(k, 0), c);
        return f;
    }

    /// The coordinate function t_i.
    static PolyF coordinate(unsigned k, unsigned i) {
        if (i >= k) throw std::out_of_range("coordinate index out of range");
        PolyF f(k);
        Exponents e(k, 0);
        e[i] = 1;
        f.add_term(e, Rational(1));
        return f;
    }

    void add_term(const Exponents& e, Rational c) {
        if (e.size() != k_) throw std::invalid_argument("exponent vector length must equal k");
        c.canonicalize();
        if (sgn(c) == 0) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (sgn(it->second) == 0) terms_.erase(it);
        }
        symmetric_ = false;
    }

    unsigned dim() const { return k_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t degree() const {
        std::size_t d = 0;
        for (const auto& [e, c] : terms_) {
            std::size_t s = 0;
            for (unsigned a : e) s += a;
            d = std::max(d, s);
        }
        return d;
    }

    /// True iff the term map is closed under coordinate permutations.
    bool check_symmetric() const {
        for (const auto& [e, c] : terms_) {
            Exponents sorted = e;
            std::sort(sorted.begin(), sorted.end());
            do {
                auto it = terms_.find(sorted);
                if (it == terms_.end() || it->second != c) return false;
            } while (std::next_permutation(sorted.begin(), sorted.end()));
        }
        return true;
    }

    bool symmetric() const { return symmetric_; }
    void mark_symmetric() {
        if (!check_symmetric()) throw std::domain_error("term map is not permutation-closed");
        symmetric_ = true;
    }

    template <typename V>
    V evaluate(std::span<const V> x) const {
        if (x.size() != k_) throw std::invalid_argument("point dimension must equal k");
        V sum = V(0);
        for (const auto& [e, c] : terms_) {
            V term = coefficient_as<V>(c);
            for (std::size_t i = 0; i < k_; ++i)
                for (unsigned a = 0; a < e[i]; ++a) term *= x[i];
            sum += term;
        }
        return sum;
    }

    friend PolyF operator+(const PolyF& f, const PolyF& g) {
        check_dims(f, g);
        PolyF h = f;
        for (const auto& [e, c] : g.terms_) h.add_term(e, c);
        h.symmetric_ = f.symmetric_ && g.symmetric_;
        return h;
    }

    friend PolyF operator*(const PolyF& f, const PolyF& g) {
        check_dims(f, g);
        PolyF h(f.k_);
        Exponents e(f.k_);
        for (const auto& [ef, cf] : f.terms_)
            for (const auto& [eg, cg] : g.terms_) {
                for (unsigned i = 0; i < f.k_; ++i) e[i] = ef[i] + eg[i];
                h.add_term(e, cf * cg);
            }
        h.symmetric_ = f.symmetric_ && g.symmetric_;
        return h;
    }

    friend PolyF operator*(const Rational& s, const PolyF& f) {
        PolyF h(f.k_);
        for (const auto& [e, c] : f.terms_) h.add_term(e, s * c);
        h.symmetric_ = f.symmetric_;
        return h;
    }

private:
    template <typename V>
    static V coefficient_as(const Rational& c) {
        if constexpr (std::is_same_v<V, Rational>)
            return c;
        else
            return static_cast<V>(c.get_d());
    }

    static void check_dims(const PolyF& f, const PolyF& g) {
        if (f.k_ != g.k_) throw std::invalid_argument("polynomial dimensions differ");
    }

    unsigned k_ = 0;
    Terms terms_;
    bool symmetric_ = false;
};

namespace detail {

/// Sum of c * (1 - P_1)^b * prod t^a over n variables.
using DirichletTerms = std::map<std::pair<unsigned, Exponents>, Rational>;

inline void accumulate(DirichletTerms& out, unsigned b, const Exponents& e, const Rational& c) {
    if (sgn(c) == 0) return;
    auto [it, inserted] = out.try_emplace({b, e}, c);
    if (!inserted) {
        it->second += c;
        if (sgn(it->second) == 0) out.erase(it);
    }
}

inline DirichletTerms square(const DirichletTerms& f) {
    DirichletTerms out;
    for (auto i = f.begin(); i != f.end(); ++i) {
        const auto& [bi, ei] = i->first;
        Exponents e(ei.size());
        for (auto j = i; j != f.end(); ++j) {
            const auto& [bj, ej] = j->first;
            for (std::size_t t = 0; t < e.size(); ++t) e[t] = ei[t] + ej[t];
            Rational c = i->second * j->second;
            if (i != j) c *= 2;
            accumulate(out, bi + bj, e, c);
        }
    }
    return out;
}

inline Rational integrate(const DirichletTerms& f) {
    Rational total = 0;
    for (const auto& [key, c] : f) total += c * dirichlet_integral(key.first, key.second);
    return total;
}

}  // namespace detail

/// I_k(F) = int_{R_k} F^2, exact.
inline Rational compute_I(const PolyF& f) {
    detail::DirichletTerms terms;
    for (const auto& [e, c] : f.terms()) detail::accumulate(terms, 0, e, c);
    return detail::integrate(detail::square(terms));
}

/// J_k^(j)(F) for 0-based coordinate j: integrate F over
/// t_j in [0, 1 - sum_{i != j} t_i], square, integrate over R_{k-1}.
inline Rational compute_Jj(const PolyF& f, unsigned j) {
    if (j >= f.dim()) throw std::out_of_range("J index out of range");
    // int_0^s t^a dt = s^{a+1}/(a+1) with s = 1 - P_1 of the remaining coordinates.
    detail::DirichletTerms inner;
    for (const auto& [e, c] : f.terms()) {
        Exponents rest;
        rest.reserve(e.size() - 1);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (i != j) rest.push_back(e[i]);
        detail::accumulate(inner, e[j] + 1, rest, c / Rational(e[j] + 1));
    }
    return detail::integrate(detail::square(inner));
}

/// sum_j J_k^(j)(F) / I_k(F), exact.
inline Rational rayleigh_ratio(const PolyF& f) {
    Rational denom = compute_I(f);
    if (sgn(denom) == 0) throw DegenerateFError();
    Rational num = 0;
    if (f.symmetric()) {
        num = Rational(f.dim()) * compute_Jj(f, 0);
    } else {
        for (unsigned j = 0; j < f.dim(); ++j) num += compute_Jj(f, j);
    }
    return num / denom;
}

}  // namespace patternsieve
