#pragma once

// Lower bounds for M_k = sup sum_j J_k^(j)(F) / I_k(F) over a finite
// symmetric basis, certified in exact arithmetic.
//
// Pipeline: exact rational Gram matrices for both quadratic forms; a
// high-precision Cholesky of the I-form to orthonormalize the basis (the
// raw basis is extremely ill-conditioned, cond ~ 1e30 at k = 105); a
// double-precision symmetric eigen-solve in the orthonormal coordinates;
// continued-fraction rounding of the eigenvector; exact re-evaluation of
// the Rayleigh quotient of the resulting F.

#include "patternsieve/core/parallel.hpp"
#include "patternsieve/core/rational.hpp"
#include "patternsieve/variational/symmetric.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace patternsieve {

class BasisDegeneracyError : public std::domain_error {
public:
    explicit BasisDegeneracyError(std::size_t index)
        : std::domain_error("basis is linearly dependent on R_k (pivot " + std::to_string(index) +
                            "); reduce the basis"),
          index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

/// Symmetric basis generated by P_1, (1 - P_1) and P_2..P_{max_power_sum},
/// each generator raised to at most `degree`. Because P_1 = 1 - (1 - P_1),
/// the span is that of (1 - P_1)^j * prod_{a >= 2} P_a^{c_a} with
/// j <= 2 * degree and every c_a <= degree. degree = 0 is the constant basis.
struct BasisSpec {
    unsigned degree = 3;
    unsigned max_power_sum = 3;

    std::vector<SymKey> keys() const {
        std::vector<SymKey> out;
        const unsigned extra = max_power_sum >= 2 ? max_power_sum - 1 : 0;
        std::vector<unsigned> exps(extra, 0);
        for (unsigned j = 0; j <= 2 * degree; ++j) {
            std::fill(exps.begin(), exps.end(), 0u);
            while (true) {
                SymKey key{j, {}};
                for (unsigned a = 0; a < extra; ++a) key.sums.insert(key.sums.end(), exps[a], a + 2);
                out.push_back(std::move(key));
                std::size_t pos = 0;
                while (pos < extra && exps[pos] == degree) exps[pos++] = 0;
                if (pos == extra) break;
                ++exps[pos];
            }
        }
        return out;
    }

    std::string describe() const {
        std::string out = "(1-P1)^j";
        for (unsigned a = 2; a <= max_power_sum; ++a) out += " * P" + std::to_string(a) + "^c" + std::to_string(a);
        out += ", j<=" + std::to_string(2 * degree);
        if (max_power_sum >= 2) out += ", c_a<=" + std::to_string(degree);
        return out;
    }

    friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

struct OptimizeOptions {
    unsigned precision_bits = 2048;
    std::uint64_t denominator_cap = 1'000'000;
    double residual_tolerance = 1e-10;
    Exec exec{};
};

struct VariationalResult {
    unsigned k = 0;
    Rational theta;
    BasisSpec basis;
    std::vector<SymKey> basis_terms;
    std::vector<Rational> coefficients;  // F = sum coefficients[i] * basis_terms[i]
    Rational M_lower;                    // certified: exact Rayleigh quotient of F
    unsigned long r_k = 0;
    double eigenvalue = 0;               // floating optimum before rounding
    double residual = 0;

    SymPoly reconstruct() const {
        SymPoly f(k);
        for (std::size_t i = 0; i < basis_terms.size(); ++i)
            f = f + SymPoly::monomial(k, basis_terms[i].one_minus, basis_terms[i].sums, coefficients[i]);
        return f;
    }
};

/// ceil(theta * M / 2), exact.
inline unsigned long compute_rk(const Rational& M, const Rational& theta) {
    if (sgn(M) <= 0) throw std::domain_error("compute_rk requires M > 0");
    if (sgn(theta) <= 0 || theta > 1) throw std::domain_error("compute_rk requires 0 < theta <= 1");
    return ceil(theta * M / 2).get_ui();
}

/// Exact Gram matrices of the two quadratic forms over a basis.
struct QuadraticForms {
    std::vector<std::vector<Rational>> numerator;    // sum_j J^(j)(f_a, f_b)
    std::vector<std::vector<Rational>> denominator;  // I(f_a, f_b)
};

inline QuadraticForms assemble_forms(unsigned k, const std::vector<SymKey>& basis, const Exec& exec = {},
                                     const SimplexIntegrator& integ = {}) {
    if (k == 0) throw std::domain_error("k must be positive");
    const std::size_t n = basis.size();
    std::vector<SymPoly> inner;
    inner.reserve(n);
    for (const auto& key : basis) inner.push_back(SymPoly::monomial(k, key.one_minus, key.sums).integrate_last());
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) pairs.emplace_back(a, b);
    auto entries = parallel_map(pairs.size(), exec, [&](std::size_t idx) {
        auto [a, b] = pairs[idx];
        Rational i_ab = integ.integrate(k, SymPoly::product_key(basis[a], basis[b]));
        Rational j_ab = Rational(k) * integ.integrate(inner[a] * inner[b]);
        return std::pair{std::move(j_ab), std::move(i_ab)};
    });
    QuadraticForms forms;
    forms.numerator.assign(n, std::vector<Rational>(n));
    forms.denominator.assign(n, std::vector<Rational>(n));
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        auto [a, b] = pairs[idx];
        forms.numerator[a][b] = forms.numerator[b][a] = entries[idx].first;
        forms.denominator[a][b] = forms.denominator[b][a] = entries[idx].second;
    }
    return forms;
}

namespace detail {

using BigMatrix = std::vector<std::vector<mpf_class>>;

inline BigMatrix to_big(const std::vector<std::vector<Rational>>& m, unsigned prec) {
    BigMatrix out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (const auto& v : m[i]) out[i].emplace_back(v, prec);
    return out;
}

// Inverse of the Cholesky factor of a symmetric positive definite matrix.
inline BigMatrix inverse_cholesky(const BigMatrix& b, unsigned prec) {
    const std::size_t n = b.size();
    BigMatrix l(n, std::vector<mpf_class>(n, mpf_class(0, prec)));
    mpf_class threshold(1, prec);
    mpf_div_2exp(threshold.get_mpf_t(), threshold.get_mpf_t(), prec / 2);
    for (std::size_t j = 0; j < n; ++j) {
        mpf_class s(b[j][j], prec);
        for (std::size_t m = 0; m < j; ++m) s -= l[j][m] * l[j][m];
        if (s <= threshold * b[j][j]) throw BasisDegeneracyError(j);
        l[j][j] = sqrt(s);
        for (std::size_t i = j + 1; i < n; ++i) {
            mpf_class t(b[i][j], prec);
            for (std::size_t m = 0; m < j; ++m) t -= l[i][m] * l[j][m];
            l[i][j] = t / l[j][j];
        }
    }
    BigMatrix t(n, std::vector<mpf_class>(n, mpf_class(0, prec)));
    for (std::size_t i = 0; i < n; ++i) {
        t[i][i] = mpf_class(1, prec) / l[i][i];
        for (std::size_t j = 0; j < i; ++j) {
            mpf_class s(0, prec);
            for (std::size_t m = j; m < i; ++m) s += l[i][m] * t[m][j];
            t[i][j] = -s / l[i][i];
        }
    }
    return t;
}

}  // namespace detail

/// Certified lower bound for M_k over the given symmetric basis.
inline VariationalResult optimize_Mk(unsigned k, const BasisSpec& basis, const Rational& theta,
                                     const OptimizeOptions& options = {}) {
    if (k == 0) throw std::domain_error("k must be positive");
    if (sgn(theta) <= 0 || theta > 1) throw std::domain_error("theta must lie in (0, 1]");
    const auto keys = basis.keys();
    const std::size_t n = keys.size();
    SimplexIntegrator integ;
    const QuadraticForms forms = assemble_forms(k, keys, options.exec, integ);
    const unsigned prec = options.precision_bits;

    const detail::BigMatrix t = detail::inverse_cholesky(detail::to_big(forms.denominator, prec), prec);
    const detail::BigMatrix a = detail::to_big(forms.numerator, prec);

    // C = T A T^T in orthonormal coordinates; T is lower triangular.
    auto rows = parallel_map(n, options.exec, [&](std::size_t i) {
        std::vector<mpf_class> ta(n, mpf_class(0, prec));
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t m = 0; m <= i; ++m) ta[c] += t[i][m] * a[m][c];
        std::vector<double> row(n);
        for (std::size_t j = 0; j < n; ++j) {
            mpf_class s(0, prec);
            for (std::size_t m = 0; m <= j; ++m) s += ta[m] * t[j][m];
            row[j] = s.get_d();
        }
        return row;
    });
    Eigen::MatrixXd c(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.5 * (rows[i][j] + rows[j][i]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigen-solve did not converge");
    const Eigen::Index top = static_cast<Eigen::Index>(n) - 1;
    const double lambda = solver.eigenvalues()(top);
    Eigen::VectorXd y = solver.eigenvectors().col(top);
    Eigen::Index pivot = 0;
    y.cwiseAbs().maxCoeff(&pivot);
    if (y(pivot) < 0) y = -y;
    const double residual = (c * y - lambda * y).norm();
    if (residual > options.residual_tolerance * std::max(1.0, std::abs(lambda)))
        throw std::runtime_error("eigenvector residual above tolerance");

    std::vector<Rational> yq(n);
    for (std::size_t i = 0; i < n; ++i) yq[i] = rationalize(y(static_cast<Eigen::Index>(i)), options.denominator_cap);

    VariationalResult result;
    result.k = k;
    result.theta = theta;
    result.basis = basis;
    result.basis_terms = keys;
    result.coefficients.assign(n, Rational(0));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j; i < n; ++i)
            if (sgn(yq[i]) != 0) result.coefficients[j] += Rational(t[i][j]) * yq[i];
    result.eigenvalue = lambda;
    result.residual = residual;
    result.M_lower = rayleigh_ratio(result.reconstruct(), integ);
    result.r_k = compute_rk(result.M_lower, theta);
    return result;
}

}  // namespace patternsieve
