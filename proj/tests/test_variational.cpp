#include "patternsieve/variational/optimize.hpp"
#include "patternsieve/variational/poly.hpp"
#include "patternsieve/variational/symmetric.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace patternsieve;

namespace {

SymKey random_key(std::mt19937_64& rng) {
    SymKey key{static_cast<unsigned>(rng() % 3), {}};
    const unsigned r = rng() % 3;
    for (unsigned i = 0; i < r; ++i) key.sums.push_back(1 + rng() % 3);
    std::sort(key.sums.begin(), key.sums.end());
    return key;
}

// Uniform point of R_k: first k coordinates of a flat Dirichlet(1,...,1) in k+1 parts.
std::vector<double> simplex_point(unsigned k, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> x(k + 1);
    double s = 0;
    for (double& v : x) s += (v = e(rng));
    for (double& v : x) v /= s;
    x.pop_back();
    return x;
}

}  // namespace

TEST(Simplex, MonomialIntegralKnownValues) {
    for (unsigned a = 0; a < 10; ++a) EXPECT_EQ(simplex_monomial_integral(1, {a}), Rational(1, a + 1));
    EXPECT_EQ(simplex_monomial_integral(2, {0, 0}), Rational(1, 2));
    EXPECT_EQ(simplex_monomial_integral(2, {1, 1}), Rational(1, 24));
    EXPECT_EQ(simplex_monomial_integral(3, {0, 0, 0}), Rational(1, 6));
    EXPECT_THROW(simplex_monomial_integral(3, {1, 1}), std::invalid_argument);
}

TEST(Simplex, DirichletMatchesExpansion) {
    // (1 - t1 - t2) t1 expanded by hand on R_2.
    Rational direct = dirichlet_integral(1, {1, 0});
    Rational expanded =
        simplex_monomial_integral(2, {1, 0}) - simplex_monomial_integral(2, {2, 0}) - simplex_monomial_integral(2, {1, 1});
    EXPECT_EQ(direct, expanded);
}

TEST(Simplex, MonteCarloAgreesWithClosedForm) {
    std::mt19937_64 rng(42);
    for (int c = 0; c < 6; ++c) {
        const unsigned k = 1 + c % 5;
        Exponents e(k);
        for (auto& a : e) a = rng() % 4;
        const double exact = simplex_monomial_integral(k, e).get_d();
        const int n = 200000;
        double sum = 0, sq = 0;
        for (int i = 0; i < n; ++i) {
            auto x = simplex_point(k, rng);
            double v = 1;
            for (unsigned j = 0; j < k; ++j) v *= std::pow(x[j], e[j]);
            v /= std::tgamma(k + 1.0);  // density of the uniform law is k!
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n, sd = std::sqrt((sq / n - mean * mean) / n);
        EXPECT_LE(std::abs(mean - exact), 5 * sd + 1e-15) << "case " << c;
    }
}

TEST(SymPoly, ClosedFormMatchesMonomialExpansion) {
    std::mt19937_64 rng(17);
    SimplexIntegrator integ;
    for (int t = 0; t < 60; ++t) {
        const unsigned k = 1 + rng() % 4;
        SymKey key = random_key(rng);
        SymPoly f = SymPoly::monomial(k, key.one_minus, key.sums, make_rational(static_cast<long>(1 + rng() % 5), static_cast<long>(1 + rng() % 3)));
        const PolyF g = f.to_poly();
        Rational via_monomials = 0;
        for (const auto& [e, c] : g.terms()) via_monomials += c * simplex_monomial_integral(k, e);
        EXPECT_EQ(integ.integrate(f), via_monomials) << f.describe() << " k=" << k;
    }
}

TEST(SymPoly, FunctionalsMatchPolyF) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 25; ++t) {
        const unsigned k = 2 + rng() % 3;
        SymPoly f(k);
        for (int j = 0; j < 3; ++j) {
            SymKey key = random_key(rng);
            f = f + SymPoly::monomial(k, key.one_minus, key.sums, make_rational(static_cast<long>(rng() % 7) - 3, 2));
        }
        if (f.is_zero()) continue;
        const PolyF g = f.to_poly();
        EXPECT_TRUE(g.symmetric());
        EXPECT_EQ(compute_I(f), compute_I(g));
        EXPECT_EQ(compute_Jj(f, 0), compute_Jj(g, 0));
        EXPECT_EQ(compute_Jj(g, 0), compute_Jj(g, k - 1));
        EXPECT_EQ(rayleigh_ratio(f), rayleigh_ratio(g));
    }
}

TEST(SymPoly, IntegrateLastPreservesTotalIntegral) {
    std::mt19937_64 rng(31);
    SimplexIntegrator integ;
    for (int t = 0; t < 40; ++t) {
        const unsigned k = 2 + rng() % 4;
        SymKey key = random_key(rng);
        SymPoly f = SymPoly::monomial(k, key.one_minus, key.sums);
        EXPECT_EQ(integ.integrate(f), integ.integrate(f.integrate_last()));
    }
}

TEST(SymPoly, EvaluateMatchesPolyF) {
    SymPoly f = SymPoly::monomial(3, 2, {1, 3}, Rational(5, 2)) + SymPoly::monomial(3, 0, {2}, Rational(-1));
    PolyF g = f.to_poly();
    std::vector<double> x{0.1, 0.25, 0.3};
    EXPECT_NEAR(f.evaluate(x), g.evaluate<double>(std::span<const double>(x)), 1e-12);
}

TEST(PolyF, NonSymmetricRayleighSumsEveryCoordinate) {
    PolyF f = PolyF::constant(2, Rational(1)) + PolyF::coordinate(2, 0);
    EXPECT_FALSE(f.symmetric());
    Rational expected = (compute_Jj(f, 0) + compute_Jj(f, 1)) / compute_I(f);
    EXPECT_EQ(rayleigh_ratio(f), expected);
    EXPECT_NE(compute_Jj(f, 0), compute_Jj(f, 1));
    EXPECT_THROW(compute_Jj(f, 2), std::out_of_range);
}

TEST(PolyF, ScaleInvariance) {
    PolyF f = PolyF::constant(3, Rational(1)) + Rational(2) * (PolyF::coordinate(3, 0) * PolyF::coordinate(3, 1));
    EXPECT_EQ(rayleigh_ratio(f), rayleigh_ratio(Rational(-7, 3) * f));
}

TEST(PolyF, DegenerateThrows) {
    EXPECT_THROW(rayleigh_ratio(PolyF(3)), DegenerateFError);
    EXPECT_THROW(rayleigh_ratio(SymPoly(3)), DegenerateFError);
}

TEST(PolyF, MarkSymmetricChecksTerms) {
    PolyF f = PolyF::coordinate(2, 0);
    EXPECT_THROW(f.mark_symmetric(), std::domain_error);
    PolyF g = PolyF::coordinate(2, 0) + PolyF::coordinate(2, 1);
    EXPECT_NO_THROW(g.mark_symmetric());
}

TEST(Basis, Sizes) {
    EXPECT_EQ((BasisSpec{0, 3}.keys().size()), 1u);
    EXPECT_EQ((BasisSpec{1, 3}.keys().size()), 3u * 2 * 2);
    EXPECT_EQ((BasisSpec{3, 3}.keys().size()), 7u * 4 * 4);
    EXPECT_EQ((BasisSpec{2, 1}.keys().size()), 5u);
}

TEST(Optimize, ConstantBasisClosedForm) {
    for (unsigned k = 1; k <= 10; ++k) {
        auto r = optimize_Mk(k, BasisSpec{0, 3}, Rational(1, 2));
        EXPECT_EQ(r.M_lower, make_rational(2 * k, k + 1)) << k;
    }
}

TEST(Optimize, CertifiedBoundIsBelowFloatingOptimum) {
    auto r = optimize_Mk(3, BasisSpec{1, 3}, Rational(1, 2));
    EXPECT_GT(r.M_lower, Rational(3, 2));
    EXPECT_LE(r.M_lower.get_d(), r.eigenvalue + 1e-9);
    EXPECT_EQ(rayleigh_ratio(r.reconstruct()), r.M_lower);
    EXPECT_EQ(rayleigh_ratio(r.reconstruct().to_poly()), r.M_lower);
}

TEST(Optimize, MonotoneInDegree) {
    const unsigned k = 6;
    Rational prev = 0;
    for (unsigned d = 0; d <= 2; ++d) {
        auto r = optimize_Mk(k, BasisSpec{d, 3}, Rational(1, 2));
        EXPECT_GE(r.M_lower, prev) << d;
        prev = r.M_lower;
    }
    // Known upper bound M_k <= k log k / (k - 1).
    EXPECT_LT(prev.get_d(), k * std::log(double(k)) / (k - 1));
}

TEST(Optimize, ThreadCountDoesNotChangeResult) {
    OptimizeOptions one, four;
    one.exec.threads = 1;
    four.exec.threads = 4;
    auto a = optimize_Mk(12, BasisSpec{1, 3}, Rational(1, 2), one);
    auto b = optimize_Mk(12, BasisSpec{1, 3}, Rational(1, 2), four);
    EXPECT_EQ(a.M_lower, b.M_lower);
    EXPECT_EQ(a.coefficients, b.coefficients);
}

TEST(Optimize, Errors) {
    EXPECT_THROW(optimize_Mk(0, BasisSpec{}, Rational(1, 2)), std::domain_error);
    EXPECT_THROW(optimize_Mk(3, BasisSpec{}, Rational(0)), std::domain_error);
    EXPECT_THROW(optimize_Mk(3, BasisSpec{}, Rational(3, 2)), std::domain_error);
    // P_2 and P_3 are dependent on P_1 when k = 1.
    EXPECT_THROW(optimize_Mk(1, BasisSpec{1, 3}, Rational(1, 2)), BasisDegeneracyError);
}

TEST(Rk, CeilOfHalfThetaM) {
    EXPECT_EQ(compute_rk(Rational(4), Rational(1, 2)), 1u);
    EXPECT_EQ(compute_rk(make_rational(4045, 1000), Rational(1, 2)), 2u);
    EXPECT_EQ(compute_rk(Rational(2), Rational(1)), 1u);
    EXPECT_EQ(compute_rk(Rational(21, 10), Rational(1)), 2u);
    EXPECT_THROW(compute_rk(Rational(0), Rational(1, 2)), std::domain_error);
    EXPECT_THROW(compute_rk(Rational(2), Rational(2)), std::domain_error);
}
