#pragma once

// Exact integer/rational carriers backed by GMP, plus the few helpers the
// rest of the library needs on top of mpq_class: parsing, exact ceiling,
// continued-fraction rounding and an order-independent summation of doubles.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace patternsieve {

using Integer = mpz_class;
/// Always canonical (lowest terms, positive denominator) after any arithmetic.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Integer to_integer(std::uint64_t v) {
    Integer z;
    mpz_import(z.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
    return z;
}

inline std::uint64_t to_u64(const Integer& z) {
    if (sgn(z) < 0 || mpz_sizeinbase(z.get_mpz_t(), 2) > 64)
        throw std::overflow_error("integer does not fit in 64 bits");
    std::uint64_t v = 0;
    mpz_export(&v, nullptr, 1, sizeof(v), 0, 0, z.get_mpz_t());
    return v;
}

/// Parses "3", "-7/4", "0.05" or "1e-3" into an exact rational.
inline Rational parse_rational(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw std::invalid_argument("empty rational");
    if (auto slash = s.find('/'); slash != std::string::npos) {
        Integer num, den;
        if (num.set_str(s.substr(0, slash), 10) != 0 || den.set_str(s.substr(slash + 1), 10) != 0)
            throw std::invalid_argument("malformed rational: " + s);
        if (den == 0) throw std::invalid_argument("zero denominator: " + s);
        Rational q(num, den);
        q.canonicalize();
        return q;
    }
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
        try {
            std::size_t used = 0;
            exponent = std::stol(s.substr(e + 1), &used);
            if (used != s.size() - e - 1) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed exponent: " + s);
        }
        s.resize(e);
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if ((c == '-' || c == '+') && i == 0) {
            if (c == '-') digits.push_back('-');
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            if (seen_point) ++frac_digits;
        } else {
            throw std::invalid_argument("malformed number: " + std::string(text));
        }
    }
    if (digits.empty() || digits == "-") throw std::invalid_argument("malformed number: " + std::string(text));
    Integer num(digits, 10);
    long scale = exponent - frac_digits;
    Integer pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
    Rational q = scale < 0 ? Rational(num, pow10) : Rational(num * pow10);
    q.canonicalize();
    return q;
}

inline std::string to_fraction_string(const Rational& q) { return q.get_str(10); }

inline Integer ceil(const Rational& q) {
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer floor(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer factorial(unsigned long n) {
    Integer f;
    mpz_fac_ui(f.get_mpz_t(), n);
    return f;
}

/// Decimal rendering with a fixed number of significant digits (deterministic).
inline std::string to_decimal_string(const Rational& q, int digits = 20) {
    mpf_class f(q, static_cast<mp_bitcnt_t>(digits * 4 + 64));
    mp_exp_t exp = 0;
    std::string mant = f.get_str(exp, 10, static_cast<std::size_t>(digits));
    if (mant.empty() || mant == "0") return "0";
    bool neg = mant[0] == '-';
    if (neg) mant.erase(0, 1);
    std::string out = neg ? "-" : "";
    if (exp <= 0) {
        out += "0.";
        out.append(static_cast<std::size_t>(-exp), '0');
        out += mant;
    } else if (static_cast<std::size_t>(exp) >= mant.size()) {
        out += mant;
        out.append(static_cast<std::size_t>(exp) - mant.size(), '0');
    } else {
        out += mant.substr(0, static_cast<std::size_t>(exp));
        out += '.';
        out += mant.substr(static_cast<std::size_t>(exp));
    }
    return out;
}

/// Best rational approximation of x with denominator at most `max_den`
/// (continued-fraction convergents plus the admissible semiconvergent).
inline Rational rationalize(double x, std::uint64_t max_den) {
    if (!std::isfinite(x)) throw std::domain_error("cannot rationalize a non-finite value");
    if (max_den == 0) throw std::domain_error("denominator cap must be positive");
    Rational value(x);  // exact binary value
    Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    Rational rest = value;
    const Integer cap = to_integer(max_den);
    while (true) {
        Integer a = floor(rest);
        Integer p2 = a * p1 + p0;
        Integer q2 = a * q1 + q0;
        if (q2 > cap) {
            Integer t = (cap - q0) / q1;
            Rational semi(t * p1 + p0, t * q1 + q0);
            Rational conv(p1, q1);
            semi.canonicalize();
            conv.canonicalize();
            return abs(semi - value) < abs(conv - value) ? semi : conv;
        }
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        Rational frac = rest - a;
        if (sgn(frac) == 0) break;
        rest = 1 / frac;
    }
    Rational r(p1, q1);
    r.canonicalize();
    return r;
}

/// Exact sum of doubles. Addition order does not affect the result, so
/// partial sums from different workers merge reproducibly.
class ExactAccumulator {
public:
    void add(double x) {
        if (!std::isfinite(x)) throw std::domain_error("non-finite summand");
        if (x != 0.0) sum_ += Rational(x);
    }
    void add(const Rational& x) { sum_ += x; }
    void merge(const ExactAccumulator& other) { sum_ += other.sum_; }

    const Rational& exact() const { return sum_; }
    double value() const { return sum_.get_d(); }

private:
    Rational sum_{0};
};

}  // namespace patternsieve
