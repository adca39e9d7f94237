#pragma once

// 64-bit number theory: deterministic primality, smallest prime factor,
// Moebius, Euler phi, primorials and exact root thresholds.

#include "patternsieve/core/rational.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace patternsieve {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 mul_mod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 pow_mod(u64 base, u64 exp, u64 m) {
    u64 result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

namespace detail {

inline bool miller_rabin_round(u64 n, u64 d, int s, u64 a) {
    a %= n;
    if (a == 0) return true;
    u64 x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int r = 1; r < s; ++r) {
        x = mul_mod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

constexpr std::array<u64, 12> kWitnesses = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

}  // namespace detail

/// Deterministic for every n < 2^64: the first twelve primes are a
/// sufficient Miller-Rabin witness set below 3.3e24.
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : detail::kWitnesses) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : detail::kWitnesses)
        if (!detail::miller_rabin_round(n, d, s, a)) return false;
    return true;
}

namespace detail {

// Brent's variant; n odd composite.
inline u64 pollard_brent(u64 n, u64 seed) {
    u64 c = seed % (n - 1) + 1;
    u64 y = seed % n, m = 128, g = 1, r = 1, q = 1, x = 0, ys = 0;
    auto f = [&](u64 v) { return (mul_mod(v, v, n) + c) % n; };
    while (g == 1) {
        x = y;
        for (u64 i = 0; i < r; ++i) y = f(y);
        u64 k = 0;
        while (k < r && g == 1) {
            ys = y;
            for (u64 i = 0; i < std::min(m, r - k); ++i) {
                y = f(y);
                q = mul_mod(q, x > y ? x - y : y - x, n);
            }
            g = std::gcd(q, n);
            k += m;
        }
        r <<= 1;
    }
    if (g == n) {
        do {
            ys = f(ys);
            g = std::gcd(x > ys ? x - ys : ys - x, n);
        } while (g == 1);
    }
    return g;
}

inline u64 smallest_factor_rec(u64 n) {
    if (is_prime(n)) return n;
    for (u64 seed = 2;; ++seed) {
        u64 g = pollard_brent(n, seed);
        if (g != n) return std::min(smallest_factor_rec(g), smallest_factor_rec(n / g));
    }
}

}  // namespace detail

/// P^-(n), the least prime dividing n.
inline u64 smallest_prime_factor(u64 n) {
    if (n < 2) throw std::domain_error("smallest_prime_factor requires n >= 2");
    for (u64 p = 2; p < 1024; p += (p == 2 ? 1 : 2)) {
        if (p * p > n) return n;
        if (n % p == 0) return p;
    }
    return detail::smallest_factor_rec(n);
}

/// Distinct prime factors in increasing order.
inline std::vector<u64> prime_factors(u64 n) {
    std::vector<u64> out;
    while (n > 1) {
        u64 p = smallest_prime_factor(n);
        out.push_back(p);
        while (n % p == 0) n /= p;
    }
    return out;
}

inline int mobius(u64 n) {
    if (n == 0) throw std::domain_error("mobius requires n >= 1");
    int sign = 1;
    while (n > 1) {
        u64 p = smallest_prime_factor(n);
        n /= p;
        if (n % p == 0) return 0;
        sign = -sign;
    }
    return sign;
}

inline u64 euler_phi(u64 n) {
    if (n == 0) throw std::domain_error("euler_phi requires n >= 1");
    u64 result = n;
    for (u64 p : prime_factors(n)) result = result / p * (p - 1);
    return result;
}

inline bool is_squarefree(u64 n) { return n != 0 && mobius(n) != 0; }

/// All primes <= limit by a plain Eratosthenes sieve.
inline std::vector<u64> primes_up_to(u64 limit) {
    std::vector<u64> out;
    if (limit < 2) return out;
    std::vector<bool> composite(limit + 1, false);
    for (u64 i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        out.push_back(i);
        for (u64 j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return out;
}

/// Product of all primes <= x, arbitrary precision.
inline Integer primorial(u64 x) {
    Integer w = 1;
    for (u64 p : primes_up_to(x)) w *= static_cast<unsigned long>(p);
    return w;
}

/// Primorial when it fits in 64 bits (x <= 52), else overflow_error.
inline u64 primorial_u64(u64 x) { return to_u64(primorial(x)); }

/// Smallest integer t with t^den >= n^num, i.e. t = ceil(n^(num/den)).
/// Then for every integer p: p < n^(num/den)  <=>  p < t.
inline u64 root_ceiling(u64 n, const Rational& exponent) {
    if (sgn(exponent) < 0) throw std::domain_error("negative exponent");
    const unsigned long num = exponent.get_num().get_ui();
    const unsigned long den = exponent.get_den().get_ui();
    Integer target, root;
    mpz_pow_ui(target.get_mpz_t(), to_integer(n).get_mpz_t(), num);
    const bool exact = mpz_root(root.get_mpz_t(), target.get_mpz_t(), den) != 0;
    return to_u64(exact ? root : root + 1);
}

}  // namespace patternsieve
