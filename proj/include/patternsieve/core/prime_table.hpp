#pragma once

#include "patternsieve/core/arith.hpp"
#include "patternsieve/core/parallel.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace patternsieve {

inline constexpr u64 kDefaultSegment = u64{1} << 22;

/// Primality and smallest-prime-factor data for [lo, hi).
/// spf entry is 0 for units and primes; otherwise P^-(lo + i).
class PrimeTable {
public:
    PrimeTable() = default;
    PrimeTable(u64 lo, u64 hi, std::vector<bool> is_prime, std::vector<std::uint32_t> spf)
        : lo_(lo), hi_(hi), is_prime_(std::move(is_prime)), spf_(std::move(spf)) {}

    u64 lo() const { return lo_; }
    u64 hi() const { return hi_; }
    u64 size() const { return hi_ - lo_; }
    bool contains(u64 n) const { return n >= lo_ && n < hi_; }

    bool is_prime(u64 n) const { return is_prime_[index(n)]; }
    std::uint32_t spf_entry(u64 n) const { return spf_[index(n)]; }

    /// P^-(n) for n >= 2 in range.
    u64 least_prime_factor(u64 n) const {
        if (n < 2) throw std::domain_error("least_prime_factor requires n >= 2");
        auto s = spf_[index(n)];
        return s == 0 ? n : s;
    }

private:
    std::size_t index(u64 n) const {
        if (!contains(n)) throw std::out_of_range("value outside prime table range");
        return static_cast<std::size_t>(n - lo_);
    }

    u64 lo_ = 0;
    u64 hi_ = 0;
    std::vector<bool> is_prime_;
    std::vector<std::uint32_t> spf_;
};

namespace detail {

inline u64 isqrt(u64 n) {
    u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

inline void sieve_segment(u64 lo, u64 hi, const std::vector<u64>& base, std::vector<bool>& is_prime,
                          std::vector<std::uint32_t>& spf, u64 offset) {
    for (u64 p : base) {
        if (p * p >= hi) break;
        u64 start = std::max(p * p, (lo + p - 1) / p * p);
        for (u64 m = start; m < hi; m += p) {
            auto idx = static_cast<std::size_t>(m - offset);
            if (spf[idx] == 0) spf[idx] = static_cast<std::uint32_t>(p);
        }
    }
    for (u64 n = lo; n < hi; ++n) {
        auto idx = static_cast<std::size_t>(n - offset);
        is_prime[idx] = n >= 2 && spf[idx] == 0;
    }
}

}  // namespace detail

/// Segmented Eratosthenes over [lo, hi). Segments are independent and are
/// distributed over workers; the table is their concatenation.
inline PrimeTable sieve_range(u64 lo, u64 hi, u64 segment = kDefaultSegment, const Exec& exec = {1}) {
    if (lo >= hi) throw std::invalid_argument("sieve_range requires lo < hi");
    if (segment == 0) throw std::invalid_argument("segment size must be positive");
    if (hi > (u64{1} << 62)) throw std::invalid_argument("sieve_range upper bound too large");
    const auto base = primes_up_to(detail::isqrt(hi - 1));
    const u64 length = hi - lo;
    std::vector<bool> is_prime(length, false);
    std::vector<std::uint32_t> spf(length, 0);
    // Segment boundaries are 64-aligned so std::vector<bool> words are never shared.
    const u64 seg = (segment + 63) / 64 * 64;
    const std::size_t count = static_cast<std::size_t>((length + seg - 1) / seg);
    parallel_map(count, exec, [&](std::size_t s) {
        u64 a = lo + s * seg;
        u64 b = std::min(hi, a + seg);
        detail::sieve_segment(a, b, base, is_prime, spf, lo);
        return 0;
    });
    return PrimeTable(lo, hi, std::move(is_prime), std::move(spf));
}

}  // namespace patternsieve
