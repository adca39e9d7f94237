#pragma once

// Finite-range searches: rough translates n + h_i, prime-pattern hits,
// consecutive-prime hits and arithmetic progressions of hits.

#include "patternsieve/admissible.hpp"
#include "patternsieve/core/arith.hpp"
#include "patternsieve/core/parallel.hpp"
#include "patternsieve/core/prime_table.hpp"
#include "patternsieve/core/rational.hpp"
#include "patternsieve/sieve_weights.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace patternsieve {

inline constexpr u64 kScanBudget = u64{1} << 33;
inline constexpr u64 kScanChunk = u64{1} << 20;
inline constexpr std::size_t kWitnessPage = 1000;
inline constexpr u64 kSubsetGuard = 100'000;

namespace detail {

inline void check_scan_bound(u64 X) {
    if (X > kScanBudget) throw std::length_error("scan bound " + std::to_string(X) + " exceeds budget");
}

inline void check_pattern(const std::vector<Offset>& pattern) {
    if (pattern.empty()) throw std::invalid_argument("pattern must be non-empty");
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] < 0) throw std::invalid_argument("pattern offsets must be non-negative");
        if (i > 0 && pattern[i] <= pattern[i - 1])
            throw std::invalid_argument("pattern offsets must be strictly increasing");
    }
}

// P^-(m) >= t, with m = 0 or 1 counted as rough (no prime factors at all).
inline bool rough_at(const PrimeTable& table, u64 m, u64 t) {
    if (m < 2) return m == 1;
    return table.least_prime_factor(m) >= t;
}

}  // namespace detail

// ---------------------------------------------------------------- rough scan

struct RoughScan {
    u64 X = 0;
    u64 count = 0;
    std::vector<u64> samples;
    double normalized = 0;  // count * (log X)^k / X
};

/// Counts n <= X with n = nu0 (mod W) and P^-(n + h_i) >= n^c1 for every i.
inline RoughScan scan_rough(const SieveParams& params, u64 X, std::size_t sample_cap = 20, const Exec& exec = {}) {
    if (X < 1000) throw std::domain_error("scan_rough requires X >= 1000");
    detail::check_scan_bound(X);
    const auto& H = params.H.offsets();
    const u64 h_max = static_cast<u64>(H.back());
    const std::size_t chunks = static_cast<std::size_t>(X / kScanChunk + 1);
    struct Part {
        u64 count = 0;
        std::vector<u64> samples;
    };
    auto parts = parallel_map(chunks, exec, [&](std::size_t c) {
        Part part;
        const u64 a = std::max<u64>(1, c * kScanChunk);
        const u64 b = std::min(X + 1, (c + 1) * kScanChunk);
        if (a >= b) return part;
        const u64 first = a + (params.nu0 + params.W - a % params.W) % params.W;
        if (first >= b) return part;
        const PrimeTable table = sieve_range(first, b + h_max);
        for (u64 n = first; n < b; n += params.W) {
            const u64 t = root_ceiling(n, params.c1);
            bool rough = true;
            for (Offset h : H) rough = rough && detail::rough_at(table, n + static_cast<u64>(h), t);
            if (!rough) continue;
            ++part.count;
            if (part.samples.size() < sample_cap) part.samples.push_back(n);
        }
        return part;
    });
    RoughScan out;
    out.X = X;
    for (auto& p : parts) {
        out.count += p.count;
        for (u64 n : p.samples)
            if (out.samples.size() < sample_cap) out.samples.push_back(n);
    }
    out.normalized = static_cast<double>(out.count) *
                     std::pow(std::log(static_cast<double>(X)), static_cast<double>(params.k)) /
                     static_cast<double>(X);
    return out;
}

// ------------------------------------------------------------- pattern hits

struct PatternHit {
    u64 n = 0;
    std::vector<Offset> subset;
    bool all_prime = false;
    bool consecutive = false;
    std::optional<bool> rough;  // set when a full tuple and c1 were supplied
};

struct RoughSpec {
    std::vector<Offset> tuple;
    Rational c1;
};

struct HitOptions {
    bool require_consecutive = false;
    std::vector<Offset> exclusion;
    std::optional<RoughSpec> rough;
    Exec exec{};
};

namespace detail {

struct HitProbe {
    const std::vector<Offset>& pattern;
    const HitOptions& opt;

    u64 reach() const {
        Offset r = pattern.back();
        for (Offset h : opt.exclusion) r = std::max(r, h);
        if (opt.rough)
            for (Offset h : opt.rough->tuple) r = std::max(r, h);
        return static_cast<u64>(r);
    }

    bool all_prime(const PrimeTable& table, u64 n) const {
        for (Offset h : pattern)
            if (!table.is_prime(n + static_cast<u64>(h))) return false;
        return true;
    }

    // Only the pattern members are prime in [n + h_1, n + h_m].
    bool consecutive(const PrimeTable& table, u64 n) const {
        std::size_t j = 0;
        for (u64 m = n + static_cast<u64>(pattern.front()); m <= n + static_cast<u64>(pattern.back()); ++m) {
            if (j < pattern.size() && m == n + static_cast<u64>(pattern[j])) {
                ++j;
                continue;
            }
            if (table.is_prime(m)) return false;
        }
        return true;
    }

    std::optional<PatternHit> test(const PrimeTable& table, u64 n) const {
        if (!all_prime(table, n)) return std::nullopt;
        for (Offset h : opt.exclusion)
            if (table.is_prime(n + static_cast<u64>(h))) return std::nullopt;
        PatternHit hit;
        hit.n = n;
        hit.subset = pattern;
        hit.all_prime = true;
        hit.consecutive = consecutive(table, n);
        if (opt.require_consecutive && !hit.consecutive) return std::nullopt;
        if (opt.rough) {
            const u64 t = root_ceiling(std::max<u64>(n, 1), opt.rough->c1);
            bool r = true;
            for (Offset h : opt.rough->tuple) r = r && rough_at(table, n + static_cast<u64>(h), t);
            hit.rough = r;
        }
        return hit;
    }
};

}  // namespace detail

/// All n in [lo, hi] (inclusive) with n + h'_j prime for every j, filtered
/// by the consecutive and exclusion conditions. Sorted by n.
inline std::vector<PatternHit> find_pattern_hits(const std::vector<Offset>& pattern, u64 lo, u64 hi,
                                                 const HitOptions& opt = {}) {
    detail::check_pattern(pattern);
    for (Offset h : opt.exclusion)
        if (h < 0) throw std::invalid_argument("exclusion offsets must be non-negative");
    if (opt.rough) detail::check_pattern(opt.rough->tuple);
    if (lo > hi) return {};
    detail::check_scan_bound(hi - lo);
    detail::check_scan_bound(hi);
    const detail::HitProbe probe{pattern, opt};
    const u64 reach = probe.reach();
    const u64 span = hi - lo + 1;
    const std::size_t chunks = static_cast<std::size_t>((span + kScanChunk - 1) / kScanChunk);
    auto parts = parallel_map(chunks, opt.exec, [&](std::size_t c) {
        std::vector<PatternHit> found;
        const u64 a = lo + c * kScanChunk;
        const u64 b = std::min(hi + 1, a + kScanChunk);
        const PrimeTable table = sieve_range(a, b + reach);
        for (u64 n = a; n < b; ++n)
            if (auto hit = probe.test(table, n)) found.push_back(std::move(*hit));
        return found;
    });
    std::vector<PatternHit> out;
    for (auto& p : parts) out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    return out;
}

/// Re-checks a hit from primality tests alone, without any table.
inline bool verify_hit(const PatternHit& hit) {
    for (Offset h : hit.subset)
        if (!is_prime(hit.n + static_cast<u64>(h))) return false;
    if (hit.consecutive) {
        for (u64 m = hit.n + static_cast<u64>(hit.subset.front()); m <= hit.n + static_cast<u64>(hit.subset.back()); ++m) {
            bool member = std::any_of(hit.subset.begin(), hit.subset.end(),
                                      [&](Offset h) { return hit.n + static_cast<u64>(h) == m; });
            if (!member && is_prime(m)) return false;
        }
    }
    return hit.all_prime;
}

// ------------------------------------------------------ progressions of hits

struct APWitness {
    u64 start = 0;
    u64 d = 0;  // 0 only for length-1 progressions
    unsigned length = 0;
    std::vector<u64> members;
    std::vector<Offset> pattern;
};

struct APSearch {
    std::vector<Offset> pattern;
    unsigned length = 0;
    u64 X = 0;
    u64 hits = 0;
    u64 total = 0;                     // every progression found
    std::vector<APWitness> witnesses;  // first page, ordered by (start, d)
    bool truncated() const { return total > witnesses.size(); }
};

/// l-term progressions n_1 < n_1 + d < ... with positive d inside a sorted hit list.
inline APSearch progressions_in(const std::vector<u64>& hits, const std::vector<Offset>& pattern, unsigned ell, u64 X,
                                std::size_t page = kWitnessPage) {
    if (ell < 1) throw std::domain_error("progression length must be at least 1");
    APSearch out;
    out.pattern = pattern;
    out.length = ell;
    out.X = X;
    out.hits = hits.size();
    auto emit = [&](u64 start, u64 d) {
        ++out.total;
        if (out.witnesses.size() >= page) return;
        APWitness w{start, d, ell, {}, pattern};
        for (unsigned t = 0; t < ell; ++t) w.members.push_back(start + t * d);
        out.witnesses.push_back(std::move(w));
    };
    if (ell == 1) {
        for (u64 n : hits) emit(n, 0);
        return out;
    }
    const std::unordered_set<u64> members(hits.begin(), hits.end());
    for (std::size_t i = 0; i < hits.size(); ++i)
        for (std::size_t j = i + 1; j < hits.size(); ++j) {
            const u64 d = hits[j] - hits[i];
            // Remaining terms would pass the largest hit.
            if (hits[i] + static_cast<u128>(d) * (ell - 1) > hits.back()) break;
            bool ok = true;
            for (unsigned t = 2; t < ell && ok; ++t) ok = members.contains(hits[i] + t * d);
            if (ok) emit(hits[i], d);
        }
    return out;
}

/// Progressions of hits for the pattern among n in [0, X].
inline APSearch find_pattern_APs(const std::vector<Offset>& pattern, unsigned ell, u64 X, bool require_consecutive,
                                 const Exec& exec = {}) {
    if (ell < 1) throw std::domain_error("progression length must be at least 1");
    HitOptions opt;
    opt.require_consecutive = require_consecutive;
    opt.exec = exec;
    std::vector<u64> hits;
    for (const auto& h : find_pattern_hits(pattern, 0, X, opt)) hits.push_back(h.n);
    return progressions_in(hits, pattern, ell, X);
}

inline bool verify_witness(const APWitness& w) {
    if (w.length == 0 || w.members.size() != w.length) return false;
    if (w.length > 1 && w.d == 0) return false;
    for (unsigned t = 0; t < w.length; ++t) {
        if (w.members[t] != w.start + t * w.d) return false;
        for (Offset h : w.pattern)
            if (!is_prime(w.members[t] + static_cast<u64>(h))) return false;
    }
    return true;
}

// ------------------------------------------------------------ subset counts

struct SubsetWitness {
    std::vector<Offset> subset;   // the chosen m offsets
    std::vector<Offset> pattern;  // subset with 0 adjoined
    APWitness first;
};

struct SubsetCount {
    u64 subsets = 0;   // C(|A|, m)
    u64 witnessed = 0; // subsets with at least one witness below X
    std::vector<SubsetWitness> witnesses;
};

/// Number of m-subsets S of A for which {0} u S has an l-term progression
/// of hits with every member <= X.
inline SubsetCount count_pattern_subsets(std::vector<Offset> A, unsigned m, unsigned ell, u64 X, const Exec& exec = {}) {
    std::sort(A.begin(), A.end());
    if (std::adjacent_find(A.begin(), A.end()) != A.end()) throw std::invalid_argument("A has repeated elements");
    for (Offset a : A)
        if (a < 0) throw std::invalid_argument("A must be non-negative");
    if (m < 1 || m > A.size()) throw std::domain_error("need 1 <= m <= |A|");
    if (ell < 1) throw std::domain_error("progression length must be at least 1");
    detail::check_scan_bound(X);
    Integer choose;
    mpz_bin_uiui(choose.get_mpz_t(), A.size(), m);
    if (choose > kSubsetGuard)
        throw std::length_error("C(|A|, m) = " + choose.get_str() + " exceeds " + std::to_string(kSubsetGuard));

    std::vector<std::vector<Offset>> subsets;
    std::vector<std::size_t> idx(m);
    for (unsigned i = 0; i < m; ++i) idx[i] = i;
    while (true) {
        std::vector<Offset> s;
        for (auto i : idx) s.push_back(A[i]);
        subsets.push_back(std::move(s));
        int pos = static_cast<int>(m) - 1;
        while (pos >= 0 && idx[pos] == A.size() - m + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (unsigned i = pos + 1; i < m; ++i) idx[i] = idx[i - 1] + 1;
    }

    const PrimeTable table = sieve_range(0, X + static_cast<u64>(A.back()) + 1, kDefaultSegment, exec);
    auto results = parallel_map(subsets.size(), exec, [&](std::size_t s) {
        std::vector<Offset> pattern = subsets[s];
        if (pattern.front() != 0) pattern.insert(pattern.begin(), 0);
        std::vector<u64> hits;
        for (u64 n = 0; n <= X; ++n) {
            bool ok = true;
            for (Offset h : pattern) ok = ok && table.is_prime(n + static_cast<u64>(h));
            if (ok) hits.push_back(n);
        }
        return progressions_in(hits, pattern, ell, X, 1);
    });
    SubsetCount out;
    out.subsets = subsets.size();
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        if (results[s].total == 0) continue;
        ++out.witnessed;
        out.witnesses.push_back({subsets[s], results[s].pattern, results[s].witnesses.front()});
    }
    return out;
}

}  // namespace patternsieve
