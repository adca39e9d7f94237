#pragma once

// Admissible tuples: verification, construction, minimal-diameter subsets
// and the residue class nu0 mod W on which the sieve weights live.

#include "patternsieve/core/arith.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace patternsieve {

using Offset = std::int64_t;

struct Verdict {
    bool admissible = true;
    /// Present iff inadmissible: a prime whose residue classes are all hit.
    std::optional<u64> witness_prime;
};

namespace detail {

inline u64 residue(Offset h, u64 p) {
    auto m = static_cast<Offset>(p);
    return static_cast<u64>(((h % m) + m) % m);
}

}  // namespace detail

/// Only primes p <= k can be covered by k residues.
inline Verdict check_admissible(const std::vector<Offset>& offsets) {
    std::vector<Offset> sorted = offsets;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::domain_error("tuple has duplicate offsets");
    const u64 k = offsets.size();
    for (u64 p : primes_up_to(k)) {
        std::vector<bool> hit(p, false);
        u64 covered = 0;
        for (Offset h : offsets) {
            u64 r = detail::residue(h, p);
            if (!hit[r]) {
                hit[r] = true;
                ++covered;
            }
        }
        if (covered == p) return {false, p};
    }
    return {};
}

/// Strictly increasing non-negative offsets h_1 < ... < h_k, all <= h_bound.
class AdmissibleTuple {
public:
    AdmissibleTuple() = default;

    explicit AdmissibleTuple(std::vector<Offset> offsets, std::optional<Offset> h_bound = std::nullopt)
        : offsets_(std::move(offsets)) {
        if (offsets_.empty()) throw std::domain_error("tuple must be non-empty");
        for (std::size_t i = 0; i < offsets_.size(); ++i) {
            if (offsets_[i] < 0) throw std::domain_error("tuple offsets must be non-negative");
            if (i > 0 && offsets_[i] <= offsets_[i - 1])
                throw std::domain_error("tuple offsets must be strictly increasing");
        }
        h_bound_ = h_bound.value_or(offsets_.back());
        if (h_bound_ < offsets_.back()) throw std::domain_error("offset exceeds H bound");
        verdict_ = check_admissible(offsets_);
    }

    /// Sorts and validates arbitrary-order input.
    static AdmissibleTuple from_unsorted(std::vector<Offset> offsets) {
        std::sort(offsets.begin(), offsets.end());
        if (std::adjacent_find(offsets.begin(), offsets.end()) != offsets.end())
            throw std::domain_error("tuple has duplicate offsets");
        return AdmissibleTuple(std::move(offsets));
    }

    const std::vector<Offset>& offsets() const { return offsets_; }
    std::size_t size() const { return offsets_.size(); }
    Offset operator[](std::size_t i) const { return offsets_[i]; }
    Offset diameter() const { return offsets_.back() - offsets_.front(); }
    Offset h_bound() const { return h_bound_; }
    bool admissible() const { return verdict_.admissible; }
    const Verdict& verdict() const { return verdict_; }

    friend bool operator==(const AdmissibleTuple& a, const AdmissibleTuple& b) {
        return a.offsets_ == b.offsets_;
    }

private:
    std::vector<Offset> offsets_;
    Offset h_bound_ = 0;
    Verdict verdict_;
};

// ---------------------------------------------------------------------------
// Serialization: comma-separated offsets.

inline std::vector<Offset> parse_offsets(std::string_view text) {
    std::vector<Offset> out;
    std::string item;
    std::stringstream ss{std::string(text)};
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw std::invalid_argument("empty offset in list");
        item = item.substr(b, e - b + 1);
        std::size_t used = 0;
        Offset v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed offset: " + item);
        }
        if (used != item.size()) throw std::invalid_argument("malformed offset: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty offset list");
    return out;
}

inline std::string format_offsets(const std::vector<Offset>& offsets) {
    std::string out;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(offsets[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Construction.

enum class TupleStrategy { greedy_sieve, exhaustive_min_diameter };

namespace detail {

// Residue bookkeeping for incremental admissibility during backtracking.
class ResidueCover {
public:
    explicit ResidueCover(std::size_t k) : primes_(primes_up_to(k)) {
        counts_.reserve(primes_.size());
        covered_.assign(primes_.size(), 0);
        for (u64 p : primes_) counts_.emplace_back(p, 0);
    }

    /// Adds h; returns false (and leaves state unchanged) if some prime becomes fully covered.
    bool push(Offset h) {
        for (std::size_t i = 0; i < primes_.size(); ++i) {
            u64 r = residue(h, primes_[i]);
            if (counts_[i][r] == 0 && covered_[i] + 1 == primes_[i]) return false;
        }
        for (std::size_t i = 0; i < primes_.size(); ++i) {
            u64 r = residue(h, primes_[i]);
            if (counts_[i][r]++ == 0) ++covered_[i];
        }
        return true;
    }

    void pop(Offset h) {
        for (std::size_t i = 0; i < primes_.size(); ++i) {
            u64 r = residue(h, primes_[i]);
            if (--counts_[i][r] == 0) --covered_[i];
        }
    }

private:
    std::vector<u64> primes_;
    std::vector<std::vector<unsigned>> counts_;
    std::vector<u64> covered_;
};

inline bool extend_interior(std::vector<Offset>& chosen, std::size_t k, Offset diameter, ResidueCover& cover) {
    if (chosen.size() == k - 1) {
        if (!cover.push(diameter)) return false;
        chosen.push_back(diameter);
        return true;
    }
    const std::size_t remaining = k - 1 - chosen.size();  // interior slots left, excluding the endpoint
    for (Offset h = chosen.back() + 1; h + static_cast<Offset>(remaining) <= diameter; ++h) {
        if (!cover.push(h)) continue;
        chosen.push_back(h);
        if (extend_interior(chosen, k, diameter, cover)) return true;
        chosen.pop_back();
        cover.pop(h);
    }
    return false;
}

inline std::optional<AdmissibleTuple> exhaustive_tuple(std::size_t k, Offset h_cap) {
    if (k == 1) return AdmissibleTuple({0}, h_cap);
    for (Offset d = static_cast<Offset>(k) - 1; d <= h_cap; ++d) {
        ResidueCover cover(k);
        std::vector<Offset> chosen{0};
        cover.push(0);
        if (extend_interior(chosen, k, d, cover)) return AdmissibleTuple(chosen, h_cap);
    }
    return std::nullopt;
}

inline std::optional<AdmissibleTuple> greedy_tuple(std::size_t k, Offset h_cap) {
    std::vector<Offset> survivors(static_cast<std::size_t>(h_cap) + 1);
    std::iota(survivors.begin(), survivors.end(), Offset{0});
    for (u64 p : primes_up_to(k)) {
        std::vector<std::size_t> count(p, 0);
        for (Offset h : survivors) ++count[residue(h, p)];
        u64 drop = static_cast<u64>(std::min_element(count.begin(), count.end()) - count.begin());
        std::erase_if(survivors, [&](Offset h) { return residue(h, p) == drop; });
    }
    if (survivors.size() < k) return std::nullopt;
    std::vector<Offset> tuple(survivors.begin(), survivors.begin() + static_cast<std::ptrdiff_t>(k));
    const Offset shift = tuple.front();
    for (auto& h : tuple) h -= shift;
    return AdmissibleTuple(tuple, h_cap);
}

}  // namespace detail

/// An admissible k-tuple inside [0, h_cap], or nullopt when none is found.
/// The exhaustive strategy returns the minimal diameter, lexicographically
/// least on ties, and is limited to k <= 12.
inline std::optional<AdmissibleTuple> find_admissible(std::size_t k, TupleStrategy strategy, Offset h_cap) {
    if (k == 0) throw std::domain_error("find_admissible requires k >= 1");
    if (h_cap < 0) throw std::domain_error("H cap must be non-negative");
    if (strategy == TupleStrategy::exhaustive_min_diameter) {
        if (k > 12) throw std::domain_error("exhaustive search is limited to k <= 12");
        return detail::exhaustive_tuple(k, h_cap);
    }
    return detail::greedy_tuple(k, h_cap);
}

/// The m-subset with least h'_m - h'_1; lexicographically least on ties.
/// Optimal subsets are always runs of consecutive entries, so the earliest
/// minimal window wins.
inline AdmissibleTuple minimal_diameter_subset(const AdmissibleTuple& tuple, std::size_t m) {
    if (m == 0) throw std::domain_error("subset size must be at least 1");
    if (m > tuple.size()) throw std::domain_error("subset size exceeds tuple size");
    const auto& h = tuple.offsets();
    std::size_t best = 0;
    for (std::size_t i = 1; i + m <= h.size(); ++i)
        if (h[i + m - 1] - h[i] < h[best + m - 1] - h[best]) best = i;
    std::vector<Offset> sub(h.begin() + static_cast<std::ptrdiff_t>(best),
                            h.begin() + static_cast<std::ptrdiff_t>(best + m));
    return AdmissibleTuple(std::move(sub), tuple.h_bound());
}

class NoValidResidueError : public std::domain_error {
public:
    explicit NoValidResidueError(u64 p)
        : std::domain_error("no valid residue: tuple covers every class modulo " + std::to_string(p)), prime_(p) {}
    u64 prime() const { return prime_; }

private:
    u64 prime_;
};

/// Least nu0 in [0, W) with gcd(nu0 + h_i, W) = 1 for every i.
inline u64 find_nu0(const AdmissibleTuple& tuple, u64 W) {
    if (W == 0) throw std::domain_error("W must be positive");
    for (u64 p : prime_factors(W)) {
        std::vector<bool> blocked(p, false);
        u64 count = 0;
        for (Offset h : tuple.offsets()) {
            u64 r = detail::residue(-h, p);
            if (!blocked[r]) {
                blocked[r] = true;
                ++count;
            }
        }
        if (count == p) throw NoValidResidueError(p);
    }
    // A valid class exists by the Chinese remainder theorem; scan for the least.
    for (u64 nu = 0; nu < W; ++nu) {
        bool ok = true;
        for (Offset h : tuple.offsets()) {
            if (std::gcd((nu + static_cast<u64>(h)) % W, W) != 1) {
                ok = false;
                break;
            }
        }
        if (ok) return nu;
    }
    throw std::logic_error("unreachable: CRT guarantees a valid residue");
}

}  // namespace patternsieve
