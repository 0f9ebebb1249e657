#pragma once

// Fast-memory placement advisor for the bound's data structures.
//
// Each structure is profiled by its size and by the number of reads one bound
// evaluation makes, for n jobs, m machines and n' remaining jobs:
//
//   PTM  n*m          n'*m*(m-1)
//   LM   n*m(m-1)/2   n'*m(m-1)/2
//   JM   n*m(m-1)/2   n*m(m-1)/2
//   RM   m            m*(m-1)
//   QM   m            m(m-1)/2
//   MM   m*(m-1)      m*(m-1)
//
// Structures are then packed greedily into the budget by descending reads per
// byte. This is a heuristic, not an optimal knapsack.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsbb::placement {

struct StructureProfile {
    std::string name;
    std::uint64_t size_entries = 0;
    std::uint64_t accesses = 0;
    std::uint64_t entry_bytes = 1;

    std::uint64_t bytes() const noexcept { return size_entries * entry_bytes; }
};

struct PlacementPlan {
    std::vector<std::string> fast_set;
    std::uint64_t fast_bytes_used = 0;
    std::uint64_t budget_bytes = 0;

    bool contains(const std::string& name) const
    {
        return std::find(fast_set.begin(), fast_set.end(), name) != fast_set.end();
    }
};

inline std::vector<StructureProfile> profile_structures(std::uint64_t n, std::uint64_t m, std::uint64_t remaining,
                                                        std::uint64_t entry_bytes)
{
    if (m < 2)
        throw std::invalid_argument("profile_structures: m must be >= 2");
    if (remaining < 1 || remaining > n)
        throw std::invalid_argument("profile_structures: remaining jobs must lie in [1, n]");
    if (entry_bytes < 1)
        throw std::invalid_argument("profile_structures: entry width must be >= 1 byte");

    const std::uint64_t pairs = m * (m - 1) / 2;
    return {
        {"PTM", n * m, remaining * m * (m - 1), entry_bytes},
        {"LM", n * pairs, remaining * pairs, entry_bytes},
        {"JM", n * pairs, n * pairs, entry_bytes},
        {"RM", m, m * (m - 1), entry_bytes},
        {"QM", m, pairs, entry_bytes},
        {"MM", m * (m - 1), m * (m - 1), entry_bytes},
    };
}

/// True when `a` has strictly more reads per byte than `b`, or the same ratio
/// and a smaller footprint.
inline bool denser(const StructureProfile& a, const StructureProfile& b)
{
    // Compare a.accesses / a.bytes against b.accesses / b.bytes without
    // division; zero-size structures rank first.
    const auto lhs = static_cast<unsigned __int128>(a.accesses) * b.bytes();
    const auto rhs = static_cast<unsigned __int128>(b.accesses) * a.bytes();
    if (a.bytes() == 0 || b.bytes() == 0) {
        if (a.bytes() != b.bytes())
            return a.bytes() == 0;
    } else if (lhs != rhs) {
        return lhs > rhs;
    }
    return a.bytes() < b.bytes();
}

inline PlacementPlan select_placement(std::vector<StructureProfile> profiles, std::uint64_t budget_bytes)
{
    std::stable_sort(profiles.begin(), profiles.end(), denser);
    PlacementPlan plan;
    plan.budget_bytes = budget_bytes;
    for (const auto& p : profiles) {
        if (plan.fast_bytes_used + p.bytes() <= budget_bytes) {
            plan.fast_set.push_back(p.name);
            plan.fast_bytes_used += p.bytes();
        }
    }
    return plan;
}

} // namespace fsbb::placement
