#pragma once

// Exhaustive reference solvers for verification. Exponential on purpose;
// every entry point refuses inputs beyond a fixed size.

#include "fsbb/bounds.hpp"
#include "fsbb/instance.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fsbb::oracle {

inline constexpr int max_optimum_jobs = 10;
inline constexpr int max_completion_jobs = 9;
inline constexpr int max_two_machine_jobs = 9;

struct Optimum {
    Permutation order;
    Time makespan;
};

/// Minimum makespan over all n! orders; the lexicographically first optimal
/// order wins ties.
inline Optimum brute_force_optimum(const Instance& inst)
{
    if (inst.jobs() > max_optimum_jobs)
        throw std::invalid_argument("brute_force_optimum: n exceeds the enumeration guard");
    Permutation perm(static_cast<std::size_t>(inst.jobs()));
    std::iota(perm.begin(), perm.end(), 0);
    Optimum best{perm, std::numeric_limits<Time>::max()};
    do {
        const Time c = makespan(inst, perm);
        if (c < best.makespan)
            best = {perm, c};
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Best makespan over all completions of `prefix`.
inline Time brute_force_best_completion(const Instance& inst, const Permutation& prefix)
{
    std::vector<char> used(static_cast<std::size_t>(inst.jobs()), 0);
    for (JobId j : prefix) {
        if (j < 0 || j >= inst.jobs() || used[j])
            throw std::invalid_argument("brute_force_best_completion: invalid prefix");
        used[j] = 1;
    }
    Permutation rest;
    for (int j = 0; j < inst.jobs(); ++j)
        if (!used[j])
            rest.push_back(j);
    if (static_cast<int>(rest.size()) > max_completion_jobs)
        throw std::invalid_argument("brute_force_best_completion: too many unscheduled jobs");

    Permutation full = prefix;
    full.resize(static_cast<std::size_t>(inst.jobs()));
    Time best = std::numeric_limits<Time>::max();
    do {
        std::copy(rest.begin(), rest.end(), full.begin() + static_cast<std::ptrdiff_t>(prefix.size()));
        best = std::min(best, makespan(inst, full));
    } while (std::next_permutation(rest.begin(), rest.end()));
    return best;
}

/// Best two-machine-with-lag makespan over all orders, starting from zero.
inline Time brute_force_two_machine_lag(std::span<const Time> a, std::span<const Time> lag, std::span<const Time> b)
{
    if (a.size() != lag.size() || a.size() != b.size())
        throw std::invalid_argument("brute_force_two_machine_lag: length mismatch");
    if (static_cast<int>(a.size()) > max_two_machine_jobs)
        throw std::invalid_argument("brute_force_two_machine_lag: n exceeds the enumeration guard");
    Permutation order(a.size());
    std::iota(order.begin(), order.end(), 0);
    Time best = std::numeric_limits<Time>::max();
    do {
        Time t1 = 0;
        Time t2 = 0;
        for (JobId j : order) {
            t1 += a[j];
            t2 = std::max(t2, t1 + lag[j]) + b[j];
        }
        best = std::min(best, t2);
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

} // namespace fsbb::oracle
