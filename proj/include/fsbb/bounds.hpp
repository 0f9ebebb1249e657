#pragma once

// Lag-based two-machine lower bound for permutation flow shop.
//
// For every machine pair (k, l), k < l, the machines strictly between k and l
// are collapsed into a per-job transfer lag, which turns the remaining jobs
// into a two-machine problem with lags. Johnson's rule on the lag-augmented
// times (p_k + lag, lag + p_l) orders that problem optimally; its makespan,
// started from the node's machine heads and followed by the smallest tail on
// l, bounds every completion of the node. The bound is the maximum over
// pairs.
//
// The precomputed tables are: MachinePairTable (pairs), LagMatrix (lags),
// JohnsonMatrix (one Johnson order per pair) and TailTable (per-job work after
// each machine). Per-node heads and tails are reduced to m-length minima on
// the host before evaluation.

#include "fsbb/instance.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace fsbb {

/// Set of scheduled jobs, one bit per job id.
using JobSet = boost::dynamic_bitset<std::uint64_t>;

struct MachinePair {
    int first;
    int second;

    friend bool operator==(const MachinePair&, const MachinePair&) = default;
};

/// All (k, l) with k < l, in lexicographic order.
class MachinePairTable {
public:
    explicit MachinePairTable(int machines) : m_(machines)
    {
        if (machines < 1)
            throw std::invalid_argument("machine_pairs: m must be >= 1");
        pairs_.reserve(static_cast<std::size_t>(machines) * (machines - 1) / 2);
        for (int k = 0; k < machines; ++k)
            for (int l = k + 1; l < machines; ++l)
                pairs_.push_back({k, l});
    }

    int machines() const noexcept { return m_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    const MachinePair& operator[](std::size_t idx) const noexcept { return pairs_[idx]; }
    std::span<const MachinePair> pairs() const noexcept { return pairs_; }

    /// Two machine indices per pair.
    std::size_t stored_indices() const noexcept { return 2 * pairs_.size(); }

    std::size_t index_of(int k, int l) const
    {
        if (k < 0 || l >= m_ || k >= l)
            throw std::out_of_range("machine pair index requires 0 <= k < l < m");
        const auto kk = static_cast<std::size_t>(k);
        return kk * (2 * static_cast<std::size_t>(m_) - kk - 1) / 2 + static_cast<std::size_t>(l - k - 1);
    }

private:
    int m_;
    std::vector<MachinePair> pairs_;
};

inline MachinePairTable machine_pairs(int m) { return MachinePairTable(m); }

/// n × pairs matrix of summed intermediate processing times.
class LagMatrix {
public:
    LagMatrix(std::size_t jobs, std::size_t pairs) : n_(jobs), cols_(pairs), lm_(jobs * pairs, 0) {}

    std::size_t rows() const noexcept { return n_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t entries() const noexcept { return lm_.size(); }

    Time at(JobId j, std::size_t pair) const noexcept { return lm_[static_cast<std::size_t>(j) * cols_ + pair]; }
    Time& at(JobId j, std::size_t pair) noexcept { return lm_[static_cast<std::size_t>(j) * cols_ + pair]; }
    const Time* data() const noexcept { return lm_.data(); }

    /// Lags of all jobs for one pair, indexed by job id.
    std::vector<Time> column(std::size_t pair) const
    {
        std::vector<Time> out(n_);
        for (std::size_t j = 0; j < n_; ++j)
            out[j] = lm_[j * cols_ + pair];
        return out;
    }

private:
    std::size_t n_;
    std::size_t cols_;
    std::vector<Time> lm_;
};

/// One job order per machine pair. Stored column-major: a pair's order is
/// contiguous.
class JohnsonMatrix {
public:
    JohnsonMatrix(std::size_t jobs, std::size_t pairs) : n_(jobs), cols_(pairs), jm_(jobs * pairs, 0) {}

    std::size_t rows() const noexcept { return n_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t entries() const noexcept { return jm_.size(); }

    /// Job at position `pos` of the order for `pair`.
    JobId at(std::size_t pos, std::size_t pair) const noexcept { return jm_[pair * n_ + pos]; }

    std::span<const JobId> column(std::size_t pair) const noexcept { return {jm_.data() + pair * n_, n_}; }
    std::span<JobId> column(std::size_t pair) noexcept { return {jm_.data() + pair * n_, n_}; }

private:
    std::size_t n_;
    std::size_t cols_;
    std::vector<JobId> jm_;
};

/// q[j][l]: work of job j strictly after machine l.
class TailTable {
public:
    explicit TailTable(const Instance& inst)
        : n_(inst.jobs()), m_(inst.machines()), q_(static_cast<std::size_t>(n_) * m_, 0)
    {
        for (int j = 0; j < n_; ++j)
            for (int l = m_ - 2; l >= 0; --l)
                q_[idx(j, l)] = q_[idx(j, l + 1)] + inst.p(j, l + 1);
    }

    int rows() const noexcept { return n_; }
    int cols() const noexcept { return m_; }
    Time at(JobId j, int l) const noexcept { return q_[idx(j, l)]; }

private:
    std::size_t idx(JobId j, int l) const noexcept { return static_cast<std::size_t>(j) * m_ + l; }

    int n_;
    int m_;
    std::vector<Time> q_;
};

inline LagMatrix compute_lags(const Instance& inst, const MachinePairTable& pairs)
{
    LagMatrix lm(inst.jobs(), pairs.size());
    for (int j = 0; j < inst.jobs(); ++j) {
        for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
            const auto [k, l] = pairs[idx];
            // Adjacent pairs have no intermediate machine; longer spans extend
            // the (k, l-1) entry, which precedes (k, l) in lexicographic order.
            if (l == k + 1)
                lm.at(j, idx) = 0;
            else
                lm.at(j, idx) = lm.at(j, idx - 1) + inst.p(j, l - 1);
        }
    }
    return lm;
}

inline LagMatrix compute_lags(const Instance& inst) { return compute_lags(inst, machine_pairs(inst.machines())); }

/// Johnson's rule: jobs with a <= b by ascending a, then the rest by
/// descending b. Ties go to the smaller job id.
inline Permutation johnson_order(std::span<const Time> a, std::span<const Time> b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("johnson_order: time vectors differ in length");
    Permutation head;
    Permutation tail;
    for (std::size_t j = 0; j < a.size(); ++j)
        (a[j] <= b[j] ? head : tail).push_back(static_cast<JobId>(j));
    std::stable_sort(head.begin(), head.end(), [&](JobId x, JobId y) { return a[x] < a[y]; });
    std::stable_sort(tail.begin(), tail.end(), [&](JobId x, JobId y) { return b[x] > b[y]; });
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

inline JohnsonMatrix compute_johnson_matrices(const Instance& inst, const LagMatrix& lm, const MachinePairTable& pairs)
{
    const auto n = static_cast<std::size_t>(inst.jobs());
    JohnsonMatrix jm(n, pairs.size());
    std::vector<Time> a(n);
    std::vector<Time> b(n);
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        const auto [k, l] = pairs[idx];
        for (std::size_t j = 0; j < n; ++j) {
            const auto job = static_cast<JobId>(j);
            const Time lag = lm.at(job, idx);
            a[j] = inst.p(job, k) + lag;
            b[j] = lag + inst.p(job, l);
        }
        const auto order = johnson_order(a, b);
        std::copy(order.begin(), order.end(), jm.column(idx).begin());
    }
    return jm;
}

/// Two-machine schedule with lags, run in `order`. Times are indexed by job id.
inline Time two_machine_lag_makespan(std::span<const JobId> order, std::span<const Time> a, std::span<const Time> lag,
                                     std::span<const Time> b, Time start_a, Time start_b)
{
    Time t1 = start_a;
    Time t2 = start_b;
    for (JobId job : order) {
        t1 += a[job];
        t2 = std::max(t2, t1 + lag[job]) + b[job];
    }
    return t2;
}

/// Per-node earliest starts (heads) of the unscheduled jobs and their
/// machine-wise minima, plus the minimal tails.
struct HeadVectors {
    std::vector<JobId> jobs;           ///< unscheduled jobs, ascending
    std::vector<Time> job_heads;       ///< jobs.size() × m, row i belongs to jobs[i]
    std::vector<Time> min_heads;       ///< length m
    std::vector<Time> min_tails;       ///< length m

    Time head(std::size_t row, int k, int m) const noexcept { return job_heads[row * m + k]; }
};

inline HeadVectors head_vectors(const Instance& inst, std::span<const Time> prefix_completion, const JobSet& scheduled,
                                const TailTable& tails)
{
    const int m = inst.machines();
    HeadVectors hv;
    hv.min_heads.assign(m, std::numeric_limits<Time>::max());
    hv.min_tails.assign(m, std::numeric_limits<Time>::max());
    for (int j = 0; j < inst.jobs(); ++j) {
        if (scheduled.test(j))
            continue;
        hv.jobs.push_back(j);
        Time r = prefix_completion[0];
        for (int k = 0; k < m; ++k) {
            if (k > 0)
                r = std::max(prefix_completion[k], r + inst.p(j, k - 1));
            hv.job_heads.push_back(r);
            hv.min_heads[k] = std::min(hv.min_heads[k], r);
            hv.min_tails[k] = std::min(hv.min_tails[k], tails.at(j, k));
        }
    }
    if (hv.jobs.empty()) {
        hv.min_heads.assign(prefix_completion.begin(), prefix_completion.end());
        hv.min_tails.assign(m, 0);
    }
    return hv;
}

/// Everything the bound needs to know about one node.
struct BoundInput {
    JobSet scheduled;
    std::vector<Time> min_heads;
    std::vector<Time> min_tails;
    int remaining = 0;
};

/// Precomputed, immutable bound data for one instance. Safe to share across
/// threads.
class BoundTables {
public:
    explicit BoundTables(Instance inst)
        : inst_(std::move(inst)),
          pairs_(inst_.machines()),
          lags_(compute_lags(inst_, pairs_)),
          johnson_(compute_johnson_matrices(inst_, lags_, pairs_)),
          tails_(inst_)
    {
    }

    const Instance& instance() const noexcept { return inst_; }
    const MachinePairTable& pairs() const noexcept { return pairs_; }
    const LagMatrix& lags() const noexcept { return lags_; }
    const JohnsonMatrix& johnson() const noexcept { return johnson_; }
    const TailTable& tails() const noexcept { return tails_; }

    /// Builds the bound input of a node directly from its prefix state,
    /// computing only the m-length head and tail minima.
    BoundInput make_input(std::span<const Time> prefix_completion, const JobSet& scheduled) const
    {
        const int m = inst_.machines();
        BoundInput in;
        in.scheduled = scheduled;
        in.remaining = inst_.jobs() - static_cast<int>(scheduled.count());
        in.min_heads.assign(m, std::numeric_limits<Time>::max());
        in.min_tails.assign(m, std::numeric_limits<Time>::max());
        if (in.remaining == 0) {
            in.min_heads.assign(prefix_completion.begin(), prefix_completion.end());
            in.min_tails.assign(m, 0);
            return in;
        }
        for (int j = 0; j < inst_.jobs(); ++j) {
            if (scheduled.test(j))
                continue;
            Time r = prefix_completion[0];
            in.min_heads[0] = std::min(in.min_heads[0], r);
            in.min_tails[0] = std::min(in.min_tails[0], tails_.at(j, 0));
            for (int k = 1; k < m; ++k) {
                r = std::max(prefix_completion[k], r + inst_.p(j, k - 1));
                in.min_heads[k] = std::min(in.min_heads[k], r);
                in.min_tails[k] = std::min(in.min_tails[k], tails_.at(j, k));
            }
        }
        return in;
    }

private:
    Instance inst_;
    MachinePairTable pairs_;
    LagMatrix lags_;
    JohnsonMatrix johnson_;
    TailTable tails_;
};

/// Read counts per table for one or more bound evaluations.
struct AccessTally {
    std::uint64_t ptm = 0;
    std::uint64_t lm = 0;
    std::uint64_t jm = 0;
    std::uint64_t rm = 0;
    std::uint64_t qm = 0;
    std::uint64_t mm = 0;
};

namespace detail {

template <bool Counted>
Time lower_bound_impl(const BoundInput& input, const BoundTables& tables, AccessTally* tally)
{
    if (input.remaining <= 0)
        throw std::invalid_argument("compute_lb: node has no unscheduled job");

    const Instance& inst = tables.instance();
    const auto& pairs = tables.pairs();
    const auto& lm = tables.lags();
    const auto& jm = tables.johnson();
    const auto n = static_cast<std::size_t>(inst.jobs());

    if (pairs.size() == 0) {
        // Single machine: the remaining load is exact.
        Time t = input.min_heads[0];
        for (std::size_t j = 0; j < n; ++j)
            if (!input.scheduled.test(j))
                t += inst.p(static_cast<JobId>(j), 0);
        return t + input.min_tails[0];
    }

    // Unscheduled flags unpacked once; the pair loop below is the hot path.
    thread_local std::vector<unsigned char> open;
    open.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        open[j] = !input.scheduled.test(j);

    const Time* ptm = inst.times().data();
    const Time* lags = lm.data();
    const auto m = static_cast<std::size_t>(inst.machines());
    const std::size_t cols = lm.cols();

    Time lb = 0;
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        const auto m1 = static_cast<std::size_t>(pairs[idx].first);
        const auto m2 = static_cast<std::size_t>(pairs[idx].second);
        Time on_m1 = input.min_heads[m1];
        Time on_m2 = input.min_heads[m2];
        if constexpr (Counted) {
            tally->mm += 2;
            tally->rm += 2;
        }
        const auto order = jm.column(idx);
        for (std::size_t i = 0; i < n; ++i) {
            const auto job = static_cast<std::size_t>(order[i]);
            if constexpr (Counted)
                ++tally->jm;
            if (!open[job])
                continue;
            const Time* row = ptm + job * m;
            on_m1 += row[m1];
            on_m2 = std::max(on_m2, on_m1 + lags[job * cols + idx]) + row[m2];
            if constexpr (Counted) {
                tally->ptm += 2;
                ++tally->lm;
            }
        }
        on_m2 += input.min_tails[m2];
        if constexpr (Counted)
            ++tally->qm;
        lb = std::max(lb, on_m2);
    }
    return lb;
}

} // namespace detail

/// Lower bound on the makespan of every completion of the node described by
/// `input`. Requires at least one unscheduled job.
inline Time compute_lb(const BoundInput& input, const BoundTables& tables)
{
    return detail::lower_bound_impl<false>(input, tables, nullptr);
}

/// Same value as compute_lb, also counting table reads into `tally`.
inline Time compute_lb_counted(const BoundInput& input, const BoundTables& tables, AccessTally& tally)
{
    return detail::lower_bound_impl<true>(input, tables, &tally);
}

} // namespace fsbb
