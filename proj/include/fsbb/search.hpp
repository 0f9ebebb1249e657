#pragma once

// Branch-and-bound driver. Each iteration pops up to P open nodes, branches
// them on the host, completes the children that have at most one job left,
// bounds all other children in a single backend batch and keeps those that
// can still beat the incumbent.
//
// The driver is single-threaded; only the backend's evaluate() runs in
// parallel. With fixed ordering rules the exploration is a function of the
// instance, the configuration and the starting pool, never of the backend.

#include "fsbb/backend.hpp"
#include "fsbb/bounds.hpp"
#include "fsbb/instance.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fsbb {

/// A partial schedule: a prefix of fixed jobs and its per-machine completion
/// times.
struct Node {
    Permutation prefix;
    JobSet scheduled;
    std::vector<Time> prefix_completion;
    std::optional<Time> lb;

    int depth() const noexcept { return static_cast<int>(prefix.size()); }

    static Node root(const Instance& inst)
    {
        Node node;
        node.scheduled.resize(static_cast<std::size_t>(inst.jobs()));
        node.prefix_completion.assign(static_cast<std::size_t>(inst.machines()), 0);
        return node;
    }

    /// Rebuilds a node from its prefix alone.
    static Node from_prefix(const Instance& inst, Permutation prefix)
    {
        Node node = root(inst);
        for (JobId j : prefix) {
            if (j < 0 || j >= inst.jobs() || node.scheduled.test(static_cast<std::size_t>(j)))
                throw std::invalid_argument("prefix has an invalid or repeated job id");
            node.scheduled.set(static_cast<std::size_t>(j));
        }
        node.prefix_completion = completion_times(inst, prefix, std::move(node.prefix_completion));
        node.prefix = std::move(prefix);
        return node;
    }
};

/// Children of `node`, one per unscheduled job in ascending job id.
inline std::vector<Node> branch(const Node& node, const Instance& inst)
{
    const int n = inst.jobs();
    const int m = inst.machines();
    if (node.depth() >= n)
        throw std::invalid_argument("branch: node is a complete schedule");

    std::vector<Node> children;
    children.reserve(static_cast<std::size_t>(n - node.depth()));
    for (int j = 0; j < n; ++j) {
        if (node.scheduled.test(static_cast<std::size_t>(j)))
            continue;
        Node child;
        child.prefix.reserve(node.prefix.size() + 1);
        child.prefix = node.prefix;
        child.prefix.push_back(j);
        child.scheduled = node.scheduled;
        child.scheduled.set(static_cast<std::size_t>(j));
        child.prefix_completion.resize(static_cast<std::size_t>(m));
        child.prefix_completion[0] = node.prefix_completion[0] + inst.p(j, 0);
        for (int k = 1; k < m; ++k)
            child.prefix_completion[k] =
                std::max(child.prefix_completion[k - 1], node.prefix_completion[k]) + inst.p(j, k);
        children.push_back(std::move(child));
    }
    return children;
}

enum class Strategy { best_first, depth_first };

/// Open nodes. Best-first pops by (lb asc, depth desc, insertion asc);
/// depth-first by (depth desc, lb asc, insertion asc). A node without a
/// bound sorts as lb 0.
class Pool {
public:
    explicit Pool(Strategy strategy = Strategy::best_first) : strategy_(strategy) {}

    bool empty() const noexcept { return heap_.empty(); }
    std::size_t size() const noexcept { return heap_.size(); }

    void push(Node node)
    {
        heap_.push_back({std::move(node), next_seq_++});
        std::push_heap(heap_.begin(), heap_.end(), Later{strategy_});
    }

    Node pop()
    {
        std::pop_heap(heap_.begin(), heap_.end(), Later{strategy_});
        Node node = std::move(heap_.back().node);
        heap_.pop_back();
        return node;
    }

    /// Copy of the open nodes in extraction order.
    std::vector<Node> ordered() const
    {
        auto entries = heap_;
        std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) { return Later{strategy_}(b, a); });
        std::vector<Node> out;
        out.reserve(entries.size());
        for (auto& e : entries)
            out.push_back(std::move(e.node));
        return out;
    }

private:
    struct Entry {
        Node node;
        std::uint64_t seq;
    };

    // Heap comparator: true when `a` is extracted after `b`.
    struct Later {
        Strategy strategy;

        bool operator()(const Entry& a, const Entry& b) const noexcept
        {
            const Time la = a.node.lb.value_or(0);
            const Time lb = b.node.lb.value_or(0);
            const int da = a.node.depth();
            const int db = b.node.depth();
            if (strategy == Strategy::best_first) {
                if (la != lb)
                    return la > lb;
                if (da != db)
                    return da < db;
            } else {
                if (da != db)
                    return da < db;
                if (la != lb)
                    return la > lb;
            }
            return a.seq > b.seq;
        }
    };

    Strategy strategy_;
    std::vector<Entry> heap_;
    std::uint64_t next_seq_ = 0;
};

/// Observation points for tests and instrumentation. All are optional and
/// called from the driver thread.
struct SearchHooks {
    std::function<void(const Node&, Time incumbent)> on_expand;
    std::function<void(const Node&, Time incumbent)> on_prune;
    std::function<void(std::span<const Node>, std::span<const Time>)> on_batch;
    std::function<void(Time)> on_incumbent;
};

struct SearchConfig {
    std::size_t pool_extract = 8192;
    BackendConfig backend;
    Strategy strategy = Strategy::best_first;
    std::optional<Time> initial_ub;
    std::optional<std::uint64_t> node_budget;
    std::optional<double> time_budget_seconds;
    /// Prune on lb >= incumbent when true, lb > incumbent when false.
    bool prune_ties = true;
    int verbosity = 0;
    SearchHooks hooks;
};

struct SearchStats {
    std::uint64_t branched = 0;
    std::uint64_t pruned = 0;
    std::uint64_t bounded = 0;
    std::uint64_t leaves = 0;
    std::uint64_t iterations = 0;
    double total_seconds = 0.0;
    double bounding_seconds = 0.0;

    double bounding_fraction() const noexcept { return total_seconds > 0.0 ? bounding_seconds / total_seconds : 0.0; }
};

struct SearchResult {
    /// Empty when no schedule at or below the incumbent was found (possible
    /// only with an external upper bound).
    Permutation best;
    std::optional<Time> best_makespan;
    /// False when a budget stopped the search before the pool was exhausted.
    bool optimal = false;
    SearchStats stats;
};

/// Frozen search state: the open pool (in extraction order) and the
/// incumbent.
struct PoolSnapshot {
    Instance instance;
    std::optional<Time> incumbent;
    Permutation incumbent_perm;
    std::vector<Node> nodes;
};

class Solver {
public:
    Solver(Instance inst, SearchConfig cfg)
        : cfg_(std::move(cfg)), tables_(std::move(inst)), backend_(make_backend(cfg_.backend)), pool_(cfg_.strategy)
    {
        if (cfg_.pool_extract < 1)
            throw std::invalid_argument("search: pool size must be >= 1");
        if (cfg_.initial_ub)
            incumbent_ = *cfg_.initial_ub;
    }

    const Instance& instance() const noexcept { return tables_.instance(); }
    const BoundTables& tables() const noexcept { return tables_; }
    const Backend& backend() const noexcept { return *backend_; }
    const SearchConfig& config() const noexcept { return cfg_; }
    std::size_t open_nodes() const noexcept { return pool_.size(); }

    void seed_root() { pool_.push(Node::root(instance())); }

    void load(const PoolSnapshot& snap)
    {
        if (!(snap.instance == instance()))
            throw std::invalid_argument("snapshot was recorded for a different instance");
        if (snap.incumbent &&
            (*snap.incumbent < incumbent_ || (*snap.incumbent == incumbent_ && !snap.incumbent_perm.empty()))) {
            incumbent_ = *snap.incumbent;
            best_ = snap.incumbent_perm;
            attained_ = !best_.empty();
        }
        for (const auto& node : snap.nodes)
            pool_.push(node);
    }

    PoolSnapshot snapshot() const
    {
        PoolSnapshot snap{instance(), std::nullopt, {}, pool_.ordered()};
        if (incumbent_ != unbounded) {
            snap.incumbent = incumbent_;
            snap.incumbent_perm = best_;
        }
        return snap;
    }

    /// Explores until the pool is empty or a budget runs out.
    SearchResult run()
    {
        using clock = std::chrono::steady_clock;
        const auto started = clock::now();
        const int n = instance().jobs();
        bool stopped = false;

        std::vector<Node> selected;
        std::vector<Node> batch_nodes;
        std::vector<BoundInput> inputs;

        while (!pool_.empty()) {
            if (budget_exhausted(started)) {
                stopped = true;
                break;
            }
            ++stats_.iterations;

            selected.clear();
            while (selected.size() < cfg_.pool_extract && !pool_.empty()) {
                Node node = pool_.pop();
                if (node.lb && prunes(*node.lb)) {
                    ++stats_.pruned;
                    if (cfg_.hooks.on_prune)
                        cfg_.hooks.on_prune(node, incumbent_);
                    continue;
                }
                selected.push_back(std::move(node));
            }

            batch_nodes.clear();
            for (const Node& node : selected) {
                ++stats_.branched;
                if (cfg_.hooks.on_expand)
                    cfg_.hooks.on_expand(node, incumbent_);
                for (Node& child : branch(node, instance())) {
                    const int left = n - child.depth();
                    if (left <= 1)
                        complete(std::move(child));
                    else
                        batch_nodes.push_back(std::move(child));
                }
            }
            if (batch_nodes.empty())
                continue;

            const auto bound_start = clock::now();
            inputs.clear();
            inputs.reserve(batch_nodes.size());
            for (const Node& child : batch_nodes)
                inputs.push_back(tables_.make_input(child.prefix_completion, child.scheduled));
            const BatchResult result = backend_->evaluate({inputs, &tables_});
            stats_.bounding_seconds += std::chrono::duration<double>(clock::now() - bound_start).count();
            stats_.bounded += batch_nodes.size();
            if (cfg_.hooks.on_batch)
                cfg_.hooks.on_batch(batch_nodes, result.lbs);

            for (std::size_t i = 0; i < batch_nodes.size(); ++i) {
                Node& child = batch_nodes[i];
                child.lb = result.lbs[i];
                if (prunes(result.lbs[i])) {
                    ++stats_.pruned;
                    if (cfg_.hooks.on_prune)
                        cfg_.hooks.on_prune(child, incumbent_);
                } else {
                    pool_.push(std::move(child));
                }
            }

            if (cfg_.verbosity > 0 && stats_.iterations % 100 == 0)
                std::clog << "iter " << stats_.iterations << " open " << pool_.size() << " branched "
                          << stats_.branched << " incumbent " << incumbent_ << '\n';
        }

        stats_.total_seconds += std::chrono::duration<double>(clock::now() - started).count();

        SearchResult result;
        result.stats = stats_;
        result.optimal = !stopped;
        if (attained_) {
            result.best = best_;
            result.best_makespan = incumbent_;
        }
        return result;
    }

private:
    static constexpr Time unbounded = std::numeric_limits<Time>::max();

    bool prunes(Time lb) const noexcept
    {
        // An external bound without a schedule behind it only rules out
        // strictly worse nodes; a schedule attaining it still has to be found.
        if (cfg_.prune_ties && attained_)
            return lb >= incumbent_;
        return lb > incumbent_;
    }

    void complete(Node node)
    {
        const int n = instance().jobs();
        if (node.depth() < n) {
            for (int j = 0; j < n; ++j)
                if (!node.scheduled.test(static_cast<std::size_t>(j))) {
                    node.prefix.push_back(j);
                    node.scheduled.set(static_cast<std::size_t>(j));
                }
        }
        ++stats_.leaves;
        const Time cmax = makespan(instance(), node.prefix);
        if (cmax < incumbent_ || (!attained_ && cmax == incumbent_)) {
            incumbent_ = cmax;
            best_ = std::move(node.prefix);
            attained_ = true;
            if (cfg_.hooks.on_incumbent)
                cfg_.hooks.on_incumbent(incumbent_);
        }
    }

    bool budget_exhausted(std::chrono::steady_clock::time_point started) const
    {
        if (cfg_.node_budget && stats_.branched >= *cfg_.node_budget)
            return true;
        if (cfg_.time_budget_seconds) {
            const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            if (elapsed >= *cfg_.time_budget_seconds)
                return true;
        }
        return false;
    }

    SearchConfig cfg_;
    BoundTables tables_;
    std::unique_ptr<Backend> backend_;
    Pool pool_;
    Time incumbent_ = unbounded;
    Permutation best_;
    bool attained_ = false;
    SearchStats stats_;
};

inline SearchResult solve(const Instance& inst, const SearchConfig& cfg)
{
    Solver solver(inst, cfg);
    solver.seed_root();
    return solver.run();
}

/// How much serial search to run before freezing the pool. Unset fields do
/// not limit.
struct Horizon {
    std::optional<std::uint64_t> nodes;
    std::optional<double> seconds;
};

/// Runs the serial engine for `horizon`, then freezes the pool. The serial
/// backend is forced regardless of cfg.backend.
inline PoolSnapshot record_pool(const Instance& inst, SearchConfig cfg, const Horizon& horizon)
{
    if (horizon.seconds && *horizon.seconds < 0.0)
        throw std::invalid_argument("record_pool: horizon must be non-negative");
    cfg.backend = BackendConfig{};
    cfg.node_budget = horizon.nodes;
    cfg.time_budget_seconds = horizon.seconds;
    Solver solver(inst, std::move(cfg));
    solver.seed_root();
    solver.run();
    return solver.snapshot();
}

/// Solves to completion (or budget) starting from a frozen pool.
inline SearchResult replay_run(const PoolSnapshot& snap, const Instance& inst, const SearchConfig& cfg)
{
    Solver solver(inst, cfg);
    solver.load(snap);
    return solver.run();
}

inline SearchResult replay_run(const PoolSnapshot& snap, const SearchConfig& cfg)
{
    return replay_run(snap, snap.instance, cfg);
}

// Snapshot text format (v1):
//
//   v1 SNAPSHOT <n> <m> <incumbent|inf> <count>
//   <instance block: "n m" then n rows>
//   [best <n job ids>]          present when a schedule attains the incumbent
//   <depth> <lb> <prefix ids...>   one line per open node, extraction order
//
// <lb> is relative to the incumbent (lb - incumbent) when the incumbent is
// finite, absolute otherwise, and "-" for a node not yet bounded.

inline std::string write_snapshot(const PoolSnapshot& snap)
{
    std::ostringstream out;
    out << "v1 SNAPSHOT " << snap.instance.jobs() << ' ' << snap.instance.machines() << ' ';
    if (snap.incumbent)
        out << *snap.incumbent;
    else
        out << "inf";
    out << ' ' << snap.nodes.size() << '\n';
    out << write_instance(snap.instance);
    if (!snap.incumbent_perm.empty()) {
        out << "best";
        for (JobId j : snap.incumbent_perm)
            out << ' ' << j;
        out << '\n';
    }
    for (const Node& node : snap.nodes) {
        out << node.depth() << ' ';
        if (!node.lb)
            out << '-';
        else if (snap.incumbent)
            out << *node.lb - *snap.incumbent;
        else
            out << *node.lb;
        for (JobId j : node.prefix)
            out << ' ' << j;
        out << '\n';
    }
    return out.str();
}

inline PoolSnapshot parse_snapshot(std::string_view text)
{
    detail::LineReader reader(text);
    std::string_view line;
    if (!reader.next(line))
        throw ParseError(1, "empty snapshot");
    const auto header = detail::split_ws(line);
    if (header.size() != 6 || header[0] != "v1" || header[1] != "SNAPSHOT")
        throw ParseError(reader.line_no(), "expected 'v1 SNAPSHOT n m incumbent count'");
    const auto n = detail::parse_int(header[2], reader.line_no(), "job count");
    const auto m = detail::parse_int(header[3], reader.line_no(), "machine count");
    std::optional<Time> incumbent;
    if (header[4] != "inf")
        incumbent = detail::parse_int(header[4], reader.line_no(), "incumbent");
    const auto count = detail::parse_int(header[5], reader.line_no(), "node count");
    if (count < 0)
        throw ParseError(reader.line_no(), "negative node count");

    Instance inst = detail::read_instance_block(reader);
    if (inst.jobs() != n || inst.machines() != m)
        throw ParseError(reader.line_no(), "instance block does not match the snapshot header");

    PoolSnapshot snap{std::move(inst), incumbent, {}, {}};
    snap.nodes.reserve(static_cast<std::size_t>(count));
    while (reader.next(line)) {
        const auto tokens = detail::split_ws(line);
        if (tokens.front() == "best") {
            if (!snap.nodes.empty() || !snap.incumbent_perm.empty())
                throw ParseError(reader.line_no(), "'best' line must precede the node lines");
            for (std::size_t i = 1; i < tokens.size(); ++i)
                snap.incumbent_perm.push_back(static_cast<JobId>(detail::parse_int(tokens[i], reader.line_no(), "job id")));
            if (!is_full_permutation(snap.incumbent_perm, snap.instance.jobs()))
                throw ParseError(reader.line_no(), "'best' is not a permutation of the jobs");
            if (!incumbent || makespan(snap.instance, snap.incumbent_perm) != *incumbent)
                throw ParseError(reader.line_no(), "'best' schedule does not attain the incumbent");
            continue;
        }
        if (tokens.size() < 2)
            throw ParseError(reader.line_no(), "node line needs depth and lb");
        const auto depth = detail::parse_int(tokens[0], reader.line_no(), "depth");
        if (depth < 0 || static_cast<std::size_t>(depth) != tokens.size() - 2)
            throw ParseError(reader.line_no(), "depth does not match the prefix length");
        Permutation prefix;
        for (std::size_t i = 2; i < tokens.size(); ++i)
            prefix.push_back(static_cast<JobId>(detail::parse_int(tokens[i], reader.line_no(), "job id")));
        Node node;
        try {
            node = Node::from_prefix(snap.instance, std::move(prefix));
        } catch (const std::invalid_argument& e) {
            throw ParseError(reader.line_no(), e.what());
        }
        if (node.depth() >= snap.instance.jobs())
            throw ParseError(reader.line_no(), "open node must leave at least one job unscheduled");
        if (tokens[1] != "-") {
            const auto lb = detail::parse_int(tokens[1], reader.line_no(), "lower bound");
            node.lb = incumbent ? lb + *incumbent : lb;
        }
        snap.nodes.push_back(std::move(node));
    }
    if (static_cast<std::int64_t>(snap.nodes.size()) != count)
        throw ParseError(reader.line_no(), "header announces " + std::to_string(count) + " nodes, found " +
                                               std::to_string(snap.nodes.size()));
    return snap;
}

} // namespace fsbb
