#pragma once

// Replay benchmark: every (pool size, backend) pair solves the same frozen
// pool, and speedups are taken against the serial backend at the same pool
// size.

#include "fsbb/search.hpp"

#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fsbb {

struct BenchBackend {
    BackendKind kind = BackendKind::serial;
    int workers = 1;
};

/// Parses "serial", "workers" (uses `default_workers`) or "workers:W".
inline BenchBackend parse_bench_backend(std::string_view spec, int default_workers = 1)
{
    if (spec == "serial")
        return {BackendKind::serial, 1};
    if (spec == "workers")
        return {BackendKind::workers, default_workers};
    if (spec.starts_with("workers:")) {
        const auto w = detail::parse_int(spec.substr(8), 0, "worker count");
        if (w < 1)
            throw std::invalid_argument("worker count must be >= 1");
        return {BackendKind::workers, static_cast<int>(w)};
    }
    throw std::invalid_argument("unknown backend '" + std::string(spec) + "'");
}

struct BenchRow {
    std::string instance;
    std::size_t pool = 0;
    std::string backend;
    int workers = 1;
    double wall_ms = 0.0;
    std::uint64_t branched = 0;
    std::uint64_t pruned = 0;
    std::uint64_t bounded = 0;
    double speedup = 1.0;
    std::optional<Time> best;
    bool optimal = false;
};

inline std::vector<BenchRow> run_bench(const PoolSnapshot& snap, std::span<const std::size_t> pool_sizes,
                                       std::span<const BenchBackend> backends, SearchConfig base)
{
    const std::string label = std::to_string(snap.instance.jobs()) + "x" + std::to_string(snap.instance.machines());
    std::vector<BenchRow> rows;

    auto run_one = [&](std::size_t pool, const BenchBackend& be) {
        SearchConfig cfg = base;
        cfg.pool_extract = pool;
        cfg.backend.kind = be.kind;
        cfg.backend.workers = be.kind == BackendKind::serial ? 1 : be.workers;
        const auto result = replay_run(snap, cfg);
        BenchRow row;
        row.instance = label;
        row.pool = pool;
        row.backend = to_string(be.kind);
        row.workers = cfg.backend.workers;
        row.wall_ms = result.stats.total_seconds * 1000.0;
        row.branched = result.stats.branched;
        row.pruned = result.stats.pruned;
        row.bounded = result.stats.bounded;
        row.best = result.best_makespan;
        row.optimal = result.optimal;
        return row;
    };

    for (std::size_t pool : pool_sizes) {
        const BenchRow serial = run_one(pool, {BackendKind::serial, 1});
        for (const auto& be : backends) {
            if (be.kind == BackendKind::serial) {
                // The baseline itself; reuse it so its speedup is exactly 1.
                BenchRow row = serial;
                row.speedup = 1.0;
                rows.push_back(row);
                continue;
            }
            BenchRow row = run_one(pool, be);
            row.speedup = row.wall_ms > 0.0 ? serial.wall_ms / row.wall_ms : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

inline constexpr std::string_view bench_csv_header = "instance,P,backend,workers,wall_ms,branched,pruned,bounded,speedup";

inline std::string write_bench_csv(std::span<const BenchRow> rows)
{
    std::ostringstream out;
    out << bench_csv_header << '\n';
    char buf[64];
    for (const auto& r : rows) {
        out << r.instance << ',' << r.pool << ',' << r.backend << ',' << r.workers << ',';
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
        out << buf << ',' << r.branched << ',' << r.pruned << ',' << r.bounded << ',';
        std::snprintf(buf, sizeof buf, "%.3f", r.speedup);
        out << buf << '\n';
    }
    return out.str();
}

/// 64-bit FNV-1a, used as a stable content digest for generated files.
inline std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace fsbb
