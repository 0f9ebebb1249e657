// fsbb: flow-shop branch-and-bound command line.
//
//   fsbb generate  --n 20 --m 5 --seed 1 --out inst.txt
//   fsbb solve     --instance inst.txt [--backend workers --workers 4] [--ub 1278]
//   fsbb record    --instance inst.txt --snapshot pool.snap --horizon-nodes 1000
//   fsbb bench     --snapshot pool.snap --pools 4096,8192 --backends serial,workers:4 --csv out.csv
//   fsbb placement --n 200 --m 20 --nprime 100 --entry-bytes 1 --budget 49152
//
// Exit codes: 0 proven optimum (or success), 2 stopped by a budget, 1 usage
// or input error.

#include "fsbb/bench.hpp"
#include "fsbb/instance.hpp"
#include "fsbb/placement.hpp"
#include "fsbb/search.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_budget = 2;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out.flush())
        throw std::runtime_error("failed writing '" + path + "'");
}

std::string hex64(std::uint64_t v)
{
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << v;
    return out.str();
}

/// Either --instance PATH or --n/--m/--seed.
struct InstanceSource {
    std::string path;
    int n = 0;
    int m = 0;
    std::int64_t seed = 0;

    void add_to(CLI::App& cmd)
    {
        cmd.add_option("--instance", path, "Instance file");
        cmd.add_option("--n", n, "Jobs (generated instance)");
        cmd.add_option("--m", m, "Machines (generated instance)");
        cmd.add_option("--seed", seed, "Generator seed (generated instance)");
    }

    bool given() const { return !path.empty() || seed != 0 || n != 0 || m != 0; }

    fsbb::Instance load() const
    {
        if (!path.empty())
            return fsbb::parse_instance(read_file(path));
        if (n < 1 || m < 1)
            throw std::invalid_argument("need --instance PATH or --n, --m and --seed");
        return fsbb::taillard_generate(n, m, seed);
    }
};

struct SearchFlags {
    std::size_t pool = 8192;
    std::string backend = "serial";
    int workers = 1;
    std::size_t chunk = 256;
    std::optional<fsbb::Time> ub;
    std::optional<std::uint64_t> node_budget;
    std::optional<double> time_budget;
    std::string prune_ties = "on";
    std::string strategy = "best";
    int verbosity = 0;

    void add_to(CLI::App& cmd, bool with_backend = true)
    {
        cmd.add_option("--pool", pool, "Nodes selected per iteration")->check(CLI::PositiveNumber);
        if (with_backend) {
            cmd.add_option("--backend", backend, "Bounding backend")->check(CLI::IsMember({"serial", "workers"}));
            cmd.add_option("--workers", workers, "Worker count")->check(CLI::PositiveNumber);
        }
        cmd.add_option("--chunk", chunk, "Inputs per worker chunk")->check(CLI::PositiveNumber);
        cmd.add_option("--ub", ub, "Initial upper bound");
        cmd.add_option("--node-budget", node_budget, "Stop after this many branched nodes");
        cmd.add_option("--time-budget", time_budget, "Stop after this many seconds");
        cmd.add_option("--prune-ties", prune_ties, "Prune nodes whose bound equals the incumbent")
            ->check(CLI::IsMember({"on", "off"}));
        cmd.add_option("--strategy", strategy, "Selection order")->check(CLI::IsMember({"best", "depth"}));
        cmd.add_flag("-v,--verbose", verbosity, "Progress output");
    }

    fsbb::SearchConfig config() const
    {
        fsbb::SearchConfig cfg;
        cfg.pool_extract = pool;
        cfg.backend.kind = backend == "workers" ? fsbb::BackendKind::workers : fsbb::BackendKind::serial;
        cfg.backend.workers = cfg.backend.kind == fsbb::BackendKind::workers ? workers : 1;
        cfg.backend.chunk = chunk;
        cfg.strategy = strategy == "depth" ? fsbb::Strategy::depth_first : fsbb::Strategy::best_first;
        cfg.initial_ub = ub;
        cfg.node_budget = node_budget;
        cfg.time_budget_seconds = time_budget;
        cfg.prune_ties = prune_ties == "on";
        cfg.verbosity = verbosity;
        return cfg;
    }
};

int cmd_generate(int n, int m, std::int64_t seed, const std::string& out_path)
{
    const auto text = fsbb::write_instance(fsbb::taillard_generate(n, m, seed));
    write_file(out_path, text);
    std::cout << out_path << " fnv1a64:" << hex64(fsbb::fnv1a64(text)) << '\n';
    return exit_ok;
}

void print_report(const fsbb::Instance& inst, const fsbb::SearchResult& r)
{
    const auto& s = r.stats;
    std::cout << "instance " << inst.jobs() << "x" << inst.machines() << '\n';
    std::cout << "status " << (r.optimal ? "optimal" : "budget-stop") << '\n';
    if (r.best_makespan) {
        std::cout << (r.optimal ? "optimum " : "incumbent ") << *r.best_makespan << '\n';
        std::cout << "permutation";
        for (auto j : r.best)
            std::cout << ' ' << j;
        std::cout << '\n';
    } else {
        std::cout << (r.optimal ? "optimum none (no schedule within the given upper bound)\n" : "incumbent none\n");
    }
    std::cout << "branched " << s.branched << "\npruned " << s.pruned << "\nbounded " << s.bounded << "\nleaves "
              << s.leaves << "\niterations " << s.iterations << '\n';
    std::cout << std::fixed << std::setprecision(3) << "wall_ms " << s.total_seconds * 1000.0 << "\nbounding_ms "
              << s.bounding_seconds * 1000.0 << "\nbounding_fraction " << s.bounding_fraction() << '\n';
}

int cmd_solve(const InstanceSource& src, const SearchFlags& flags, const std::string& snapshot_path)
{
    fsbb::SearchResult result;
    std::optional<fsbb::Instance> inst;
    if (!snapshot_path.empty()) {
        const auto snap = fsbb::parse_snapshot(read_file(snapshot_path));
        inst = src.given() ? src.load() : snap.instance;
        result = fsbb::replay_run(snap, *inst, flags.config());
    } else {
        inst = src.load();
        result = fsbb::solve(*inst, flags.config());
    }
    print_report(*inst, result);
    return result.optimal ? exit_ok : exit_budget;
}

int cmd_record(const InstanceSource& src, const SearchFlags& flags, const std::string& snapshot_path,
               std::optional<std::uint64_t> horizon_nodes, std::optional<double> horizon_seconds)
{
    const auto inst = src.load();
    const auto snap = fsbb::record_pool(inst, flags.config(), {horizon_nodes, horizon_seconds});
    const auto text = fsbb::write_snapshot(snap);
    write_file(snapshot_path, text);
    std::cout << snapshot_path << " nodes " << snap.nodes.size() << " incumbent ";
    if (snap.incumbent)
        std::cout << *snap.incumbent;
    else
        std::cout << "inf";
    std::cout << " fnv1a64:" << hex64(fsbb::fnv1a64(text)) << '\n';
    return exit_ok;
}

int cmd_bench(const InstanceSource& src, const SearchFlags& flags, const std::string& snapshot_path,
              const std::vector<std::size_t>& pools, const std::vector<std::string>& backend_specs,
              const std::string& csv_path)
{
    const auto snap = fsbb::parse_snapshot(read_file(snapshot_path));
    if (src.given() && !(src.load() == snap.instance))
        throw std::invalid_argument("snapshot was recorded for a different instance");
    std::vector<fsbb::BenchBackend> backends;
    for (const auto& spec : backend_specs)
        backends.push_back(fsbb::parse_bench_backend(spec, flags.workers));
    const auto rows = fsbb::run_bench(snap, pools, backends, flags.config());
    const auto csv = fsbb::write_bench_csv(rows);
    if (!csv_path.empty())
        write_file(csv_path, csv);
    std::cout << csv;
    for (const auto& row : rows)
        if (!row.optimal)
            return exit_budget;
    return exit_ok;
}

int cmd_placement(std::uint64_t n, std::uint64_t m, std::optional<std::uint64_t> nprime, std::uint64_t entry_bytes,
                  std::uint64_t budget)
{
    const auto profiles = fsbb::placement::profile_structures(n, m, nprime.value_or(std::max<std::uint64_t>(1, n / 2)),
                                                              entry_bytes);
    const auto plan = fsbb::placement::select_placement(profiles, budget);
    std::cout << std::left << std::setw(6) << "name" << std::right << std::setw(12) << "bytes" << std::setw(14)
              << "accesses" << "  selected\n";
    for (const auto& p : profiles)
        std::cout << std::left << std::setw(6) << p.name << std::right << std::setw(12) << p.bytes() << std::setw(14)
                  << p.accesses << "  " << (plan.contains(p.name) ? "yes" : "no") << '\n';
    std::cout << "fast_bytes_used " << plan.fast_bytes_used << " / " << plan.budget_bytes << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Permutation flow-shop branch-and-bound with batched lower-bound evaluation"};
    app.require_subcommand(1);

    int gen_n = 0;
    int gen_m = 0;
    std::int64_t gen_seed = 0;
    std::string gen_out;
    auto* generate = app.add_subcommand("generate", "Write a generated instance file");
    generate->add_option("--n", gen_n, "Jobs")->required()->check(CLI::PositiveNumber);
    generate->add_option("--m", gen_m, "Machines")->required()->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen_seed, "Seed in (0, 2^31-1)")->required();
    generate->add_option("--out", gen_out, "Output path")->required();

    InstanceSource solve_src;
    SearchFlags solve_flags;
    std::string solve_snapshot;
    auto* solve = app.add_subcommand("solve", "Solve an instance (or replay a snapshot)");
    solve_src.add_to(*solve);
    solve_flags.add_to(*solve);
    solve->add_option("--snapshot", solve_snapshot, "Start from a recorded pool");

    InstanceSource rec_src;
    SearchFlags rec_flags;
    std::string rec_snapshot;
    std::optional<std::uint64_t> horizon_nodes;
    std::optional<double> horizon_seconds;
    auto* record = app.add_subcommand("record", "Run the serial engine briefly and freeze its pool");
    rec_src.add_to(*record);
    rec_flags.add_to(*record, false);
    record->add_option("--snapshot", rec_snapshot, "Output snapshot path")->required();
    record->add_option("--horizon-nodes", horizon_nodes, "Branched-node horizon");
    record->add_option("--horizon-seconds", horizon_seconds, "Wall-time horizon");

    InstanceSource bench_src;
    SearchFlags bench_flags;
    std::string bench_snapshot;
    std::vector<std::size_t> bench_pools{4096, 8192};
    std::vector<std::string> bench_backends{"serial", "workers"};
    std::string bench_csv;
    auto* bench = app.add_subcommand("bench", "Replay a snapshot across pool sizes and backends, emit CSV");
    bench_src.add_to(*bench);
    bench_flags.add_to(*bench, false);
    bench->add_option("--workers", bench_flags.workers, "Workers for a bare 'workers' backend")
        ->check(CLI::PositiveNumber);
    bench->add_option("--snapshot", bench_snapshot, "Snapshot path")->required();
    bench->add_option("--pools", bench_pools, "Pool sizes")->delimiter(',');
    bench->add_option("--backends", bench_backends, "Backends: serial, workers, workers:W")->delimiter(',');
    bench->add_option("--csv", bench_csv, "CSV output path");

    std::uint64_t pl_n = 200;
    std::uint64_t pl_m = 20;
    std::optional<std::uint64_t> pl_nprime;
    std::uint64_t pl_entry = 1;
    std::uint64_t pl_budget = 48 * 1024;
    auto* placement = app.add_subcommand("placement", "Advise which bound tables fit in fast memory");
    placement->add_option("--n", pl_n, "Jobs");
    placement->add_option("--m", pl_m, "Machines");
    placement->add_option("--nprime", pl_nprime, "Remaining jobs (default n/2)");
    placement->add_option("--entry-bytes", pl_entry, "Bytes per table entry");
    placement->add_option("--budget", pl_budget, "Fast-memory budget in bytes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_error;
    }

    try {
        if (*generate)
            return cmd_generate(gen_n, gen_m, gen_seed, gen_out);
        if (*solve)
            return cmd_solve(solve_src, solve_flags, solve_snapshot);
        if (*record)
            return cmd_record(rec_src, rec_flags, rec_snapshot, horizon_nodes, horizon_seconds);
        if (*bench)
            return cmd_bench(bench_src, bench_flags, bench_snapshot, bench_pools, bench_backends, bench_csv);
        if (*placement)
            return cmd_placement(pl_n, pl_m, pl_nprime, pl_entry, pl_budget);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
