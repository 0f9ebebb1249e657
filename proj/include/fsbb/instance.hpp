#pragma once

// Permutation flow-shop instances: data, makespan, generation and text I/O.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fsbb {

using Time = std::int64_t;
using JobId = int;

/// A job order. Full permutations cover [0, n); partial ones (prefixes,
/// subsets) use the same representation.
using Permutation = std::vector<JobId>;

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// n jobs × m machines with a row-major processing-time matrix.
/// Immutable after construction.
class Instance {
public:
    Instance(int jobs, int machines, std::vector<Time> times)
        : n_(jobs), m_(machines), ptm_(std::move(times))
    {
        if (n_ < 1 || m_ < 1)
            throw std::invalid_argument("instance needs at least one job and one machine");
        if (ptm_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(m_))
            throw std::invalid_argument("processing-time matrix must have n*m entries");
        if (std::any_of(ptm_.begin(), ptm_.end(), [](Time t) { return t < 0; }))
            throw std::invalid_argument("processing times must be non-negative");
    }

    int jobs() const noexcept { return n_; }
    int machines() const noexcept { return m_; }

    Time p(JobId j, int k) const noexcept { return ptm_[static_cast<std::size_t>(j) * m_ + k]; }

    /// Raw row-major matrix, row j = job j.
    const std::vector<Time>& times() const noexcept { return ptm_; }

    friend bool operator==(const Instance&, const Instance&) = default;

private:
    int n_;
    int m_;
    std::vector<Time> ptm_;
};

inline bool is_full_permutation(const Permutation& perm, int n)
{
    if (perm.size() != static_cast<std::size_t>(n))
        return false;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (JobId j : perm) {
        if (j < 0 || j >= n || seen[j])
            return false;
        seen[j] = 1;
    }
    return true;
}

/// Completion time of each machine after running `order` from the given
/// per-machine start state. `order` may be any sequence of distinct jobs.
inline std::vector<Time> completion_times(const Instance& inst, const Permutation& order,
                                          std::vector<Time> start)
{
    const int m = inst.machines();
    for (JobId j : order) {
        start[0] += inst.p(j, 0);
        for (int k = 1; k < m; ++k)
            start[k] = std::max(start[k], start[k - 1]) + inst.p(j, k);
    }
    return start;
}

inline Time makespan(const Instance& inst, const Permutation& perm)
{
    if (!is_full_permutation(perm, inst.jobs()))
        throw std::invalid_argument("makespan: order is not a permutation of the instance's jobs");
    const auto c = completion_times(inst, perm, std::vector<Time>(inst.machines(), 0));
    return c.back();
}

/// Minimal-standard Lehmer generator (16807 mod 2^31-1) in Schrage form,
/// the generator behind the classic flow-shop benchmark family.
class MinStdLcg {
public:
    static constexpr std::int64_t modulus = 2147483647;
    static constexpr std::int64_t multiplier = 16807;

    explicit MinStdLcg(std::int64_t seed) : state_(seed)
    {
        if (seed <= 0 || seed >= modulus)
            throw std::invalid_argument("seed must lie in (0, 2^31 - 1)");
    }

    std::int64_t state() const noexcept { return state_; }

    /// Advances the state and returns it scaled into (0, 1).
    double next_unit()
    {
        constexpr std::int64_t q = 127773;
        constexpr std::int64_t r = 2836;
        const std::int64_t hi = state_ / q;
        state_ = multiplier * (state_ - hi * q) - hi * r;
        if (state_ < 0)
            state_ += modulus;
        return static_cast<double>(state_) / static_cast<double>(modulus);
    }

    /// Uniform integer in [low, high].
    std::int64_t next_in(std::int64_t low, std::int64_t high)
    {
        const double u = next_unit();
        return low + static_cast<std::int64_t>(u * static_cast<double>(high - low + 1));
    }

private:
    std::int64_t state_;
};

/// Deterministic benchmark-style instance; times in [1, 99], drawn machine by
/// machine (all jobs of machine 0, then machine 1, ...).
inline Instance taillard_generate(int n, int m, std::int64_t seed)
{
    if (n < 1 || m < 1)
        throw std::invalid_argument("taillard_generate: n and m must be >= 1");
    MinStdLcg rng(seed);
    std::vector<Time> ptm(static_cast<std::size_t>(n) * m);
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < n; ++j)
            ptm[static_cast<std::size_t>(j) * m + k] = rng.next_in(1, 99);
    return Instance(n, m, std::move(ptm));
}

inline std::string write_instance(const Instance& inst)
{
    std::ostringstream out;
    out << inst.jobs() << ' ' << inst.machines() << '\n';
    for (int j = 0; j < inst.jobs(); ++j) {
        for (int k = 0; k < inst.machines(); ++k) {
            if (k)
                out << ' ';
            out << inst.p(j, k);
        }
        out << '\n';
    }
    return out.str();
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r')
            ++j;
        if (j > i)
            tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

inline std::int64_t parse_int(std::string_view tok, std::size_t line, const char* what)
{
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec == std::errc::result_out_of_range)
        throw ParseError(line, "integer out of range: '" + std::string(tok) + "'");
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(line, std::string("expected integer ") + what + ", got '" + std::string(tok) + "'");
    return value;
}

/// Iterates non-blank, non-comment lines, tracking 1-based line numbers.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    bool next(std::string_view& line)
    {
        while (pos_ < text_.size()) {
            const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
            std::string_view raw = text_.substr(pos_, end - pos_);
            pos_ = end + 1;
            ++line_no_;
            const auto tokens = split_ws(raw);
            if (tokens.empty() || tokens.front().front() == '#')
                continue;
            line = raw;
            return true;
        }
        return false;
    }

    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

/// Reads an instance block ("n m" + n rows) from an already-open reader.
inline Instance read_instance_block(LineReader& reader)
{
    std::string_view line;
    if (!reader.next(line))
        throw ParseError(reader.line_no() + 1, "missing header 'n m'");
    const auto header = split_ws(line);
    if (header.size() != 2)
        throw ParseError(reader.line_no(), "header must be 'n m'");
    const auto n = parse_int(header[0], reader.line_no(), "job count");
    const auto m = parse_int(header[1], reader.line_no(), "machine count");
    if (n < 1 || m < 1)
        throw ParseError(reader.line_no(), "job and machine counts must be >= 1");

    std::vector<Time> ptm;
    ptm.reserve(static_cast<std::size_t>(n * m));
    for (std::int64_t j = 0; j < n; ++j) {
        if (!reader.next(line))
            throw ParseError(reader.line_no(), "expected " + std::to_string(n) + " job rows, found " + std::to_string(j));
        const auto row = split_ws(line);
        if (static_cast<std::int64_t>(row.size()) != m)
            throw ParseError(reader.line_no(), "row " + std::to_string(j + 1) + " has " + std::to_string(row.size()) +
                                                   " entries, expected " + std::to_string(m) +
                                                   (static_cast<std::int64_t>(row.size()) < m ? " (short row)" : ""));
        for (auto tok : row) {
            const auto t = parse_int(tok, reader.line_no(), "processing time");
            if (t < 0)
                throw ParseError(reader.line_no(), "negative processing time " + std::string(tok));
            ptm.push_back(t);
        }
    }
    return Instance(static_cast<int>(n), static_cast<int>(m), std::move(ptm));
}

} // namespace detail

inline Instance parse_instance(std::string_view text)
{
    detail::LineReader reader(text);
    Instance inst = detail::read_instance_block(reader);
    std::string_view extra;
    if (reader.next(extra))
        throw ParseError(reader.line_no(), "unexpected content after the last job row");
    return inst;
}

/// Machine-load and job-length lower bounds on any permutation's makespan.
inline Time trivial_lower_bound(const Instance& inst)
{
    Time best = 0;
    for (int k = 0; k < inst.machines(); ++k) {
        Time load = 0;
        for (int j = 0; j < inst.jobs(); ++j)
            load += inst.p(j, k);
        best = std::max(best, load);
    }
    for (int j = 0; j < inst.jobs(); ++j) {
        Time len = 0;
        for (int k = 0; k < inst.machines(); ++k)
            len += inst.p(j, k);
        best = std::max(best, len);
    }
    return best;
}

} // namespace fsbb
