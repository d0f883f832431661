#ifndef RFID_HARNESS_HPP
#define RFID_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfid/baselines.hpp"
#include "rfid/core.hpp"
#include "rfid/protocol_p.hpp"

namespace rfid {

/**
 * @brief Tags identified per query issued (or slot consumed).
 *
 * Undefined, and reported as UndefinedMetricError, when nothing was
 * identified.
 */
inline double system_efficiency(const RunResult& result)
{
    if (result.identified.empty() || result.query_count == 0)
        throw UndefinedMetricError("efficiency is undefined for a run that identified no tags");
    return static_cast<double>(result.identified.size()) / static_cast<double>(result.query_count);
}

inline BitAccounting bits_transmitted(const RunResult& result)
{
    return result.bits;
}

enum class Protocol
{
    P,
    QT,
    FSA,
    BS,
};

inline std::string to_string(Protocol p)
{
    switch (p) {
    case Protocol::P: return "P";
    case Protocol::QT: return "QT";
    case Protocol::FSA: return "FSA";
    case Protocol::BS: return "BS";
    }
    return "?";
}

inline Protocol parse_protocol(std::string_view s)
{
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "p")
        return Protocol::P;
    if (lower == "qt")
        return Protocol::QT;
    if (lower == "fsa")
        return Protocol::FSA;
    if (lower == "bs")
        return Protocol::BS;
    throw ParseError("unknown protocol \"" + std::string(s) + "\" (expected p, qt, fsa or bs)");
}

inline std::vector<Protocol> parse_protocol_list(std::string_view csv)
{
    std::vector<Protocol> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        auto comma = csv.find(',', start);
        auto item = csv.substr(start, comma == std::string_view::npos ? csv.npos : comma - start);
        if (!item.empty())
            out.push_back(parse_protocol(item));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    if (out.empty())
        throw ParseError("no protocols given");
    return out;
}

enum class OutputFormat
{
    CSV,
    JSON,
};

inline OutputFormat parse_format(std::string_view s)
{
    if (s == "csv")
        return OutputFormat::CSV;
    if (s == "json")
        return OutputFormat::JSON;
    throw ParseError("unknown output format \"" + std::string(s) + "\"");
}

struct ExperimentSpec
{
    std::vector<Protocol> protocols{Protocol::P};
    PopulationSpec population; // its seed is replaced per repetition
    std::size_t repetitions = 1;
    bool prefix_enabled = true;
    FsaConfig fsa;
    OutputFormat output = OutputFormat::CSV;
    std::string output_path;
    std::uint64_t master_seed = 0;
    unsigned jobs = 1;
};

/**
 * @brief Seed of repetition @p index: the (index+1)-th output of a SplitMix64
 * stream started at @p master_seed.
 */
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index)
{
    std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

struct ReportRow
{
    std::string protocol;
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::uint64_t queries = 0;
    std::optional<double> efficiency; // empty when undefined or errored
    std::size_t identified = 0;
    double elapsed_ms = 0.0;
    std::string error; // empty on success

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ProtocolAggregate
{
    std::size_t runs = 0;   // rows with a defined efficiency
    std::size_t errors = 0; // rows carrying an error marker
    double mean_efficiency = 0.0;
    double min_efficiency = 0.0;
    double max_efficiency = 0.0;
    double mean_queries = 0.0;

    friend bool operator==(const ProtocolAggregate&, const ProtocolAggregate&) = default;
};

struct ExperimentReport
{
    std::vector<ReportRow> rows;
    std::map<std::string, ProtocolAggregate> aggregates;

    friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

inline std::map<std::string, ProtocolAggregate> aggregate_rows(const std::vector<ReportRow>& rows)
{
    std::map<std::string, ProtocolAggregate> out;
    std::map<std::string, std::size_t> query_rows;
    for (const auto& r : rows) {
        auto& a = out[r.protocol];
        if (!r.error.empty()) {
            ++a.errors;
            continue;
        }
        a.mean_queries += static_cast<double>(r.queries);
        ++query_rows[r.protocol];
        if (!r.efficiency)
            continue;
        const double e = *r.efficiency;
        if (a.runs == 0) {
            a.min_efficiency = a.max_efficiency = e;
        } else {
            a.min_efficiency = std::min(a.min_efficiency, e);
            a.max_efficiency = std::max(a.max_efficiency, e);
        }
        a.mean_efficiency += e;
        ++a.runs;
    }
    for (auto& [name, a] : out) {
        if (a.runs > 0)
            a.mean_efficiency /= static_cast<double>(a.runs);
        if (auto q = query_rows[name]; q > 0)
            a.mean_queries /= static_cast<double>(q);
    }
    return out;
}

/**
 * @brief Run a single protocol on a population. Baseline randomness is
 * seeded with @p seed.
 */
inline RunResult run_protocol(Protocol protocol, const Population& population, std::uint64_t seed,
                              bool prefix_enabled, const FsaConfig& fsa, bool retain_trace = false)
{
    switch (protocol) {
    case Protocol::P: return run_protocol_p(population, {prefix_enabled, retain_trace});
    case Protocol::QT: return run_query_tree(population);
    case Protocol::FSA: {
        auto cfg = fsa;
        cfg.seed = seed;
        return run_framed_slotted_aloha(population, cfg);
    }
    case Protocol::BS: return run_binary_splitting(population, seed);
    }
    throw ContractViolation("unknown protocol");
}

namespace detail {

inline std::vector<ReportRow> run_repetition(const ExperimentSpec& spec, std::size_t index)
{
    const auto seed = derive_seed(spec.master_seed, index);
    auto pop_spec = spec.population;
    pop_spec.seed = seed;
    const auto population = generate_population(pop_spec);

    std::vector<ReportRow> rows;
    for (auto protocol : spec.protocols) {
        ReportRow row;
        row.protocol = to_string(protocol);
        row.n = population.size();
        row.k = population.id_length();
        row.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        try {
            auto result = run_protocol(protocol, population, seed, spec.prefix_enabled, spec.fsa);
            row.queries = result.query_count;
            row.identified = result.identified.size();
            if (!result.identified.empty())
                row.efficiency = system_efficiency(result);
        } catch (const StarvationError& e) {
            row.queries = e.partial().query_count;
            row.identified = e.partial().identified.size();
            row.error = e.what();
        } catch (const Error& e) {
            row.error = e.what();
        }
        row.elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

/**
 * @brief Run every selected protocol on a fresh population per repetition.
 *
 * All protocols of one repetition share its population. Repetitions may run
 * on `spec.jobs` threads; rows always come out in repetition order.
 */
inline ExperimentReport run_experiment(const ExperimentSpec& spec)
{
    if (spec.repetitions < 1)
        throw ContractViolation("experiment needs at least one repetition");
    if (spec.protocols.empty())
        throw ContractViolation("experiment needs at least one protocol");

    std::vector<std::vector<ReportRow>> per_rep(spec.repetitions);
    const unsigned jobs =
        std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(spec.repetitions)));
    if (jobs == 1) {
        for (std::size_t i = 0; i < spec.repetitions; ++i)
            per_rep[i] = detail::run_repetition(spec, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> failures(jobs);
        {
            std::vector<std::jthread> workers;
            for (unsigned w = 0; w < jobs; ++w)
                workers.emplace_back([&, w] {
                    try {
                        for (auto i = next++; i < spec.repetitions; i = next++)
                            per_rep[i] = detail::run_repetition(spec, i);
                    } catch (...) {
                        failures[w] = std::current_exception();
                    }
                });
        }
        for (auto& f : failures)
            if (f)
                std::rethrow_exception(f);
    }

    ExperimentReport report;
    for (auto& rows : per_rep)
        for (auto& r : rows)
            report.rows.push_back(std::move(r));
    report.aggregates = aggregate_rows(report.rows);
    return report;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr const char* kCsvHeader = "protocol,N,K,seed,queries,efficiency,identified,elapsed_ms";

inline std::string format_fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

/// Undefined or errored efficiencies are written as "NA".
inline void write_csv(std::ostream& out, const ExperimentReport& report)
{
    out << kCsvHeader << '\n';
    for (const auto& r : report.rows) {
        out << r.protocol << ',' << r.n << ',' << r.k << ',' << r.seed << ',' << r.queries << ','
            << (r.efficiency ? format_fixed(*r.efficiency, 6) : std::string("NA")) << ','
            << r.identified << ',' << format_fixed(r.elapsed_ms, 3) << '\n';
    }
}

inline nlohmann::json to_json(const ExperimentReport& report)
{
    using nlohmann::json;
    json rows = json::array();
    for (const auto& r : report.rows) {
        json j = {{"protocol", r.protocol}, {"N", r.n},         {"K", r.k},
                  {"seed", r.seed},         {"queries", r.queries},
                  {"identified", r.identified}, {"elapsed_ms", r.elapsed_ms}};
        j["efficiency"] = r.efficiency ? json(*r.efficiency) : json(nullptr);
        if (!r.error.empty())
            j["error"] = r.error;
        rows.push_back(std::move(j));
    }
    json aggs = json::object();
    for (const auto& [name, a] : report.aggregates)
        aggs[name] = {{"runs", a.runs},
                      {"errors", a.errors},
                      {"mean_efficiency", a.mean_efficiency},
                      {"min_efficiency", a.min_efficiency},
                      {"max_efficiency", a.max_efficiency},
                      {"mean_queries", a.mean_queries}};
    return {{"rows", std::move(rows)}, {"aggregates", std::move(aggs)}};
}

inline ExperimentReport report_from_json(const nlohmann::json& j)
{
    ExperimentReport report;
    try {
        for (const auto& r : j.at("rows")) {
            ReportRow row;
            row.protocol = r.at("protocol").get<std::string>();
            row.n = r.at("N").get<std::size_t>();
            row.k = r.at("K").get<std::size_t>();
            row.seed = r.at("seed").get<std::uint64_t>();
            row.queries = r.at("queries").get<std::uint64_t>();
            if (!r.at("efficiency").is_null())
                row.efficiency = r.at("efficiency").get<double>();
            row.identified = r.at("identified").get<std::size_t>();
            row.elapsed_ms = r.at("elapsed_ms").get<double>();
            row.error = r.value("error", std::string{});
            report.rows.push_back(std::move(row));
        }
        for (const auto& [name, a] : j.at("aggregates").items())
            report.aggregates[name] = {a.at("runs").get<std::size_t>(),
                                       a.at("errors").get<std::size_t>(),
                                       a.at("mean_efficiency").get<double>(),
                                       a.at("min_efficiency").get<double>(),
                                       a.at("max_efficiency").get<double>(),
                                       a.at("mean_queries").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed report json: ") + e.what());
    }
    return report;
}

inline void export_report(const ExperimentReport& report, OutputFormat format,
                          const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ExportError("cannot open \"" + path + "\" for writing");
    if (format == OutputFormat::CSV)
        write_csv(out, report);
    else
        out << to_json(report).dump(2) << '\n';
    out.flush();
    if (!out)
        throw ExportError("write to \"" + path + "\" failed");
}

/**
 * @brief Parse an experiment spec document.
 *
 * Recognised keys (all optional): protocols (array or "p,qt"), n, k,
 * distribution, shared_prefix_length, repetitions, prefix, seed, jobs,
 * format, out, fsa {frame_size, mode: "fixed"|"dynamic", max_cycles,
 * max_frame_size}.
 */
inline ExperimentSpec experiment_spec_from_json(const nlohmann::json& j)
{
    ExperimentSpec spec;
    try {
        if (j.contains("protocols")) {
            const auto& p = j.at("protocols");
            if (p.is_string()) {
                spec.protocols = parse_protocol_list(p.get<std::string>());
            } else {
                spec.protocols.clear();
                for (const auto& item : p)
                    spec.protocols.push_back(parse_protocol(item.get<std::string>()));
            }
        }
        spec.population.count = j.value("n", spec.population.count);
        spec.population.id_length = j.value("k", spec.population.id_length);
        if (j.contains("distribution"))
            spec.population.distribution = parse_distribution(j.at("distribution").get<std::string>());
        spec.population.shared_prefix_length =
            j.value("shared_prefix_length", spec.population.shared_prefix_length);
        spec.repetitions = j.value("repetitions", spec.repetitions);
        spec.prefix_enabled = j.value("prefix", spec.prefix_enabled);
        spec.master_seed = j.value("seed", spec.master_seed);
        spec.jobs = j.value("jobs", spec.jobs);
        if (j.contains("format"))
            spec.output = parse_format(j.at("format").get<std::string>());
        spec.output_path = j.value("out", spec.output_path);
        if (j.contains("fsa")) {
            const auto& f = j.at("fsa");
            spec.fsa.frame_size = f.value("frame_size", spec.fsa.frame_size);
            spec.fsa.max_cycles = f.value("max_cycles", spec.fsa.max_cycles);
            spec.fsa.max_frame_size = f.value("max_frame_size", spec.fsa.max_frame_size);
            auto mode = f.value("mode", std::string("fixed"));
            if (mode == "fixed")
                spec.fsa.mode = FsaMode::Fixed;
            else if (mode == "dynamic" || mode == "dynamic-doubling")
                spec.fsa.mode = FsaMode::DynamicDoubling;
            else
                throw ParseError("unknown fsa mode \"" + mode + "\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed experiment spec: ") + e.what());
    }
    if (spec.repetitions < 1)
        throw ParseError("repetitions must be at least 1");
    return spec;
}

} // namespace rfid

#endif // RFID_HARNESS_HPP
