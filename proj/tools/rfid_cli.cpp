// rfid: command-line front end for the tag identification simulator.
//
// Exit codes: 0 success, 1 invariant violation or failed run, 2 input error.

#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "rfid/rfid.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kInputError = 2;

struct IdentifyArgs
{
    std::string population;
    std::string protocol = "p";
    bool no_prefix = false;
    std::uint64_t seed = 0;
    std::string trace;
    std::size_t frame_size = 128;
    bool dynamic = false;
};

struct ExperimentArgs
{
    std::string spec_file;
    std::string protocols = "p";
    std::size_t n = 100;
    std::size_t k = rfid::kDefaultIdLength;
    std::string dist = "uniform";
    std::size_t shared_prefix = 8;
    std::size_t reps = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    bool no_prefix = false;
    std::size_t frame_size = 128;
    bool dynamic = false;
    unsigned jobs = 1;
};

int run_identify(const IdentifyArgs& args)
{
    const auto population = rfid::load_population_file(args.population);
    const auto protocol = rfid::parse_protocol(args.protocol);
    rfid::FsaConfig fsa;
    fsa.frame_size = args.frame_size;
    fsa.mode = args.dynamic ? rfid::FsaMode::DynamicDoubling : rfid::FsaMode::Fixed;

    const bool want_trace = !args.trace.empty();
    if (want_trace && protocol != rfid::Protocol::P)
        throw rfid::ParseError("--trace is only available for protocol p");

    auto result = rfid::run_protocol(protocol, population, args.seed, !args.no_prefix, fsa,
                                     want_trace);

    std::cout << "protocol: " << result.protocol << '\n'
              << "tags: " << population.size() << '\n'
              << "queries: " << result.query_count << '\n';
    if (result.identified.empty())
        std::cout << "efficiency: undefined\n";
    else
        std::cout << "efficiency: " << rfid::format_fixed(rfid::system_efficiency(result), 6)
                  << '\n';
    const auto bits = rfid::bits_transmitted(result);
    std::cout << "reader_bits: " << bits.reader_bits << '\n'
              << "tag_bits: " << bits.tag_bits << '\n'
              << "identified: " << result.identified.size() << '\n';
    for (const auto& id : result.identified)
        std::cout << "  " << id.to_string() << '\n';

    if (want_trace && result.trace) {
        std::ofstream out(args.trace, std::ios::binary | std::ios::trunc);
        if (!out)
            throw rfid::ExportError("cannot open trace file \"" + args.trace + "\"");
        rfid::write_trace(out, *result.trace);
    }
    return kOk;
}

int run_experiment(const ExperimentArgs& args)
{
    rfid::ExperimentSpec spec;
    if (!args.spec_file.empty()) {
        std::ifstream in(args.spec_file);
        if (!in)
            throw rfid::ParseError("cannot open spec file \"" + args.spec_file + "\"");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw rfid::ParseError(std::string("spec file is not valid json: ") + e.what());
        }
        spec = rfid::experiment_spec_from_json(j);
    } else {
        spec.protocols = rfid::parse_protocol_list(args.protocols);
        spec.population.count = args.n;
        spec.population.id_length = args.k;
        spec.population.distribution = rfid::parse_distribution(args.dist);
        spec.population.shared_prefix_length = args.shared_prefix;
        spec.repetitions = args.reps;
        spec.master_seed = args.seed;
        spec.prefix_enabled = !args.no_prefix;
        spec.fsa.frame_size = args.frame_size;
        spec.fsa.mode = args.dynamic ? rfid::FsaMode::DynamicDoubling : rfid::FsaMode::Fixed;
        spec.output = rfid::parse_format(args.format);
        spec.output_path = args.out;
        spec.jobs = args.jobs;
    }

    const auto report = rfid::run_experiment(spec);
    if (spec.output_path.empty()) {
        if (spec.output == rfid::OutputFormat::CSV)
            rfid::write_csv(std::cout, report);
        else
            std::cout << rfid::to_json(report).dump(2) << '\n';
    } else {
        rfid::export_report(report, spec.output, spec.output_path);
        for (const auto& [name, a] : report.aggregates)
            std::cerr << name << ": runs=" << a.runs << " errors=" << a.errors
                      << " mean_efficiency=" << rfid::format_fixed(a.mean_efficiency, 6)
                      << " mean_queries=" << rfid::format_fixed(a.mean_queries, 2) << '\n';
    }
    return kOk;
}

int run_verify(const std::string& path)
{
    const auto population = rfid::load_population_file(path);
    if (population.empty())
        throw rfid::ParseError("verify needs at least one tag");
    const auto result = rfid::run_protocol_p(population);
    const auto stats = rfid::verify_trace(*result.trace, population.size());

    const std::set<rfid::TagId> expected(population.tags().begin(), population.tags().end());
    const std::set<rfid::TagId> got(result.identified.begin(), result.identified.end());
    const auto n = population.size();

    std::cout << "tags: " << n << '\n'
              << "queries: " << result.query_count << '\n'
              << "nodes: " << stats.nodes << " (expected " << 2 * n - 1 << ")\n"
              << "leaves: " << stats.leaves << '\n'
              << "queried_left: " << stats.queried_left_count << '\n'
              << "max_depth: " << stats.max_depth << '\n';

    bool ok = true;
    if (result.query_count != n) {
        std::cout << "FAIL: query count " << result.query_count << " != tag count " << n << '\n';
        ok = false;
    }
    if (got != expected || result.identified.size() != n) {
        std::cout << "FAIL: identified set differs from the population\n";
        ok = false;
    }
    std::cout << (ok ? "OK" : "FAILED") << '\n';
    return ok ? kOk : kViolation;
}

int run_demo_false_positive()
{
    const std::size_t k = 6;
    const auto population = rfid::Population::from(
        {rfid::make_tag_id("011001"), rfid::make_tag_id("001010"), rfid::make_tag_id("100100")}, k);

    std::vector<rfid::SignalForm> signals;
    for (const auto& t : population.tags())
        signals.push_back(rfid::encode_signal(t, false));
    const auto answer = rfid::superpose(signals);
    const auto phantom = rfid::decode_if_singleton(answer, false);

    std::cout << "tags (prefix off):";
    for (const auto& t : population.tags())
        std::cout << ' ' << t.to_string();
    std::cout << "\nreceived: " << answer.to_string() << '\n';
    if (!phantom) {
        std::cout << "no singleton decode\n";
        return kViolation;
    }
    std::cout << "decoded: " << phantom->to_string()
              << (population.contains(*phantom) ? " (in population)\n" : " (phantom: not in population)\n");

    const auto fixed = rfid::run_protocol_p(population, {true, false});
    std::cout << "with prefix: " << fixed.identified.size() << " identified in "
              << fixed.query_count << " queries:";
    for (const auto& t : fixed.identified)
        std::cout << ' ' << t.to_string();
    std::cout << '\n';
    return population.contains(*phantom) ? kViolation : kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"RFID tag identification simulator"};
    app.require_subcommand(1);

    IdentifyArgs id_args;
    auto* identify = app.add_subcommand("identify", "Identify the tags of a population file");
    identify->add_option("--population", id_args.population, "Population file")->required();
    identify->add_option("--protocol", id_args.protocol, "p, qt, fsa or bs");
    identify->add_flag("--no-prefix", id_args.no_prefix, "Disable the leading +1 symbol (protocol p)");
    identify->add_option("--seed", id_args.seed, "Seed for fsa/bs");
    identify->add_option("--trace", id_args.trace, "Write the protocol p trace to this file");
    identify->add_option("--frame-size", id_args.frame_size, "FSA frame size");
    identify->add_flag("--dynamic", id_args.dynamic, "FSA frame doubling");

    ExperimentArgs ex_args;
    auto* experiment = app.add_subcommand("experiment", "Seeded batch of runs to CSV or JSON");
    experiment->add_option("--spec", ex_args.spec_file, "JSON experiment spec (overrides flags)");
    experiment->add_option("--protocols", ex_args.protocols, "Comma list, e.g. p,qt,fsa,bs");
    experiment->add_option("--n", ex_args.n, "Tags per population");
    experiment->add_option("--k", ex_args.k, "ID length in bits");
    experiment->add_option("--dist", ex_args.dist, "uniform, sequential or clustered");
    experiment->add_option("--shared-prefix", ex_args.shared_prefix, "Clustered prefix length");
    experiment->add_option("--reps", ex_args.reps, "Repetitions");
    experiment->add_option("--seed", ex_args.seed, "Master seed");
    experiment->add_option("--out", ex_args.out, "Output file (stdout if omitted)");
    experiment->add_option("--format", ex_args.format, "csv or json");
    experiment->add_flag("--no-prefix", ex_args.no_prefix, "Disable the prefix symbol for p");
    experiment->add_option("--frame-size", ex_args.frame_size, "FSA frame size");
    experiment->add_flag("--dynamic", ex_args.dynamic, "FSA frame doubling");
    experiment->add_option("--jobs", ex_args.jobs, "Worker threads");

    std::string verify_population;
    auto* verify = app.add_subcommand("verify", "Check the N-queries / 2N-1-node guarantees");
    verify->add_option("--population", verify_population, "Population file")->required();

    auto* demo = app.add_subcommand("demo-false-positive", "Phantom ID without the prefix symbol");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*identify)
            return run_identify(id_args);
        if (*experiment)
            return run_experiment(ex_args);
        if (*verify)
            return run_verify(verify_population);
        if (*demo)
            return run_demo_false_positive();
    } catch (const rfid::AssumptionViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kViolation;
    } catch (const rfid::StructuralError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kViolation;
    } catch (const rfid::StarvationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kViolation;
    } catch (const rfid::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}
