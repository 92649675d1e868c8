// dqrng command line: experiment runs, NIST checks, simulator export and
// transcript audits.
#include "dqrng/errors.hpp"
#include "dqrng/experiment.hpp"
#include "dqrng/nist.hpp"
#include "dqrng/transcript.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>

namespace {

constexpr int kOk = 0;
constexpr int kVerificationFailure = 1;
constexpr int kConfigError = 2;
constexpr int kInsufficientData = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw dqrng::ConfigError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RunOptions {
    std::string config_file;
    std::string case_name;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> nodes;
    std::string pump;
    std::optional<double> car_threshold;
    std::vector<std::string> strategies;
    std::string out;
    std::vector<std::uint16_t> tcp;
    std::string transport;
    std::optional<double> dark_scale;
    bool quiet = false;
};

int run_command(const RunOptions& o) {
    dqrng::ExperimentConfig cfg;
    try {
        cfg = dqrng::preset(dqrng::CaseKind::Custom);
        if (!o.case_name.empty())
            dqrng::apply_setting(cfg, "case", o.case_name);
        if (!o.config_file.empty()) {
            std::ifstream in(o.config_file);
            if (!in)
                throw dqrng::ConfigError("cannot open " + o.config_file);
            cfg = dqrng::load_config(in, cfg);
        }
        if (o.trials)
            cfg.trials = *o.trials;
        if (o.seed)
            cfg.seed = *o.seed;
        if (o.nodes)
            dqrng::apply_setting(cfg, "nodes", std::to_string(*o.nodes));
        if (!o.pump.empty())
            dqrng::apply_setting(cfg, "pump", o.pump);
        if (o.car_threshold)
            cfg.round.session.car_threshold = *o.car_threshold;
        for (const auto& s : o.strategies) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw dqrng::ConfigError("--strategy expects <node>=<kind>");
            dqrng::apply_setting(cfg, "strategy." + s.substr(0, eq), s.substr(eq + 1));
        }
        if (!o.transport.empty())
            cfg.round.transport = dqrng::transport_from_name(o.transport);
        if (!o.tcp.empty()) {
            cfg.round.transport = dqrng::TransportKind::Tcp;
            cfg.round.tcp_ports = o.tcp;
        }
        if (o.dark_scale) {
            auto& src = cfg.round.source;
            std::vector<double> dark(cfg.round.session.n);
            for (std::uint32_t i = 0; i < dark.size(); ++i)
                dark[i] = src.dark_rate(i) * *o.dark_scale;
            src.dark_rate_per_node = dark;
        }
        if (!o.out.empty())
            cfg.output_dir = o.out;
        cfg.validate();
    } catch (const dqrng::Error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }

    dqrng::ProgressFn progress;
    if (!o.quiet && cfg.trials >= 100)
        progress = [](std::uint64_t done, std::uint64_t total) {
            if (done % (total / 10) == 0)
                std::cerr << "  " << done << "/" << total << " rounds\n";
        };
    const auto report = dqrng::run_and_export(cfg, progress);
    dqrng::print_summary(std::cout, cfg, report);
    return report.exit_code();
}

int nist_command(const std::string& path, const std::string& format) {
    const auto data = slurp(path);
    bool text = format == "bits";
    if (format == "auto") {
        text = !data.empty() && data.find_first_not_of("01 \t\r\n") == std::string::npos;
    } else if (format != "bits" && format != "bytes") {
        std::cerr << "unknown format " << format << '\n';
        return kConfigError;
    }
    const auto bits = text ? dqrng::nist::bits_from_text(data)
                           : dqrng::nist::bits_from_bytes(std::span(
                                 reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
    const auto report = dqrng::nist::run_subset(bits);
    std::cout << bits.size() << " bits\n";
    std::cout << std::left << std::setw(22) << "test" << "p-value\n";
    for (const auto& t : report.tests) {
        std::cout << std::setw(22) << t.name;
        if (t.skipped) {
            std::cout << "skipped (too short)\n";
            continue;
        }
        for (auto p : t.p_values)
            std::cout << std::setprecision(6) << p << ' ';
        std::cout << (t.passed ? "pass" : "FAIL") << '\n';
    }
    if (report.all_skipped())
        return kInsufficientData;
    return report.passed() ? kOk : kVerificationFailure;
}

int simulate_command(std::uint32_t nodes, std::uint64_t pulses, double pair_rate, std::uint64_t seed,
                     const std::string& out) {
    dqrng::SourceConfig cfg;
    cfg.n_nodes = nodes;
    cfg.n_pulses = pulses;
    cfg.pair_rate = pair_rate;
    cfg.seed = seed;
    try {
        cfg.validate();
    } catch (const dqrng::Error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }
    const auto lists = dqrng::generate_round(cfg);
    if (out.empty() || out == "-") {
        dqrng::write_records_csv(std::cout, lists);
    } else {
        std::ofstream f(out);
        if (!f) {
            std::cerr << "cannot write " << out << '\n';
            return kConfigError;
        }
        dqrng::write_records_csv(f, lists);
    }
    return kOk;
}

int verify_command(const std::string& path) {
    const auto t = dqrng::parse_transcript(slurp(path));
    const bool ok = dqrng::audit(t);
    std::cout << "hash " << dqrng::transcript_hash(t) << '\n';
    std::cout << "outputs " << t.output.size() << ", I_final " << t.i_final.size() << '\n';
    std::cout << (ok ? "audit passed" : "audit FAILED") << '\n';
    return ok ? kOk : kVerificationFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized quantum random number consensus simulator"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment (Case 1, Case 2 or custom)");
    run_cmd->add_option("--config", run.config_file, "Key = value config file");
    run_cmd->add_option("--case", run.case_name, "case1 | case2 | custom");
    run_cmd->add_option("--trials", run.trials, "Number of rounds");
    run_cmd->add_option("--seed", run.seed, "Root seed");
    run_cmd->add_option("--nodes", run.nodes, "Participant count");
    run_cmd->add_option("--pump", run.pump, "uniform | gaussian[:mean,sigma] | rayleigh[:sigma]");
    run_cmd->add_option("--car-threshold", run.car_threshold, "CAR acceptance threshold");
    run_cmd->add_option("--strategy", run.strategies, "<node>=<kind>, repeatable");
    run_cmd->add_option("--out", run.out, "Directory for CSV and transcript output");
    run_cmd->add_option("--tcp", run.tcp, "One listening port per participant")->expected(1, -1);
    run_cmd->add_option("--transport", run.transport, "direct | loopback | socketpair | tcp");
    run_cmd->add_option("--dark-scale", run.dark_scale, "Multiply every node's dark count rate");
    run_cmd->add_flag("--quiet", run.quiet, "No progress output");

    std::string nist_file;
    std::string nist_format = "auto";
    auto* nist_cmd = app.add_subcommand("nist", "Run the NIST subset on a file of bits or bytes");
    nist_cmd->add_option("file", nist_file, "Input file")->required();
    nist_cmd->add_option("--format", nist_format, "auto | bits | bytes");

    std::uint32_t sim_nodes = 4;
    std::uint64_t sim_pulses = 100000;
    double sim_rate = 0.05;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    auto* sim_cmd = app.add_subcommand("simulate", "Export one round of detection records as CSV");
    sim_cmd->add_option("--nodes", sim_nodes);
    sim_cmd->add_option("--pulses", sim_pulses);
    sim_cmd->add_option("--pair-rate", sim_rate);
    sim_cmd->add_option("--seed", sim_seed);
    sim_cmd->add_option("--out", sim_out, "Output file, '-' for stdout");

    std::string transcript_file;
    auto* verify_cmd = app.add_subcommand("verify-transcript", "Recompute a transcript from its reveals");
    verify_cmd->add_option("file", transcript_file, "Canonical transcript JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run_cmd)
            return run_command(run);
        if (*nist_cmd)
            return nist_command(nist_file, nist_format);
        if (*sim_cmd)
            return simulate_command(sim_nodes, sim_pulses, sim_rate, sim_seed, sim_out);
        if (*verify_cmd)
            return verify_command(transcript_file);
    } catch (const dqrng::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const dqrng::InsufficientEntropy& e) {
        std::cerr << e.what() << '\n';
        return kInsufficientData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kVerificationFailure;
    }
    return kOk;
}
