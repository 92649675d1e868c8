#include "dqrng/experiment.hpp"

#include "dqrng/errors.hpp"
#include "dqrng/seed.hpp"
#include "dqrng/transcript.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace dqrng {

const char* case_name(CaseKind kind) {
    switch (kind) {
    case CaseKind::Case1_8bit: return "case1";
    case CaseKind::Case2_Leader: return "case2";
    case CaseKind::Custom: return "custom";
    }
    return "unknown";
}

CaseKind case_from_name(const std::string& name) {
    if (name == "case1" || name == "1" || name == "Case1_8bit")
        return CaseKind::Case1_8bit;
    if (name == "case2" || name == "2" || name == "Case2_Leader")
        return CaseKind::Case2_Leader;
    if (name == "custom" || name == "Custom")
        return CaseKind::Custom;
    throw ConfigError("unknown case " + name);
}

void ExperimentConfig::validate() const {
    if (trials < 1)
        throw ConfigError("trials must be at least 1");
    round.validate();
}

// 8-bit outputs: 1024 values a round, a dozen selected bins per value.
ExperimentConfig case1_config() {
    ExperimentConfig c;
    c.case_kind = CaseKind::Case1_8bit;
    c.trials = 100;
    auto& s = c.round.session;
    s.n = 4;
    s.b_lo = 1;
    s.b_hi = 256;
    s.l = 1024;
    s.m = 50000;
    s.n_pulses = 100000;
    c.round.source.pair_rate = 0.5;
    c.round.sync_source();
    return c;
}

// Leader election among four equally weighted participants.
ExperimentConfig case2_config() {
    ExperimentConfig c;
    c.case_kind = CaseKind::Case2_Leader;
    c.trials = 10000;
    auto& s = c.round.session;
    s.n = 4;
    s.b_lo = 0;
    s.b_hi = 3;
    s.l = 1;
    s.m = 10000;
    s.weights = std::vector<double>(4, 0.25);
    s.n_pulses = 100000;
    c.round.source.pair_rate = 0.05;
    c.round.sync_source();
    return c;
}

ExperimentConfig preset(CaseKind kind) {
    switch (kind) {
    case CaseKind::Case1_8bit: return case1_config();
    case CaseKind::Case2_Leader: return case2_config();
    case CaseKind::Custom: break;
    }
    ExperimentConfig c;
    c.round.sync_source();
    return c;
}

ExperimentConfig byte_stream_config() {
    ExperimentConfig c = case1_config();
    c.case_kind = CaseKind::Custom;
    auto& s = c.round.session;
    s.b_lo = 0;
    s.b_hi = 255;
    s.bins_per_period = 256;
    s.l = 8192;
    c.round.transport = TransportKind::Direct;
    c.round.hash_transcript = false;
    c.round.sync_source();
    return c;
}

std::vector<std::uint8_t> collect_output_bytes(const ExperimentConfig& config, std::uint64_t root_seed,
                                               std::size_t bytes, std::uint64_t max_rounds) {
    config.validate();
    const auto& params = config.round.session;
    if (params.range() != 256)
        throw ConfigError("byte output needs a 256-value range");
    std::vector<std::uint8_t> out;
    out.reserve(bytes);
    for (std::uint64_t t = 0; t < max_rounds && out.size() < bytes; ++t) {
        const auto round = run_round(config.round, root_seed, t);
        if (!round.accepted())
            continue;
        for (auto v : round.transcript.output) {
            if (out.size() == bytes)
                break;
            out.push_back(static_cast<std::uint8_t>(v - params.b_lo));
        }
    }
    if (out.size() < bytes)
        throw InsufficientEntropy("collected " + std::to_string(out.size()) + " of " + std::to_string(bytes) +
                                  " bytes");
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        out.push_back(trim(item));
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] == '-')
            throw std::invalid_argument("negative");
        const auto x = std::stoull(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const auto x = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError(key + ": expected true or false");
}

std::vector<double> to_doubles(const std::string& key, std::string v) {
    if (!v.empty() && v.front() == '[' && v.back() == ']')
        v = v.substr(1, v.size() - 2);
    std::vector<double> out;
    for (const auto& item : split(v, ','))
        if (!item.empty())
            out.push_back(to_double(key, item));
    return out;
}

PumpShape parse_pump(const std::string& text) {
    const auto colon = text.find(':');
    const auto name = text.substr(0, colon);
    const auto args = colon == std::string::npos ? std::vector<double>{} : to_doubles("pump", text.substr(colon + 1));
    PumpShape shape;
    if (name == "uniform") {
        shape = pump::Uniform{};
    } else if (name == "gaussian") {
        pump::Gaussian g;
        if (args.size() > 0)
            g.mean_bin = args[0];
        if (args.size() > 1)
            g.sigma_bins = args[1];
        shape = g;
    } else if (name == "rayleigh") {
        pump::Rayleigh r;
        if (args.size() > 0)
            r.sigma_bins = args[0];
        shape = r;
    } else {
        throw ConfigError("unknown pump shape " + name);
    }
    validate_pump(shape);
    return shape;
}

} // namespace

Strategy parse_strategy(const std::string& text, ParticipantId node) {
    const auto parts = split(text, ':');
    if (parts.empty())
        throw ConfigError("empty strategy");
    const auto kind = strategy_from_name(parts[0]);
    switch (kind) {
    case StrategyKind::Honest: return Strategy::honest();
    case StrategyKind::NaiveFabricator: return Strategy::naive_fabricator();
    case StrategyKind::DigitalEmulator: return Strategy::digital_emulator();
    case StrategyKind::MitmTakeover: return Strategy::mitm(node, parts.size() > 1 && parts[1] == "alter");
    case StrategyKind::LastRevealerBias:
        if (parts.size() < 2)
            throw ConfigError("last-revealer needs a target");
        return Strategy::last_revealer(to_u64("strategy", parts[1]));
    case StrategyKind::ColludingFabricators: {
        if (parts.size() < 2)
            throw ConfigError("collude needs its member list");
        std::vector<ParticipantId> members;
        for (const auto& m : split(parts[1], ','))
            members.push_back(static_cast<ParticipantId>(to_u64("strategy", m)));
        std::optional<std::uint64_t> prediction;
        if (parts.size() > 2)
            prediction = to_u64("strategy", parts[2]);
        return Strategy::colluding(std::move(members), prediction);
    }
    }
    throw ConfigError("unknown strategy " + text);
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
    auto& s = c.round.session;
    auto& src = c.round.source;
    if (key == "case") {
        const auto kind = case_from_name(value);
        const auto keep_out = c.output_dir;
        c = preset(kind);
        c.output_dir = keep_out;
    } else if (key == "trials") {
        c.trials = to_u64(key, value);
    } else if (key == "seed") {
        c.seed = to_u64(key, value);
    } else if (key == "output_dir" || key == "out") {
        c.output_dir = value;
    } else if (key == "max_reruns") {
        c.max_reruns = to_u64(key, value);
    } else if (key == "keep_transcripts") {
        c.keep_transcripts = to_u64(key, value);
    } else if (key == "nodes" || key == "n") {
        s.n = static_cast<std::uint32_t>(to_u64(key, value));
        if (s.weights && s.weights->size() != s.n)
            s.weights.reset();
    } else if (key == "l") {
        s.l = to_u64(key, value);
    } else if (key == "b_lo") {
        s.b_lo = to_u64(key, value);
    } else if (key == "b_hi") {
        s.b_hi = to_u64(key, value);
    } else if (key == "m") {
        s.m = to_u64(key, value);
    } else if (key == "weights") {
        if (value.empty() || value == "none")
            s.weights.reset();
        else
            s.weights = to_doubles(key, value);
    } else if (key == "agg_fn" || key == "agg") {
        if (value == "sum" || value == "summod")
            s.agg_fn = Aggregation::SumMod;
        else if (value == "xor" || value == "xorfold")
            s.agg_fn = Aggregation::XorFold;
        else
            throw ConfigError("agg_fn: expected sum or xor");
    } else if (key == "car_threshold") {
        s.car_threshold = to_double(key, value);
    } else if (key == "gof_alpha") {
        s.gof_alpha = to_double(key, value);
    } else if (key == "n_pulses") {
        s.n_pulses = to_u64(key, value);
    } else if (key == "bins_per_period") {
        s.bins_per_period = static_cast<std::uint32_t>(to_u64(key, value));
    } else if (key == "pump") {
        s.pump_shape = parse_pump(value);
    } else if (key == "max_offset") {
        s.max_offset = static_cast<int>(to_u64(key, value));
    } else if (key == "window_bins") {
        s.window_bins = static_cast<int>(to_u64(key, value));
    } else if (key == "min_coincidences") {
        s.min_coincidences = to_u64(key, value);
    } else if (key == "pair_rate") {
        src.pair_rate = to_double(key, value);
    } else if (key == "period_ps") {
        src.period_ps = to_double(key, value);
    } else if (key == "jitter_ps") {
        src.jitter_sigma_ps = to_double(key, value);
    } else if (key == "loss") {
        src.loss_per_node = to_doubles(key, value);
    } else if (key == "dark_rate") {
        src.dark_rate_per_node = to_doubles(key, value);
    } else if (key == "routing") {
        if (value == "uniform")
            src.routing = Routing::Uniform;
        else if (value == "distinct")
            src.routing = Routing::DistinctNodes;
        else
            throw ConfigError("routing: expected uniform or distinct");
    } else if (key == "transport") {
        c.round.transport = transport_from_name(value);
    } else if (key == "tcp_ports") {
        c.round.tcp_ports.clear();
        for (const auto& p : split(value, ','))
            c.round.tcp_ports.push_back(static_cast<std::uint16_t>(to_u64(key, p)));
        c.round.transport = TransportKind::Tcp;
    } else if (key == "allow_full_collusion") {
        c.round.allow_full_collusion = to_bool(key, value);
    } else if (key.rfind("strategy.", 0) == 0) {
        const auto node = static_cast<ParticipantId>(to_u64(key, key.substr(9)));
        if (node >= s.n)
            throw ConfigError(key + ": node out of range");
        if (c.round.strategies.size() != s.n)
            c.round.strategies.assign(s.n, Strategy::honest());
        c.round.strategies[node] = parse_strategy(value, node);
    } else {
        throw ConfigError("unknown key " + key);
    }
    // Single scalar loss or dark rate applies to every node.
    if (src.loss_per_node.size() == 1)
        src.loss_per_node.assign(s.n, src.loss_per_node[0]);
    if (src.dark_rate_per_node.size() == 1)
        src.dark_rate_per_node.assign(s.n, src.dark_rate_per_node[0]);
    c.round.sync_source();
}

ExperimentConfig load_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string text = line;
        // '#' starts a comment unless inside quotes.
        bool quoted = false;
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '"')
                quoted = !quoted;
            else if (text[i] == '#' && !quoted) {
                text.resize(i);
                break;
            }
        }
        text = trim(text);
        if (text.empty())
            continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
            section = trim(text.substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (section == "strategies" || section == "strategy")
            key = "strategy." + key;
        try {
            apply_setting(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

int ExperimentReport::exit_code() const {
    if (verification_failures > 0)
        return 1;
    if (unresolved > 0 || accepted == 0)
        return 3;
    return 0;
}

namespace {

unsigned bit_width_of(std::uint64_t range) {
    unsigned w = 0;
    while (w < 64 && (std::uint64_t{1} << w) < range)
        ++w;
    return w;
}

bool power_of_two(std::uint64_t x) { return x >= 2 && (x & (x - 1)) == 0; }

// Frequency tables beyond this many values are not kept.
constexpr std::uint64_t kMaxTabulated = std::uint64_t{1} << 20;

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto& params = config.round.session;
    const auto pairs = params.p_num();

    ExperimentReport rep;
    rep.case_kind = config.case_kind;
    rep.trials = config.trials;
    rep.min_car.assign(pairs, std::numeric_limits<double>::infinity());
    rep.mean_car.assign(pairs, 0.0);
    std::vector<std::uint64_t> finite_cars(pairs, 0);

    std::optional<std::uint64_t> prediction;
    for (const auto& s : config.round.strategies)
        if (s.prediction) {
            prediction = s.prediction;
            break;
        }

    for (std::uint64_t t = 0; t < config.trials; ++t) {
        bool done = false;
        for (std::uint64_t attempt = 0; attempt <= config.max_reruns && !done; ++attempt) {
            const std::uint64_t trial_id =
                attempt == 0 ? t : derive_seed(config.seed, t, Stream::Retry, static_cast<std::uint32_t>(attempt));
            auto out = run_round(config.round, config.seed, trial_id);

            RoundRecord rec;
            rec.trial = t;
            rec.attempt = attempt;
            rec.status = out.status;
            rec.i_final = out.transcript.i_final.size();
            rec.min_car = std::numeric_limits<double>::infinity();
            for (const auto& v : out.transcript.verdicts)
                rec.min_car = std::min(rec.min_car, v.car);
            rec.hash = out.hash;
            rep.rounds.push_back(rec);
            if (rep.transcripts.size() < config.keep_transcripts)
                rep.transcripts.push_back(out.transcript);

            switch (out.status) {
            case RoundStatus::Accepted: {
                done = true;
                ++rep.accepted;
                const auto& verdicts = out.transcript.verdicts;
                if (rep.sample_verdicts.empty())
                    rep.sample_verdicts = verdicts;
                for (std::size_t k = 0; k < verdicts.size() && k < pairs; ++k) {
                    rep.min_car[k] = std::min(rep.min_car[k], verdicts[k].car);
                    if (std::isfinite(verdicts[k].car)) {
                        rep.mean_car[k] += verdicts[k].car;
                        ++finite_cars[k];
                    }
                }
                for (auto v : out.transcript.output)
                    rep.outputs.push_back(v - params.b_lo);
                if (prediction && !out.transcript.output.empty()) {
                    ++rep.predicted_rounds;
                    if (out.transcript.output.front() == *prediction)
                        ++rep.prediction_hits;
                }
                break;
            }
            case RoundStatus::VerificationFailed:
                // A failed gate is a result in itself, not something to retry.
                done = true;
                ++rep.verification_failures;
                break;
            case RoundStatus::EmptySelection:
            case RoundStatus::InsufficientEntropy:
                if (attempt < config.max_reruns)
                    ++rep.reruns;
                break;
            }
        }
        if (!done)
            ++rep.unresolved;
        if (progress)
            progress(t + 1, config.trials);
    }

    // Pairs with no accidentals at all (infinite CAR) are left out of the mean.
    for (std::size_t k = 0; k < pairs; ++k)
        rep.mean_car[k] = finite_cars[k] ? rep.mean_car[k] / static_cast<double>(finite_cars[k]) : 0.0;
    if (rep.accepted == 0)
        std::fill(rep.min_car.begin(), rep.min_car.end(), 0.0);

    const auto range = params.range();
    if (range <= kMaxTabulated) {
        rep.expected = params.selection_pdf();
        rep.frequencies.assign(range, 0);
        for (auto v : rep.outputs)
            ++rep.frequencies[v];
        if (!rep.outputs.empty()) {
            const double total = static_cast<double>(rep.outputs.size());
            for (std::size_t v = 0; v < range; ++v) {
                if (rep.expected[v] <= 0.0)
                    continue;
                const double dev = std::abs(rep.frequencies[v] / total - rep.expected[v]) / rep.expected[v];
                rep.max_relative_deviation = std::max(rep.max_relative_deviation, dev);
            }
            try {
                rep.uniformity = chi_square_gof(rep.frequencies, rep.expected, 0.01);
            } catch (const InvalidInput&) {
                rep.uniformity = GofReport{0.0, 0, 1.0, true};
            }
        }
        if (prediction)
            rep.prediction_baseline = *prediction >= params.b_lo && *prediction <= params.b_hi
                                          ? rep.expected[*prediction - params.b_lo]
                                          : 0.0;
    }

    if (power_of_two(range) && !params.weights)
        rep.nist = nist::run_subset(nist::bits_from_values(rep.outputs, bit_width_of(range)));

    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f)
        throw Error("cannot write " + p.string());
    f << std::setprecision(10);
    return f;
}

} // namespace

void write_artifacts(const ExperimentConfig& config, const ExperimentReport& rep) {
    if (config.output_dir.empty())
        return;
    const auto& dir = config.output_dir;
    std::filesystem::create_directories(dir / "transcripts");
    const auto& params = config.round.session;

    if (!rep.frequencies.empty()) {
        auto f = open_out(dir / "frequencies.csv");
        f << "value,count,probability,expected\n";
        const double total = rep.outputs.empty() ? 1.0 : static_cast<double>(rep.outputs.size());
        for (std::size_t v = 0; v < rep.frequencies.size(); ++v)
            f << params.b_lo + v << ',' << rep.frequencies[v] << ',' << rep.frequencies[v] / total << ','
              << rep.expected[v] << '\n';
    }
    if (params.weights) {
        auto f = open_out(dir / "winrates.csv");
        f << "participant,wins,rate,expected\n";
        const double total = rep.outputs.empty() ? 1.0 : static_cast<double>(rep.outputs.size());
        for (std::size_t v = 0; v < rep.frequencies.size(); ++v)
            f << v << ',' << rep.frequencies[v] << ',' << rep.frequencies[v] / total << ',' << rep.expected[v]
              << '\n';
    }
    {
        auto f = open_out(dir / "rounds.csv");
        f << "trial,attempt,status,i_final,min_car,hash\n";
        for (const auto& r : rep.rounds)
            f << r.trial << ',' << r.attempt << ',' << status_name(r.status) << ',' << r.i_final << ','
              << r.min_car << ',' << r.hash << '\n';
    }
    {
        auto f = open_out(dir / "nist.csv");
        f << "test,p_value,passed,skipped\n";
        for (const auto& t : rep.nist.tests) {
            if (t.skipped) {
                f << t.name << ",," << 0 << ',' << 1 << '\n';
                continue;
            }
            for (auto p : t.p_values)
                f << t.name << ',' << p << ',' << (p >= rep.nist.alpha ? 1 : 0) << ',' << 0 << '\n';
        }
    }
    for (const auto& v : rep.sample_verdicts) {
        auto f = open_out(dir / ("histogram_" + std::to_string(v.i) + "-" + std::to_string(v.j) + ".csv"));
        f << "offset,count\n";
        for (int k = -v.histogram.max_offset; k <= v.histogram.max_offset; ++k)
            f << k << ',' << v.histogram.at(k) << '\n';
    }
    for (std::size_t k = 0; k < rep.transcripts.size(); ++k) {
        std::ofstream f(dir / "transcripts" / ("round_" + std::to_string(k) + ".json"), std::ios::binary);
        if (!f)
            throw Error("cannot write transcript");
        f << canonical_json(rep.transcripts[k]);
    }
}

ExperimentReport run_and_export(const ExperimentConfig& config, const ProgressFn& progress) {
    auto rep = run_experiment(config, progress);
    write_artifacts(config, rep);
    return rep;
}

void print_summary(std::ostream& out, const ExperimentConfig& config, const ExperimentReport& rep) {
    const auto& params = config.round.session;
    out << "case " << case_name(config.case_kind) << ": " << rep.trials << " trials, " << rep.accepted
        << " accepted, " << rep.verification_failures << " rejected, " << rep.reruns << " reruns, " << rep.unresolved
        << " unresolved (" << std::fixed << std::setprecision(1) << rep.seconds << " s)\n";
    out << std::defaultfloat << std::setprecision(6);
    out << "outputs: " << rep.outputs.size() << ", chi-square p = " << rep.uniformity.p_value
        << ", max relative deviation = " << rep.max_relative_deviation << '\n';
    for (std::size_t k = 0; k < rep.min_car.size(); ++k) {
        if (!rep.sample_verdicts.empty() && k < rep.sample_verdicts.size())
            out << "pair (" << rep.sample_verdicts[k].i << "," << rep.sample_verdicts[k].j << ")";
        else
            out << "pair #" << k;
        out << " CAR min " << rep.min_car[k] << " mean " << rep.mean_car[k] << '\n';
    }
    if (params.weights && !rep.outputs.empty())
        for (std::size_t v = 0; v < rep.frequencies.size(); ++v)
            out << "participant " << v << " win rate " << rep.frequencies[v] / static_cast<double>(rep.outputs.size())
                << '\n';
    if (rep.predicted_rounds)
        out << "prediction hits " << rep.prediction_hits << " / " << rep.predicted_rounds << " (chance "
            << rep.prediction_baseline << ")\n";
    for (const auto& t : rep.nist.tests) {
        out << "nist " << t.name << ": ";
        if (t.skipped) {
            out << "skipped\n";
            continue;
        }
        for (auto p : t.p_values)
            out << p << ' ';
        out << (t.passed ? "pass" : "FAIL") << '\n';
    }
}

AdvantageReport measure_prediction_advantage(const RoundConfig& config, std::uint64_t n_rounds,
                                             std::uint64_t root_seed) {
    if (n_rounds < 1000)
        throw InvalidInput("prediction advantage needs at least 1000 rounds");
    std::optional<std::uint64_t> prediction;
    for (const auto& s : config.strategies)
        if (s.prediction) {
            prediction = s.prediction;
            break;
        }
    if (!prediction)
        throw InvalidInput("no participant declared a prediction");
    const auto& params = config.session;

    AdvantageReport rep;
    rep.rounds = n_rounds;
    if (params.range() == 1) {
        rep.uniformity = GofReport{0.0, 0, 1.0, true};
        return rep;
    }
    const auto pdf = params.selection_pdf();
    rep.baseline = *prediction >= params.b_lo && *prediction <= params.b_hi ? pdf[*prediction - params.b_lo] : 0.0;

    const bool tabulate = params.range() <= kMaxTabulated;
    std::vector<std::uint64_t> counts(tabulate ? params.range() : 0, 0);
    for (std::uint64_t t = 0; t < n_rounds; ++t) {
        const auto out = run_round(config, root_seed, t);
        if (!out.accepted())
            continue;
        ++rep.accepted;
        const auto first = out.transcript.output.front();
        if (first == *prediction)
            ++rep.hits;
        if (tabulate)
            ++counts[first - params.b_lo];
    }
    if (rep.accepted == 0)
        throw InsufficientEntropy("no round was accepted");
    const double acc = static_cast<double>(rep.accepted);
    rep.advantage = static_cast<double>(rep.hits) / acc - rep.baseline;
    rep.sigma = std::sqrt(rep.baseline * (1.0 - rep.baseline) / acc);
    rep.within_3sigma = std::abs(rep.advantage) <= 3.0 * rep.sigma;
    if (tabulate)
        rep.uniformity = chi_square_gof(counts, pdf, 0.01);
    return rep;
}

} // namespace dqrng
