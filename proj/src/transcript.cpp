#include "dqrng/transcript.hpp"

#include "dqrng/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <memory>

namespace dqrng {

namespace {

constexpr std::uint64_t kMaxExactInteger = std::uint64_t{1} << 53;

Json double_json(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

double double_from_json(const Json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        throw ParseError("expected a number, got \"" + s + "\"");
    }
    if (!j.is_number())
        throw ParseError("expected a number");
    return j.get<double>();
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object())
        throw ParseError(std::string("expected an object holding ") + key);
    const auto it = j.find(key);
    if (it == j.end())
        throw ParseError(std::string("missing field ") + key);
    return *it;
}

template <class T>
Json u64_array(const std::vector<T>& values) {
    Json arr = Json::array();
    for (auto v : values)
        arr.push_back(u64_json(v));
    return arr;
}

template <class T>
std::vector<T> u64_vector(const Json& j) {
    if (!j.is_array())
        throw ParseError("expected an array");
    std::vector<T> out;
    out.reserve(j.size());
    for (const auto& v : j)
        out.push_back(static_cast<T>(u64_from_json(v)));
    return out;
}

Json delta_json(const std::vector<std::uint64_t>& indices) {
    Json gaps = Json::array();
    for (std::size_t k = 1; k < indices.size(); ++k)
        gaps.push_back(u64_json(indices[k] - indices[k - 1]));
    Json out;
    out["count"] = indices.size();
    out["first"] = u64_json(indices.empty() ? 0 : indices.front());
    out["gaps"] = std::move(gaps);
    return out;
}

std::vector<std::uint64_t> delta_from_json(const Json& j) {
    const auto count = u64_from_json(field(j, "count"));
    const auto gaps = u64_vector<std::uint64_t>(field(j, "gaps"));
    std::vector<std::uint64_t> out;
    if (count == 0) {
        if (!gaps.empty())
            throw ParseError("gaps present for an empty list");
        return out;
    }
    if (gaps.size() + 1 != count)
        throw ParseError("gap count does not match record count");
    out.reserve(count);
    out.push_back(u64_from_json(field(j, "first")));
    for (auto g : gaps)
        out.push_back(out.back() + g);
    return out;
}

const char* agg_name(Aggregation a) { return a == Aggregation::SumMod ? "sum_mod" : "xor_fold"; }

Aggregation agg_from_name(const std::string& s) {
    if (s == "sum_mod")
        return Aggregation::SumMod;
    if (s == "xor_fold")
        return Aggregation::XorFold;
    throw ParseError("unknown aggregation " + s);
}

Phase phase_from_name(const std::string& s) {
    for (Phase p : {Phase::RevealClassical, Phase::QuantumMeasure, Phase::QuantumReveal, Phase::Verify, Phase::Output,
                    Phase::Aborted})
        if (s == phase_name(p))
            return p;
    throw ParseError("unknown phase " + s);
}

} // namespace

Json u64_json(std::uint64_t v) {
    if (v >= kMaxExactInteger)
        return std::to_string(v);
    return v;
}

std::uint64_t u64_from_json(const Json& j) {
    if (j.is_number_unsigned())
        return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        const auto v = j.get<std::int64_t>();
        if (v < 0)
            throw ParseError("negative value where an unsigned one is required");
        return static_cast<std::uint64_t>(v);
    }
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("malformed integer string");
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw ParseError("integer string out of range");
        }
    }
    throw ParseError("expected an unsigned integer");
}

Json to_json(const PumpShape& shape) {
    Json j;
    j["kind"] = pump_name(shape);
    if (const auto* g = std::get_if<pump::Gaussian>(&shape)) {
        j["mean_bin"] = g->mean_bin;
        j["sigma_bins"] = g->sigma_bins;
    } else if (const auto* r = std::get_if<pump::Rayleigh>(&shape)) {
        j["sigma_bins"] = r->sigma_bins;
    }
    return j;
}

PumpShape pump_from_json(const Json& j) {
    const auto kind = field(j, "kind").get<std::string>();
    if (kind == "uniform")
        return pump::Uniform{};
    if (kind == "gaussian")
        return pump::Gaussian{double_from_json(field(j, "mean_bin")), double_from_json(field(j, "sigma_bins"))};
    if (kind == "rayleigh")
        return pump::Rayleigh{double_from_json(field(j, "sigma_bins"))};
    throw ParseError("unknown pump shape " + kind);
}

Json to_json(const SessionParams& p) {
    Json j;
    j["n"] = p.n;
    j["l"] = u64_json(p.l);
    j["b_lo"] = u64_json(p.b_lo);
    j["b_hi"] = u64_json(p.b_hi);
    j["m"] = u64_json(p.m);
    if (p.weights) {
        Json w = Json::array();
        for (double x : *p.weights)
            w.push_back(x);
        j["weights"] = std::move(w);
    } else {
        j["weights"] = nullptr;
    }
    j["agg_fn"] = agg_name(p.agg_fn);
    j["car_threshold"] = p.car_threshold;
    j["gof_alpha"] = p.gof_alpha;
    j["n_pulses"] = u64_json(p.n_pulses);
    j["bins_per_period"] = p.bins_per_period;
    j["pump"] = to_json(p.pump_shape);
    j["max_offset"] = p.max_offset;
    j["window_bins"] = p.window_bins;
    j["min_coincidences"] = u64_json(p.min_coincidences);
    return j;
}

SessionParams params_from_json(const Json& j) {
    try {
        SessionParams p;
        p.n = static_cast<std::uint32_t>(u64_from_json(field(j, "n")));
        p.l = u64_from_json(field(j, "l"));
        p.b_lo = u64_from_json(field(j, "b_lo"));
        p.b_hi = u64_from_json(field(j, "b_hi"));
        p.m = u64_from_json(field(j, "m"));
        const auto& w = field(j, "weights");
        if (!w.is_null()) {
            std::vector<double> weights;
            for (const auto& x : w)
                weights.push_back(double_from_json(x));
            p.weights = std::move(weights);
        }
        p.agg_fn = agg_from_name(field(j, "agg_fn").get<std::string>());
        p.car_threshold = double_from_json(field(j, "car_threshold"));
        p.gof_alpha = double_from_json(field(j, "gof_alpha"));
        p.n_pulses = u64_from_json(field(j, "n_pulses"));
        p.bins_per_period = static_cast<std::uint32_t>(u64_from_json(field(j, "bins_per_period")));
        p.pump_shape = pump_from_json(field(j, "pump"));
        p.max_offset = field(j, "max_offset").get<int>();
        p.window_bins = field(j, "window_bins").get<int>();
        p.min_coincidences = u64_from_json(field(j, "min_coincidences"));
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad session params: ") + e.what());
    }
}

Json to_json(const ClassicalReveal& r) {
    Json j;
    j["participant"] = r.participant;
    j["values"] = u64_array(r.values);
    j["weight"] = r.weight ? Json(*r.weight) : Json(nullptr);
    return j;
}

ClassicalReveal classical_from_json(const Json& j) {
    ClassicalReveal r;
    r.participant = static_cast<ParticipantId>(u64_from_json(field(j, "participant")));
    r.values = u64_vector<std::uint64_t>(field(j, "values"));
    const auto& w = field(j, "weight");
    if (!w.is_null())
        r.weight = double_from_json(w);
    return r;
}

Json to_json(const QuantumReveal& r) {
    std::vector<std::uint64_t> indices;
    std::vector<std::uint32_t> bins;
    indices.reserve(r.records.size());
    bins.reserve(r.records.size());
    for (const auto& rec : r.records) {
        indices.push_back(rec.index);
        bins.push_back(rec.bin);
    }
    auto delta = delta_json(indices);
    Json j;
    j["participant"] = r.participant;
    j["count"] = std::move(delta["count"]);
    j["first"] = std::move(delta["first"]);
    j["gaps"] = std::move(delta["gaps"]);
    j["bins"] = u64_array(bins);
    return j;
}

QuantumReveal quantum_from_json(const Json& j) {
    QuantumReveal r;
    r.participant = static_cast<ParticipantId>(u64_from_json(field(j, "participant")));
    const auto indices = delta_from_json(j);
    const auto bins = u64_vector<std::uint32_t>(field(j, "bins"));
    if (bins.size() != indices.size())
        throw ParseError("bins and indices differ in length");
    r.records.reserve(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k)
        r.records.push_back({r.participant, indices[k], bins[k]});
    return r;
}

Json to_json(const PairVerdict& v) {
    Json j;
    j["i"] = v.i;
    j["j"] = v.j;
    j["coincidences"] = u64_json(v.coincidences);
    j["window_coincidences"] = u64_json(v.window_coincidences);
    j["accidentals"] = double_json(v.accidentals);
    j["car"] = double_json(v.car);
    j["discord"] = u64_json(v.discord);
    j["car_passed"] = v.car_passed;
    if (v.gof) {
        Json g;
        g["statistic"] = v.gof->statistic;
        g["dof"] = v.gof->dof;
        g["p_value"] = v.gof->p_value;
        g["passed"] = v.gof->passed;
        j["gof"] = std::move(g);
    } else {
        j["gof"] = nullptr;
    }
    j["passed"] = v.passed;
    j["max_offset"] = v.histogram.max_offset;
    j["histogram"] = u64_array(v.histogram.counts);
    return j;
}

PairVerdict verdict_from_json(const Json& j) {
    PairVerdict v;
    v.i = static_cast<ParticipantId>(u64_from_json(field(j, "i")));
    v.j = static_cast<ParticipantId>(u64_from_json(field(j, "j")));
    v.coincidences = u64_from_json(field(j, "coincidences"));
    v.window_coincidences = u64_from_json(field(j, "window_coincidences"));
    v.accidentals = double_from_json(field(j, "accidentals"));
    v.car = double_from_json(field(j, "car"));
    v.discord = u64_from_json(field(j, "discord"));
    v.car_passed = field(j, "car_passed").get<bool>();
    const auto& g = field(j, "gof");
    if (!g.is_null()) {
        GofReport r;
        r.statistic = double_from_json(field(g, "statistic"));
        r.dof = static_cast<std::uint32_t>(u64_from_json(field(g, "dof")));
        r.p_value = double_from_json(field(g, "p_value"));
        r.passed = field(g, "passed").get<bool>();
        v.gof = r;
    }
    v.passed = field(j, "passed").get<bool>();
    v.histogram.max_offset = field(j, "max_offset").get<int>();
    v.histogram.counts = u64_vector<std::uint64_t>(field(j, "histogram"));
    return v;
}

Json to_json(const RoundTranscript& t) {
    Json j;
    j["params"] = to_json(t.params);

    Json classical;
    Json reveals = Json::array();
    for (const auto& r : t.classical)
        reveals.push_back(to_json(r));
    classical["reveals"] = std::move(reveals);
    classical["combined"] = u64_array(t.combined_classical);
    j["classical"] = std::move(classical);

    Json quantum = Json::array();
    for (const auto& r : t.quantum)
        quantum.push_back(to_json(r));
    j["quantum"] = std::move(quantum);

    Json verdicts = Json::array();
    for (const auto& v : t.verdicts)
        verdicts.push_back(to_json(v));
    j["verdicts"] = std::move(verdicts);

    Json merged = delta_json(t.merged.indices);
    merged["bins"] = u64_array(t.merged.bins);
    merged["conflicts"] = u64_json(t.merge_conflicts);
    j["merged"] = std::move(merged);

    j["i_final"] = u64_array(t.i_final);
    j["r_qc"] = u64_array(t.r_qc);
    j["output"] = u64_array(t.output);

    Json log = Json::array();
    for (const auto& step : t.phase_log) {
        Json s;
        s["from"] = phase_name(step.from);
        s["to"] = phase_name(step.to);
        s["reason"] = step.reason;
        log.push_back(std::move(s));
    }
    j["phase_log"] = std::move(log);
    return j;
}

RoundTranscript transcript_from_json(const Json& j) {
    try {
        RoundTranscript t;
        t.params = params_from_json(field(j, "params"));
        const auto& classical = field(j, "classical");
        for (const auto& r : field(classical, "reveals"))
            t.classical.push_back(classical_from_json(r));
        t.combined_classical = u64_vector<std::uint64_t>(field(classical, "combined"));
        for (const auto& r : field(j, "quantum"))
            t.quantum.push_back(quantum_from_json(r));
        for (const auto& v : field(j, "verdicts"))
            t.verdicts.push_back(verdict_from_json(v));
        const auto& merged = field(j, "merged");
        t.merged.indices = delta_from_json(merged);
        t.merged.bins = u64_vector<std::uint32_t>(field(merged, "bins"));
        t.merge_conflicts = u64_from_json(field(merged, "conflicts"));
        t.i_final = u64_vector<std::uint64_t>(field(j, "i_final"));
        t.r_qc = u64_vector<std::uint32_t>(field(j, "r_qc"));
        t.output = u64_vector<std::uint64_t>(field(j, "output"));
        for (const auto& s : field(j, "phase_log"))
            t.phase_log.push_back({phase_from_name(field(s, "from").get<std::string>()),
                                   phase_from_name(field(s, "to").get<std::string>()),
                                   field(s, "reason").get<std::string>()});
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad transcript: ") + e.what());
    }
}

namespace {

// Text writer producing the same bytes as to_json(...).dump(). Bulk arrays
// are appended directly; small objects still go through Json.
class Writer {
public:
    std::string out;

    void raw(std::string_view s) { out += s; }
    void key(std::string_view k) {
        out += '"';
        out += k;
        out += "\":";
    }
    void u64(std::uint64_t v) {
        if (v >= kMaxExactInteger)
            out += '"';
        char buf[24];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.append(buf, res.ptr);
        if (v >= kMaxExactInteger)
            out += '"';
    }
    template <class Range>
    void u64s(const Range& values) {
        out += '[';
        bool first = true;
        for (auto v : values) {
            if (!first)
                out += ',';
            first = false;
            u64(v);
        }
        out += ']';
    }
    void gaps(const std::vector<std::uint64_t>& indices) {
        out += '[';
        for (std::size_t k = 1; k < indices.size(); ++k) {
            if (k > 1)
                out += ',';
            u64(indices[k] - indices[k - 1]);
        }
        out += ']';
    }
    void json(const Json& j) { out += j.dump(); }
};

void write_classical(Writer& w, const ClassicalReveal& r) {
    w.raw("{");
    w.key("participant");
    w.u64(r.participant);
    w.raw(",");
    w.key("values");
    w.u64s(r.values);
    w.raw(",");
    w.key("weight");
    w.json(r.weight ? Json(*r.weight) : Json(nullptr));
    w.raw("}");
}

void write_delta(Writer& w, const std::vector<std::uint64_t>& indices) {
    w.key("count");
    w.u64(indices.size());
    w.raw(",");
    w.key("first");
    w.u64(indices.empty() ? 0 : indices.front());
    w.raw(",");
    w.key("gaps");
    w.gaps(indices);
}

void write_quantum(Writer& w, const QuantumReveal& r) {
    std::vector<std::uint64_t> indices;
    indices.reserve(r.records.size());
    for (const auto& rec : r.records)
        indices.push_back(rec.index);
    w.raw("{");
    w.key("participant");
    w.u64(r.participant);
    w.raw(",");
    write_delta(w, indices);
    w.raw(",");
    w.key("bins");
    w.out += '[';
    for (std::size_t k = 0; k < r.records.size(); ++k) {
        if (k)
            w.out += ',';
        w.u64(r.records[k].bin);
    }
    w.out += ']';
    w.raw("}");
}

template <class T, class Fn>
void write_list(Writer& w, const std::vector<T>& items, Fn fn) {
    w.raw("[");
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (k)
            w.raw(",");
        fn(w, items[k]);
    }
    w.raw("]");
}

} // namespace

std::string canonical_json(const ClassicalReveal& reveal) {
    Writer w;
    write_classical(w, reveal);
    return std::move(w.out);
}

std::string canonical_json(const QuantumReveal& reveal) {
    Writer w;
    write_quantum(w, reveal);
    return std::move(w.out);
}

std::string canonical_json(const RoundTranscript& t) {
    Writer w;
    std::size_t guess = 256 + t.combined_classical.size() * 7 + t.i_final.size() * 10 + t.merged.indices.size() * 8;
    for (const auto& r : t.classical)
        guess += r.values.size() * 7;
    for (const auto& q : t.quantum)
        guess += q.records.size() * 8;
    w.out.reserve(guess);

    w.raw("{");
    w.key("params");
    w.json(to_json(t.params));
    w.raw(",");
    w.key("classical");
    w.raw("{");
    w.key("reveals");
    write_list(w, t.classical, write_classical);
    w.raw(",");
    w.key("combined");
    w.u64s(t.combined_classical);
    w.raw("},");
    w.key("quantum");
    write_list(w, t.quantum, write_quantum);
    w.raw(",");
    w.key("verdicts");
    write_list(w, t.verdicts, [](Writer& w2, const PairVerdict& v) { w2.json(to_json(v)); });
    w.raw(",");
    w.key("merged");
    w.raw("{");
    write_delta(w, t.merged.indices);
    w.raw(",");
    w.key("bins");
    w.u64s(t.merged.bins);
    w.raw(",");
    w.key("conflicts");
    w.u64(t.merge_conflicts);
    w.raw("},");
    w.key("i_final");
    w.u64s(t.i_final);
    w.raw(",");
    w.key("r_qc");
    w.u64s(t.r_qc);
    w.raw(",");
    w.key("output");
    w.u64s(t.output);
    w.raw(",");
    w.key("phase_log");
    write_list(w, t.phase_log, [](Writer& w2, const PhaseTransition& step) {
        Json s;
        s["from"] = phase_name(step.from);
        s["to"] = phase_name(step.to);
        s["reason"] = step.reason;
        w2.json(s);
    });
    w.raw("}");
    return std::move(w.out);
}

RoundTranscript parse_transcript(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("transcript is not JSON: ") + e.what());
    }
    return transcript_from_json(j);
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int k = 0; k < len; ++k) {
        out.push_back(hex[digest[k] >> 4]);
        out.push_back(hex[digest[k] & 0xF]);
    }
    return out;
}

std::string transcript_hash(const RoundTranscript& transcript) { return sha256_hex(canonical_json(transcript)); }

} // namespace dqrng
