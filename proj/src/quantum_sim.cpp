#include "dqrng/quantum_sim.hpp"

#include "dqrng/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace dqrng {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Arrival within the period, before quantisation.
struct Hit {
    std::uint64_t index;
    double local_ps;
};

} // namespace

std::string pump_name(const PumpShape& shape) {
    return std::visit(overloaded{
                          [](const pump::Uniform&) { return std::string("uniform"); },
                          [](const pump::Gaussian&) { return std::string("gaussian"); },
                          [](const pump::Rayleigh&) { return std::string("rayleigh"); },
                      },
                      shape);
}

void validate_pump(const PumpShape& shape) {
    std::visit(overloaded{
                   [](const pump::Uniform&) {},
                   [](const pump::Gaussian& g) {
                       if (!(g.sigma_bins > 0.0) || !std::isfinite(g.mean_bin))
                           throw ConfigError("gaussian pump needs sigma > 0");
                   },
                   [](const pump::Rayleigh& r) {
                       if (!(r.sigma_bins > 0.0))
                           throw ConfigError("rayleigh pump needs sigma > 0");
                   },
               },
               shape);
}

std::vector<double> bin_pdf(const PumpShape& shape, std::uint32_t bins_per_period) {
    if (bins_per_period < 2)
        throw ConfigError("bins_per_period must be at least 2");
    validate_pump(shape);

    std::vector<double> pdf(bins_per_period);
    std::visit(overloaded{
                   [&](const pump::Uniform&) {
                       std::fill(pdf.begin(), pdf.end(), 1.0);
                   },
                   [&](const pump::Gaussian& g) {
                       // mean_bin names the bin holding the peak, so centre it.
                       const double mu = g.mean_bin + 0.5;
                       for (std::uint32_t b = 0; b < bins_per_period; ++b) {
                           pdf[b] = normal_cdf((b + 1 - mu) / g.sigma_bins) -
                                    normal_cdf((b - mu) / g.sigma_bins);
                       }
                   },
                   [&](const pump::Rayleigh& r) {
                       const double s2 = 2.0 * r.sigma_bins * r.sigma_bins;
                       for (std::uint32_t b = 0; b < bins_per_period; ++b) {
                           const double lo = static_cast<double>(b);
                           const double hi = lo + 1.0;
                           // F(hi) - F(lo) with F(x) = 1 - exp(-x^2 / 2s^2)
                           pdf[b] = std::exp(-lo * lo / s2) - std::exp(-hi * hi / s2);
                       }
                   },
               },
               shape);

    double total = 0.0;
    for (double p : pdf)
        total += p;
    if (!(total > 0.0))
        throw ConfigError("pump shape has no mass inside the period");
    for (double& p : pdf)
        p /= total;
    return pdf;
}

BinSampler::BinSampler(const PumpShape& shape, std::uint32_t bins_per_period)
    : pdf_(bin_pdf(shape, bins_per_period)), cdf_(pdf_.size()) {
    double acc = 0.0;
    for (std::size_t b = 0; b < pdf_.size(); ++b) {
        acc += pdf_[b];
        cdf_[b] = acc;
    }
    cdf_.back() = 1.0;
}

std::uint32_t BinSampler::operator()(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto b = static_cast<std::uint32_t>(it - cdf_.begin());
    return std::min<std::uint32_t>(b, bins() - 1);
}

std::uint32_t sample_bin(const PumpShape& shape, std::uint32_t bins_per_period, Rng& rng) {
    return BinSampler(shape, bins_per_period)(rng);
}

std::uint32_t quantize(double arrival_ps, double bin_width_ps, double period_ps) {
    if (!(bin_width_ps > 0.0))
        throw ConfigError("bin width must be positive");
    if (!(arrival_ps >= 0.0) || !(arrival_ps < period_ps))
        throw RangeError("arrival outside the reference period");
    return static_cast<std::uint32_t>(std::floor(arrival_ps / bin_width_ps));
}

std::uint32_t SourceConfig::bins_per_period() const {
    if (!(bin_width_ps > 0.0) || !(period_ps > 0.0))
        throw ConfigError("period and bin width must be positive");
    const double ratio = period_ps / bin_width_ps;
    const double whole = std::round(ratio);
    if (std::abs(ratio - whole) > 1e-9 || whole < 1.0)
        throw ConfigError("period must be a whole number of bins");
    return static_cast<std::uint32_t>(whole);
}

double SourceConfig::loss(ParticipantId node) const {
    return loss_per_node.empty() ? kDefaultLoss : loss_per_node.at(node);
}

double SourceConfig::dark_rate(ParticipantId node) const {
    return dark_rate_per_node.empty() ? kDefaultDarkRate : dark_rate_per_node.at(node);
}

void SourceConfig::validate() const {
    if (n_nodes < 1)
        throw ConfigError("source needs at least one node");
    if (routing == Routing::DistinctNodes && n_nodes < 2)
        throw ConfigError("distinct routing needs two nodes");
    if (n_pulses < 1)
        throw ConfigError("n_pulses must be positive");
    if (!is_probability(pair_rate))
        throw ConfigError("pair_rate must lie in [0, 1]");
    if (bins_per_period() < 2)
        throw ConfigError("a period must hold at least two bins");
    validate_pump(pump_shape);
    if (!loss_per_node.empty() && loss_per_node.size() != n_nodes)
        throw ConfigError("loss_per_node must have one entry per node");
    if (!dark_rate_per_node.empty() && dark_rate_per_node.size() != n_nodes)
        throw ConfigError("dark_rate_per_node must have one entry per node");
    for (double l : loss_per_node)
        if (!is_probability(l))
            throw ConfigError("loss must lie in [0, 1]");
    for (double d : dark_rate_per_node)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw ConfigError("dark rate must be non-negative");
    if (!(jitter_sigma_ps >= 0.0) || !std::isfinite(jitter_sigma_ps))
        throw ConfigError("jitter sigma must be non-negative");
}

SimulatedRound simulate_round(const SourceConfig& config) {
    config.validate();
    const std::uint32_t bins = config.bins_per_period();
    const BinSampler sampler(config.pump_shape, bins);
    const double period = config.period_ps;
    const double width = config.bin_width_ps;

    Rng rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<ParticipantId> any_node(0, config.n_nodes - 1);
    std::normal_distribution<double> jitter(0.0, config.jitter_sigma_ps > 0.0 ? config.jitter_sigma_ps : 1.0);

    SimulatedRound out;
    std::vector<std::vector<Hit>> hits(config.n_nodes);

    // Every random draw below happens regardless of loss, so runs that differ
    // only in loss stay coupled photon by photon.
    auto route_photon = [&](ParticipantId node, std::uint64_t index, double emit_ps) {
        const double survive = unit(rng);
        const double j = config.jitter_sigma_ps > 0.0 ? jitter(rng) : 0.0;
        if (survive < config.loss(node))
            return;
        const double local = emit_ps + j;
        const double shift = std::floor(local / period);
        if (shift < 0.0 && static_cast<double>(index) < -shift)
            return;
        const auto idx = static_cast<std::uint64_t>(static_cast<double>(index) + shift);
        if (idx >= config.n_pulses)
            return;
        double wrapped = local - shift * period;
        if (wrapped >= period)
            wrapped = std::nextafter(period, 0.0);
        hits[node].push_back({idx, wrapped});
    };

    if (config.pair_rate > 0.0) {
        std::geometric_distribution<std::uint64_t> gap(config.pair_rate);
        for (std::uint64_t t = gap(rng); t < config.n_pulses; t += 1 + gap(rng)) {
            const std::uint32_t bin = sampler(rng);
            const double emit = (bin + unit(rng)) * width;
            const ParticipantId a = any_node(rng);
            ParticipantId b = any_node(rng);
            if (config.routing == Routing::DistinctNodes) {
                std::uniform_int_distribution<ParticipantId> other(0, config.n_nodes - 2);
                b = other(rng);
                if (b >= a)
                    ++b;
            }
            out.pairs.push_back({t, bin, a, b});
            route_photon(a, t, emit);
            route_photon(b, t, emit);
        }
    }

    for (ParticipantId node = 0; node < config.n_nodes; ++node) {
        const double rate = config.dark_rate(node);
        if (rate <= 0.0)
            continue;
        const double p_any = -std::expm1(-rate);
        std::geometric_distribution<std::uint64_t> gap(std::min(p_any, 1.0));
        for (std::uint64_t t = gap(rng); t < config.n_pulses; t += 1 + gap(rng)) {
            // Count in this period is Poisson(rate) conditioned on >= 1; only
            // the earliest one can register.
            const double u = unit(rng) * p_any;
            double pmf = rate * std::exp(-rate);
            double cum = pmf;
            unsigned k = 1;
            while (cum < u && k < 1000) {
                ++k;
                pmf *= rate / k;
                cum += pmf;
            }
            const double first = 1.0 - std::pow(unit(rng), 1.0 / k);
            hits[node].push_back({t, std::min(first * period, std::nextafter(period, 0.0))});
        }
    }

    out.nodes.resize(config.n_nodes);
    for (ParticipantId node = 0; node < config.n_nodes; ++node) {
        auto& h = hits[node];
        std::sort(h.begin(), h.end(), [](const Hit& x, const Hit& y) {
            return x.index != y.index ? x.index < y.index : x.local_ps < y.local_ps;
        });
        auto& records = out.nodes[node];
        records.reserve(h.size());
        for (const Hit& hit : h) {
            if (!records.empty() && records.back().index == hit.index)
                continue;
            records.push_back({node, hit.index, quantize(hit.local_ps, width, period)});
        }
    }
    return out;
}

std::vector<NodeRecords> generate_round(const SourceConfig& config) {
    return simulate_round(config).nodes;
}

void write_records_csv(std::ostream& out, std::span<const NodeRecords> nodes) {
    out << "node,index,bin\n";
    for (const auto& list : nodes)
        for (const auto& r : list)
            out << r.node << ',' << r.index << ',' << r.bin << '\n';
}

std::vector<NodeRecords> read_records_csv(std::istream& in, std::uint32_t n_nodes) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty records file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "node,index,bin")
        throw ParseError("expected header node,index,bin");

    std::vector<NodeRecords> nodes(n_nodes);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::istringstream fields(line);
        unsigned long long node = 0, index = 0, bin = 0;
        char c1 = 0, c2 = 0;
        if (!(fields >> node >> c1 >> index >> c2 >> bin) || c1 != ',' || c2 != ',')
            throw ParseError("bad record on line " + std::to_string(line_no));
        if (node >= n_nodes)
            throw ParseError("node id out of range on line " + std::to_string(line_no));
        auto& list = nodes[node];
        if (!list.empty() && list.back().index >= index)
            throw ParseError("indices must ascend per node (line " + std::to_string(line_no) + ")");
        list.push_back({static_cast<ParticipantId>(node), index, static_cast<std::uint32_t>(bin)});
    }
    return nodes;
}

} // namespace dqrng
