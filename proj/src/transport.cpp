#include "dqrng/transport.hpp"

#include "dqrng/errors.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <thread>
#include <tuple>

namespace dqrng {

const char* msg_type_name(MsgType type) {
    switch (type) {
    case MsgType::Hello: return "HELLO";
    case MsgType::RevealC: return "REVEAL_C";
    case MsgType::RevealQ: return "REVEAL_Q";
    case MsgType::Verdict: return "VERDICT";
    case MsgType::Output: return "OUTPUT";
    }
    return "UNKNOWN";
}

MsgType msg_type_from_name(const std::string& name) {
    for (auto t : {MsgType::Hello, MsgType::RevealC, MsgType::RevealQ, MsgType::Verdict, MsgType::Output})
        if (name == msg_type_name(t))
            return t;
    throw ParseError("unknown message type " + name);
}

Envelope make_envelope(MsgType type, ParticipantId sender, std::uint64_t seq, const Json& payload) {
    return Envelope{type, sender, seq, payload.dump()};
}

void validate_payload(const Envelope& e) {
    Json j;
    try {
        j = Json::parse(e.payload);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("payload is not JSON: ") + ex.what());
    }
    try {
        switch (e.type) {
        case MsgType::Hello:
            u64_from_json(j.at("participant"));
            if (!j.at("prediction").is_null())
                u64_from_json(j.at("prediction"));
            break;
        case MsgType::RevealC: classical_from_json(j); break;
        case MsgType::RevealQ: quantum_from_json(j); break;
        case MsgType::Verdict: verdict_from_json(j); break;
        case MsgType::Output:
            for (const auto& v : j.at("output"))
                u64_from_json(v);
            break;
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("payload does not match ") + msg_type_name(e.type) + ": " + ex.what());
    }
}

std::string encode(const Envelope& e) {
    // The payload is already canonical, so the body is assembled textually;
    // this is byte-identical to dumping the equivalent ordered object.
    std::string body;
    body.reserve(e.payload.size() + 64);
    body += "{\"type\":\"";
    body += msg_type_name(e.type);
    body += "\",\"sender\":";
    body += std::to_string(e.sender);
    body += ",\"seq\":";
    body += u64_json(e.seq).dump();
    body += ",\"payload\":";
    body += e.payload;
    body += '}';
    if (body.size() > kMaxFrameBytes)
        throw FramingError("frame exceeds 64 MiB");
    const auto len = static_cast<std::uint32_t>(body.size());
    std::string frame(4, '\0');
    frame[0] = static_cast<char>((len >> 24) & 0xFF);
    frame[1] = static_cast<char>((len >> 16) & 0xFF);
    frame[2] = static_cast<char>((len >> 8) & 0xFF);
    frame[3] = static_cast<char>(len & 0xFF);
    return frame + body;
}

namespace {

std::uint32_t read_length(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

Envelope decode_body(std::string_view body) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("frame body is not JSON: ") + ex.what());
    }
    Envelope e;
    try {
        e.type = msg_type_from_name(j.at("type").get<std::string>());
        e.sender = static_cast<ParticipantId>(u64_from_json(j.at("sender")));
        e.seq = u64_from_json(j.at("seq"));
        e.payload = j.at("payload").dump();
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("bad envelope: ") + ex.what());
    }
    validate_payload(e);
    return e;
}

} // namespace

Envelope decode(std::span<const std::uint8_t> frame) {
    if (frame.size() < 4)
        throw FramingError("truncated length prefix");
    const auto len = read_length(frame.data());
    if (len == 0)
        throw FramingError("zero-length frame");
    if (len > kMaxFrameBytes)
        throw FramingError("frame exceeds 64 MiB");
    if (frame.size() - 4 < len)
        throw FramingError("truncated frame body");
    if (frame.size() - 4 > len)
        throw FramingError("trailing bytes after frame");
    return decode_body(std::string_view(reinterpret_cast<const char*>(frame.data()) + 4, len));
}

Envelope decode(std::string_view frame) {
    return decode(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(frame.data()), frame.size()));
}

Bus::Bus(std::uint32_t participants)
    : participants_(participants), receivers_(participants), inbox_(participants) {
    if (participants < 1)
        throw ConfigError("bus needs at least one participant");
}

Bus::~Bus() = default;

void Bus::subscribe(ParticipantId who, Receiver receiver) {
    if (who >= participants_)
        throw ConfigError("no such participant on this bus");
    receivers_[who] = std::move(receiver);
}

DeliveryReceipt Bus::broadcast(const Envelope& envelope) {
    std::lock_guard lock(broadcast_mutex_);
    if (envelope.sender >= participants_)
        throw ProtocolViolation("sender is not on this bus");
    if (seen_.count({envelope.sender, envelope.seq}))
        throw ProtocolViolation("duplicate (sender, seq) " + std::to_string(envelope.sender) + "/" +
                                std::to_string(envelope.seq));
    validate_payload(envelope);
    seen_.insert({envelope.sender, envelope.seq});
    transmit(envelope);
    return {envelope.sender, envelope.seq, participants_};
}

void Bus::deliver_to(ParticipantId who, Envelope envelope) {
    std::lock_guard lock(inbox_mutex_);
    inbox_.at(who).push_back(std::move(envelope));
}

std::size_t Bus::flush() {
    std::lock_guard lock(broadcast_mutex_);
    settle();
    std::vector<std::vector<Envelope>> batches;
    {
        std::lock_guard inbox_lock(inbox_mutex_);
        batches.swap(inbox_);
        inbox_.resize(participants_);
    }
    std::size_t delivered = 0;
    for (ParticipantId who = 0; who < participants_; ++who) {
        auto& batch = batches[who];
        std::sort(batch.begin(), batch.end(), [](const Envelope& a, const Envelope& b) {
            return std::tie(a.type, a.sender, a.seq) < std::tie(b.type, b.sender, b.seq);
        });
        delivered = std::max(delivered, batch.size());
        if (receivers_[who])
            for (const auto& e : batch)
                receivers_[who](e);
    }
    return delivered;
}

void Bus::new_round() {
    std::lock_guard lock(broadcast_mutex_);
    seen_.clear();
}

namespace {

class LoopbackBus final : public Bus {
public:
    using Bus::Bus;

protected:
    void transmit(const Envelope& envelope) override {
        for (ParticipantId who = 0; who < participants(); ++who)
            deliver_to(who, envelope);
    }
};

void write_all(int fd, const std::string& data) {
    std::size_t done = 0;
    while (done < data.size()) {
        const auto n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw Error(std::string("socket write failed: ") + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
}

// false on clean EOF before any byte
bool read_exact(int fd, char* buf, std::size_t len) {
    std::size_t done = 0;
    while (done < len) {
        const auto n = ::recv(fd, buf + done, len - done, 0);
        if (n == 0) {
            if (done == 0)
                return false;
            throw FramingError("connection closed mid-frame");
        }
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw Error(std::string("socket read failed: ") + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
    return true;
}

// Reads one frame; empty optional on EOF.
std::optional<std::string> read_frame(int fd) {
    char prefix[4];
    if (!read_exact(fd, prefix, 4))
        return std::nullopt;
    const auto len = read_length(reinterpret_cast<const unsigned char*>(prefix));
    if (len == 0)
        throw FramingError("zero-length frame");
    if (len > kMaxFrameBytes)
        throw FramingError("frame exceeds 64 MiB");
    std::string frame(4 + len, '\0');
    std::memcpy(frame.data(), prefix, 4);
    if (!read_exact(fd, frame.data() + 4, len))
        throw FramingError("connection closed mid-frame");
    return frame;
}

struct Link {
    ParticipantId from;
    ParticipantId to;
    int write_fd;
    int read_fd;
};

// Frames cross real file descriptors; one reader thread per directed link.
class StreamBus final : public Bus {
public:
    StreamBus(std::uint32_t participants, std::vector<Link> links)
        : Bus(participants), links_(std::move(links)), expected_(participants, 0), arrived_(participants, 0) {
        for (std::size_t k = 0; k < links_.size(); ++k)
            readers_.emplace_back([this, k] { read_loop(links_[k]); });
    }

    ~StreamBus() override {
        for (auto& l : links_)
            ::shutdown(l.write_fd, SHUT_WR);
        for (auto& t : readers_)
            t.join();
        for (auto& l : links_) {
            ::close(l.write_fd);
            if (l.read_fd != l.write_fd)
                ::close(l.read_fd);
        }
    }

protected:
    void transmit(const Envelope& envelope) override {
        const auto frame = encode(envelope);
        {
            std::lock_guard lock(state_mutex_);
            for (ParticipantId who = 0; who < participants(); ++who)
                ++expected_[who];
        }
        // The sender's own copy also goes through the codec.
        deliver_to(envelope.sender, decode(frame));
        mark_arrived(envelope.sender);
        for (auto& l : links_)
            if (l.from == envelope.sender)
                write_all(l.write_fd, frame);
    }

    void settle() override {
        std::unique_lock lock(state_mutex_);
        const bool done = arrived_cv_.wait_for(lock, std::chrono::seconds(120), [&] {
            return !failure_.empty() || arrived_ == expected_;
        });
        if (!failure_.empty())
            throw FramingError("receiver failed: " + failure_);
        if (!done)
            throw Error("timed out waiting for frames");
        std::fill(expected_.begin(), expected_.end(), 0);
        std::fill(arrived_.begin(), arrived_.end(), 0);
    }

private:
    void mark_arrived(ParticipantId who) {
        std::lock_guard lock(state_mutex_);
        ++arrived_[who];
        arrived_cv_.notify_all();
    }

    void read_loop(const Link& link) {
        try {
            while (auto frame = read_frame(link.read_fd)) {
                deliver_to(link.to, decode(*frame));
                mark_arrived(link.to);
            }
        } catch (const std::exception& ex) {
            std::lock_guard lock(state_mutex_);
            failure_ = ex.what();
            arrived_cv_.notify_all();
        }
    }

    std::vector<Link> links_;
    std::vector<std::thread> readers_;
    std::mutex state_mutex_;
    std::condition_variable arrived_cv_;
    std::vector<std::uint64_t> expected_;
    std::vector<std::uint64_t> arrived_;
    std::string failure_;
};

int checked(int rc, const char* what) {
    if (rc < 0)
        throw Error(std::string(what) + ": " + std::strerror(errno));
    return rc;
}

} // namespace

std::unique_ptr<Bus> make_loopback_bus(std::uint32_t participants) {
    return std::make_unique<LoopbackBus>(participants);
}

std::unique_ptr<Bus> make_socketpair_bus(std::uint32_t participants) {
    std::vector<Link> links;
    for (ParticipantId from = 0; from < participants; ++from) {
        for (ParticipantId to = 0; to < participants; ++to) {
            if (from == to)
                continue;
            int fds[2];
            checked(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), "socketpair");
            links.push_back({from, to, fds[0], fds[1]});
        }
    }
    return std::make_unique<StreamBus>(participants, std::move(links));
}

std::unique_ptr<Bus> make_tcp_bus(std::span<const std::uint16_t> ports) {
    const auto n = static_cast<std::uint32_t>(ports.size());
    if (n < 1)
        throw ConfigError("tcp bus needs at least one port");

    std::vector<int> listeners;
    std::vector<sockaddr_in> addrs;
    auto cleanup = [&] {
        for (int fd : listeners)
            ::close(fd);
    };
    try {
        for (auto port : ports) {
            const int fd = checked(::socket(AF_INET, SOCK_STREAM, 0), "socket");
            listeners.push_back(fd);
            const int one = 1;
            ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
            sockaddr_in addr{};
            addr.sin_family = AF_INET;
            addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
            addr.sin_port = htons(port);
            checked(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), "bind");
            checked(::listen(fd, static_cast<int>(n) + 4), "listen");
            socklen_t len = sizeof addr;
            checked(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len), "getsockname");
            addrs.push_back(addr);
        }

        std::vector<Link> links;
        for (ParticipantId to = 0; to < n; ++to) {
            for (ParticipantId from = 0; from < n; ++from) {
                if (from == to)
                    continue;
                const int out = checked(::socket(AF_INET, SOCK_STREAM, 0), "socket");
                checked(::connect(out, reinterpret_cast<sockaddr*>(&addrs[to]), sizeof addrs[to]), "connect");
                Json hello;
                hello["participant"] = from;
                hello["prediction"] = nullptr;
                write_all(out, encode(make_envelope(MsgType::Hello, from, 0, hello)));
                const int in = checked(::accept(listeners[to], nullptr, nullptr), "accept");
                const auto frame = read_frame(in);
                if (!frame)
                    throw FramingError("peer closed during handshake");
                const auto who = decode(*frame);
                if (who.type != MsgType::Hello || who.sender != from)
                    throw ProtocolViolation("unexpected handshake");
                links.push_back({from, to, out, in});
            }
        }
        cleanup();
        return std::make_unique<StreamBus>(n, std::move(links));
    } catch (...) {
        cleanup();
        throw;
    }
}

} // namespace dqrng
