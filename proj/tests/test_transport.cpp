#include "dqrng/errors.hpp"
#include "dqrng/transport.hpp"

#include <doctest.h>

#include <map>

using namespace dqrng;

namespace {

Envelope classical_envelope(ParticipantId who, std::uint64_t seq) {
    return make_envelope(MsgType::RevealC, who, seq, to_json(ClassicalReveal{who, {seq, 2 * seq + 1}, {}}));
}

Envelope hello(ParticipantId who, std::uint64_t seq = 0) {
    return make_envelope(MsgType::Hello, who, seq, Json{{"participant", who}, {"prediction", nullptr}});
}

std::vector<std::vector<Envelope>> exchange(Bus& bus) {
    std::vector<std::vector<Envelope>> got(bus.participants());
    for (ParticipantId who = 0; who < bus.participants(); ++who)
        bus.subscribe(who, [&got, who](const Envelope& e) { got[who].push_back(e); });
    // Broadcast out of order on purpose.
    for (ParticipantId who = bus.participants(); who-- > 0;) {
        bus.broadcast(classical_envelope(who, 1));
        bus.broadcast(hello(who));
    }
    bus.broadcast(make_envelope(MsgType::RevealQ, 1, 2, to_json(QuantumReveal{1, {{1, 4, 9}, {1, 1u << 30, 3}}})));
    bus.flush();
    return got;
}

} // namespace

TEST_CASE("envelope roundtrip") {
    const auto e = classical_envelope(3, 1);
    const auto frame = encode(e);
    CHECK(decode(frame) == e);
    CHECK(static_cast<unsigned char>(frame[0]) == 0);
    CHECK(frame.size() == 4 + ((std::size_t{static_cast<unsigned char>(frame[2])} << 8) |
                               static_cast<unsigned char>(frame[3])));
    const auto big = make_envelope(MsgType::Output, 0, std::uint64_t{1} << 60, Json{{"output", {1, 2}}});
    CHECK(decode(encode(big)) == big);
    for (auto t : {MsgType::Hello, MsgType::RevealC, MsgType::RevealQ, MsgType::Verdict, MsgType::Output})
        CHECK(msg_type_from_name(msg_type_name(t)) == t);
    CHECK_THROWS_AS(msg_type_from_name("PING"), ParseError);
}

TEST_CASE("framing errors") {
    const auto frame = encode(hello(1));
    CHECK_THROWS_AS(decode(std::string_view(frame).substr(0, 3)), FramingError);
    CHECK_THROWS_AS(decode(std::string_view(frame).substr(0, frame.size() - 1)), FramingError);
    CHECK_THROWS_AS(decode(frame + "x"), FramingError);
    CHECK_THROWS_AS(decode(std::string(4, '\0')), FramingError);
    CHECK_THROWS_AS(decode(std::string("\x7f\xff\xff\xff", 4) + "{}"), FramingError);

    auto body_frame = [](const std::string& body) {
        std::string f(4, '\0');
        f[3] = static_cast<char>(body.size());
        return f + body;
    };
    CHECK_THROWS_AS(decode(body_frame("not json")), ParseError);
    CHECK_THROWS_AS(decode(body_frame("{\"type\":\"HELLO\"}")), ParseError);
    CHECK_THROWS_AS(decode(body_frame("{\"type\":\"PING\",\"sender\":0,\"seq\":0,\"payload\":{}}")), ParseError);
    CHECK_THROWS_AS(decode(body_frame("{\"type\":\"REVEAL_C\",\"sender\":0,\"seq\":0,\"payload\":{}}")), ParseError);
}

TEST_CASE("payload validation") {
    CHECK_NOTHROW(validate_payload(hello(0)));
    Envelope bad = hello(0);
    bad.type = MsgType::RevealQ;
    CHECK_THROWS_AS(validate_payload(bad), ParseError);
    bad.payload = "{";
    CHECK_THROWS_AS(validate_payload(bad), ParseError);
}

TEST_CASE("loopback bus delivers in a fixed order") {
    auto bus = make_loopback_bus(3);
    const auto got = exchange(*bus);
    for (const auto& inbox : got) {
        REQUIRE(inbox.size() == 7);
        CHECK(inbox == got[0]);
        for (std::size_t k = 1; k < inbox.size(); ++k)
            CHECK(std::tie(inbox[k - 1].type, inbox[k - 1].sender, inbox[k - 1].seq) <
                  std::tie(inbox[k].type, inbox[k].sender, inbox[k].seq));
    }
    CHECK(got[0][0].type == MsgType::Hello);
    CHECK(got[0].back().type == MsgType::RevealQ);
}

TEST_CASE("duplicates and strangers are refused") {
    auto bus = make_loopback_bus(2);
    std::size_t received = 0;
    bus->subscribe(0, [&](const Envelope&) { ++received; });
    CHECK(bus->broadcast(hello(1)).recipients == 2);
    CHECK_THROWS_AS(bus->broadcast(hello(1)), ProtocolViolation);
    CHECK_THROWS_AS(bus->broadcast(hello(5)), ProtocolViolation);
    Envelope junk = hello(0, 4);
    junk.payload = "[1,2]";
    CHECK_THROWS_AS(bus->broadcast(junk), ParseError);
    CHECK_THROWS_AS(bus->subscribe(2, {}), ConfigError);
    CHECK(bus->flush() == 1);
    CHECK(received == 1);
    bus->new_round();
    CHECK_NOTHROW(bus->broadcast(hello(1)));
    CHECK(bus->flush() == 1);
    CHECK(bus->flush() == 0);
    CHECK_THROWS_AS(make_loopback_bus(0), ConfigError);
}

TEST_CASE("socket buses match the loopback bus") {
    auto loop = make_loopback_bus(4);
    const auto want = exchange(*loop);
    auto pairs = make_socketpair_bus(4);
    CHECK(exchange(*pairs) == want);
    const std::vector<std::uint16_t> ports(4, 0);
    auto tcp = make_tcp_bus(ports);
    CHECK(exchange(*tcp) == want);
    CHECK_THROWS_AS(make_tcp_bus(std::span<const std::uint16_t>{}), ConfigError);
}

TEST_CASE("socket bus carries large frames across several flushes") {
    auto bus = make_socketpair_bus(3);
    std::map<ParticipantId, std::size_t> records;
    for (ParticipantId who = 0; who < 3; ++who)
        bus->subscribe(who, [&records, who](const Envelope& e) {
            records[who] += quantum_from_json(Json::parse(e.payload)).records.size();
        });
    for (int round = 0; round < 3; ++round) {
        bus->new_round();
        QuantumReveal q{0, {}};
        for (std::uint64_t i = 0; i < 200000; ++i)
            q.records.push_back({0, 3 * i, static_cast<std::uint32_t>(i % 400)});
        bus->broadcast(make_envelope(MsgType::RevealQ, 0, 2, to_json(q)));
        bus->flush();
    }
    for (ParticipantId who = 0; who < 3; ++who)
        CHECK(records[who] == 600000);
}
