#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "dqrng_cli_test";

int cli(const std::string& args) {
    const std::string cmd = std::string(DQRNG_CLI) + " " + args + " >" + (kScratch / "stdout.txt").string() + " 2>" +
                            (kScratch / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

struct Scratch {
    Scratch() {
        fs::remove_all(kScratch);
        fs::create_directories(kScratch);
    }
    ~Scratch() { fs::remove_all(kScratch); }
};

} // namespace

TEST_CASE_FIXTURE(Scratch, "run succeeds and writes artifacts") {
    const auto out = kScratch / "run";
    CHECK(cli("run --case case2 --trials 20 --transport direct --quiet --out " + out.string()) == 0);
    CHECK(fs::exists(out / "winrates.csv"));
    CHECK(slurp(kScratch / "stdout.txt").find("20 accepted") != std::string::npos);

    CHECK(cli("verify-transcript " + (out / "transcripts" / "round_0.json").string()) == 0);
    CHECK(slurp(kScratch / "stdout.txt").find("audit passed") != std::string::npos);
}

TEST_CASE_FIXTURE(Scratch, "tampered transcript fails the audit") {
    const auto out = kScratch / "run";
    REQUIRE(cli("run --trials 1 --quiet --out " + out.string()) == 0);
    auto text = slurp(out / "transcripts" / "round_0.json");
    const auto at = text.find("\"output\":[");
    REQUIRE(at != std::string::npos);
    auto& digit = text[at + 10];
    digit = digit == '9' ? '8' : static_cast<char>(digit + 1);
    write(kScratch / "bad.json", text);
    CHECK(cli("verify-transcript " + (kScratch / "bad.json").string()) == 1);
}

TEST_CASE_FIXTURE(Scratch, "verification failure exits 1") {
    CHECK(cli("run --trials 2 --quiet --dark-scale 100") == 1);
    CHECK(cli("run --trials 2 --quiet --strategy 3=naive") == 1);
}

TEST_CASE_FIXTURE(Scratch, "config errors exit 2") {
    CHECK(cli("run --nodes 1") == 2);
    CHECK(cli("run --case case9") == 2);
    CHECK(cli("run --strategy 9=honest") == 2);
    CHECK(cli("run --strategy naive") == 2);
    CHECK(cli("run --pump triangle") == 2);
    CHECK(cli("run --config /nonexistent/pool.toml") == 2);
    CHECK(cli("run --trials abc") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("") == 2);
    write(kScratch / "bad.toml", "m = lots\n");
    CHECK(cli("run --config " + (kScratch / "bad.toml").string()) == 2);
    CHECK(slurp(kScratch / "stderr.txt").find("line 1") != std::string::npos);
    CHECK(cli("simulate --nodes 0") == 2);
}

TEST_CASE_FIXTURE(Scratch, "insufficient data exits 3") {
    write(kScratch / "short.toml", "l = 5000\nm = 5000\nmax_reruns = 1\ntrials = 2\n");
    CHECK(cli("run --quiet --config " + (kScratch / "short.toml").string()) == 3);
    write(kScratch / "ten.txt", "0110100110");
    CHECK(cli("nist " + (kScratch / "ten.txt").string()) == 3);
}

TEST_CASE_FIXTURE(Scratch, "nist subcommand") {
    std::mt19937_64 rng(4);
    std::string bytes(70000, '\0');
    for (auto& b : bytes)
        b = static_cast<char>(rng() & 0xFF);
    write(kScratch / "random.bin", bytes);
    const int code = cli("nist " + (kScratch / "random.bin").string());
    CHECK((code == 0 || code == 1));
    CHECK(slurp(kScratch / "stdout.txt").find("560000 bits") != std::string::npos);
    write(kScratch / "zeros.bin", std::string(70000, '\0'));
    CHECK(cli("nist --format bytes " + (kScratch / "zeros.bin").string()) == 1);
    CHECK(cli("nist --format words " + (kScratch / "zeros.bin").string()) == 2);
}

TEST_CASE_FIXTURE(Scratch, "simulate writes records") {
    const auto csv = kScratch / "records.csv";
    CHECK(cli("simulate --pulses 5000 --seed 3 --out " + csv.string()) == 0);
    const auto text = slurp(csv);
    CHECK(text.size() > 100);
    CHECK(std::count(text.begin(), text.end(), '\n') > 50);
}

TEST_CASE_FIXTURE(Scratch, "transports agree on the transcript hash") {
    REQUIRE(cli("run --trials 2 --quiet --transport direct --out " + (kScratch / "a").string()) == 0);
    REQUIRE(cli("run --trials 2 --quiet --tcp 0 0 0 0 --out " + (kScratch / "b").string()) == 0);
    CHECK(slurp(kScratch / "a" / "rounds.csv") == slurp(kScratch / "b" / "rounds.csv"));
}
