#include <doctest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

const fs::path& out_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "dcmg_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Result run(const std::string& args, const fs::path& dir = out_dir()) {
    const std::string cmd = "DCMG_OUTPUT_DIR='" + dir.string() + "' '" DCMG_CLI_PATH "' " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("simulate exit codes follow the verdict") {
    CHECK(run("simulate --case 2+ --strategy baseline").code == 2);
    CHECK(run("simulate --case 2+ --strategy scheduled").code == 0);
    CHECK(run("simulate --case 2-").code == 0);
    CHECK(run("simulate --from 1 --pe0=-1.2pu --pe1 0.1pu").code == 2);
    CHECK(run("simulate --case 2- --model full").code == 0);
}

TEST_CASE("usage and configuration errors exit with 1") {
    CHECK(run("").code == 1);
    CHECK(run("simulate --case 9+").code == 1);
    CHECK(run("simulate --case 2+ --strategy sometimes").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("-c /nonexistent.yaml table2").code == 1);
    const fs::path bad = out_dir() / "bad.yaml";
    std::ofstream(bad) << "circuit:\n  C_bsu: 1\n";
    const auto r = run("-c " + bad.string() + " config dump");
    CHECK(r.code == 1);
    CHECK(r.out.find("circuit.C_bsu") != std::string::npos);
}

TEST_CASE("equilibria listing") {
    auto r = run("equilibria --mode 3 --pe 0.1pu");
    CHECK(r.code == 0);
    CHECK(r.out.find("109.2402") != std::string::npos);
    CHECK(r.out.find("0.75979") != std::string::npos);
    CHECK(r.out.find("SEP") != std::string::npos);
    CHECK(r.out.find("UEP") != std::string::npos);
    r = run("equilibria --mode 1 --pe=-1.2pu");
    CHECK(r.code == 0);
    CHECK(r.out.find("-24") != std::string::npos);
    r = run("equilibria --mode 2 --pe 3.5pu");
    CHECK(r.code == 0);
    CHECK(r.out.find("no equilibria") != std::string::npos);
    CHECK(run("equilibria --mode 2 --pe lots").code == 1);
}

TEST_CASE("table2 matches and writes its artifacts") {
    const auto r = run("table2");
    CHECK(r.code == 0);
    CHECK(fs::exists(out_dir() / "table2_baseline.csv"));
    CHECK(fs::exists(out_dir() / "table2_manifest.yaml"));
}

TEST_CASE("outputs are byte-identical across runs") {
    const fs::path a = out_dir() / "run_a";
    const fs::path b = out_dir() / "run_b";
    fs::create_directories(a);
    fs::create_directories(b);
    for (const auto& d : {a, b}) {
        CHECK(run("simulate --case 5+", d).code == 2);
        CHECK(run("roa --context mode3 --pe 0.1pu --grid 12x12", d).code == 0);
    }
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        const auto name = e.path().filename().string();
        if (name.find("manifest") != std::string::npos) continue;
        CAPTURE(name);
        REQUIRE(fs::exists(b / name));
        CHECK(slurp(e.path()) == slurp(b / name));
        ++compared;
    }
    CHECK(compared >= 3);
}

TEST_CASE("config dump reloads to the same hash") {
    const auto dump = run("config dump");
    REQUIRE(dump.code == 0);
    const fs::path f = out_dir() / "dumped.yaml";
    std::ofstream(f) << dump.out;
    const auto h1 = run("config hash");
    const auto h2 = run("-c " + f.string() + " config hash");
    CHECK(h1.code == 0);
    CHECK(h1.out == h2.out);
}
