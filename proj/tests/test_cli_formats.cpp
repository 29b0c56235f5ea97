#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#ifdef DRG_CLI_PATH
#include <sys/wait.h>
#endif
#include <fstream>
#include <sstream>
#include <string>

#include "drg/io.hpp"

using namespace drg;

namespace {

LGridDistribution random_lgrid(int n, Rng& rng) {
    int h = n / 2;
    LGridDistribution d;
    d.n = n;
    d.L.resize(h + 1, h + 1);
    for (int r = 0; r <= h; ++r)
        for (int s = 0; s <= h; ++s) d.L(r, s) = rng.uniform() + 1e-6;
    d.L /= d.L.sum();
    d.sigma = Permutation::random(n, rng);
    return d;
}

ExperimentVector random_experiment(int n, Rng& rng) {
    ExperimentVector i(static_cast<std::size_t>(n));
    for (auto& b : i) b = rng.bernoulli(0.5) ? 1 : 0;
    return i;
}

json minimal_config_json() {
    return json{{"n", 8},
                {"k", 2.0},
                {"method", "combined"},
                {"target_multiple", 0.5},
                {"seed", "0102030405060708"}};
}

}  // namespace

TEST_CASE("hex helpers round-trip and reject malformed input") {
    std::vector<std::uint8_t> bytes = {0x00, 0xde, 0xad, 0xbe, 0xef, 0x7f};
    std::string hex = bytes_to_hex(bytes);
    CHECK(hex == "00deadbeef7f");
    CHECK(hex_to_bytes(hex) == bytes);
    CHECK(hex_to_bytes("DEADBEEF") == std::vector<std::uint8_t>{0xde, 0xad, 0xbe, 0xef});
    CHECK_THROWS_AS(hex_to_bytes("abc"), ValidationError);   // odd length
    CHECK_THROWS_AS(hex_to_bytes("zz"), ValidationError);    // bad digit
}

TEST_CASE("permutation and distribution serialization round-trips exactly") {
    Rng rng(70);
    Permutation p = Permutation::random(10, rng);
    CHECK(permutation_from_json(to_json(p)).map() == p.map());

    LGridDistribution d = random_lgrid(8, rng);
    LGridDistribution d2 = lgrid_from_json(to_json(d));
    CHECK(d2.n == d.n);
    CHECK((d2.L - d.L).cwiseAbs().maxCoeff() == 0.0);
    CHECK(d2.sigma.map() == d.sigma.map());

    MixtureDistribution mix;
    mix.components.push_back({0.3, random_lgrid(8, rng)});
    mix.components.push_back({0.7, random_lgrid(8, rng)});
    MixtureDistribution mix2 = mixture_from_json(to_json(mix));
    CHECK(to_json(mix2) == to_json(mix));

    QuadraticMatrix q = moments(mix);
    QuadraticMatrix q2 = quadratic_from_json(to_json(q));
    CHECK((q2.M - q.M).cwiseAbs().maxCoeff() == 0.0);
    CHECK((q2.mu - q.mu).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("strategy serialization preserves evaluation") {
    Rng rng(71);
    int n = 8;
    double k = 4.0;
    MixtureDistribution mix;
    mix.components.push_back({1.0, random_lgrid(n, rng)});

    Strategy tab = oracle_fit(mix, mix, k);
    Strategy bil = bilinear_fit(moments(mix), k);
    Strategy part = partition_fit(moments(mix), moments(mix), k);
    for (const Strategy& s : {tab, bil, part}) {
        Strategy back = strategy_from_json(to_json(s));
        CHECK(back.index() == s.index());
        for (int t = 0; t < 20; ++t) {
            ExperimentVector i = random_experiment(n, rng);
            ExperimentVector j = random_experiment(n, rng);
            CHECK(strategy_eval(back, i, j) == strategy_eval(s, i, j));
        }
    }
}

TEST_CASE("config parsing applies defaults and fails closed") {
    EngineConfig c = config_from_json(minimal_config_json());
    CHECK(c.n == 8);
    CHECK(c.k == 2.0);
    CHECK(c.method == Method::Combined);
    CHECK(c.alpha == 4e-4);          // documented default
    CHECK(c.theta_spread == 0.05);   // documented default
    CHECK(c.restart_budget == 8);
    CHECK(c.mix_mode.random);
    CHECK(c.seed == hex_to_bytes("0102030405060708"));

    json bad = minimal_config_json();
    bad["mystery_knob"] = 1;
    CHECK_THROWS_AS(config_from_json(bad), ValidationError);

    bad = minimal_config_json();
    bad["method"] = "quadratic";
    CHECK_THROWS_AS(config_from_json(bad), ValidationError);

    bad = minimal_config_json();
    bad["mix_mode"] = json{{"random", false}, {"typo", 1}};
    CHECK_THROWS_AS(config_from_json(bad), ValidationError);

    json ok = minimal_config_json();
    ok["mix_mode"] = json{{"random", false}, {"alpha_mix", 0.25}};
    EngineConfig c2 = config_from_json(ok);
    CHECK_FALSE(c2.mix_mode.random);
    CHECK(c2.mix_mode.alpha_mix == 0.25);
}

TEST_CASE("config hash is stable under round-trips and field-sensitive") {
    EngineConfig c = config_from_json(minimal_config_json());
    std::uint64_t h = config_hash(c);
    CHECK(config_hash(config_from_json(to_json(c))) == h);

    EngineConfig c2 = c;
    c2.target_multiple = 0.6;
    CHECK(config_hash(c2) != h);
    EngineConfig c3 = c;
    c3.seed[0] ^= 0x01;
    CHECK(config_hash(c3) != h);
}

TEST_CASE("checkpoints embed their config and verify the hash") {
    EngineConfig c = config_from_json(minimal_config_json());
    EngineState st = init(c);
    json snap = checkpoint_to_json(st, c);
    CHECK(config_hash(checkpoint_config(snap)) == config_hash(c));

    json tampered = snap;
    tampered["config_hash"] = snap["config_hash"].get<std::uint64_t>() + 1;
    CHECK_THROWS_AS(checkpoint_from_json(tampered, c), ValidationError);
}

#ifdef DRG_CLI_PATH

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string out;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    fs::path d = fs::temp_directory_path() / "drg_cli_test";
    fs::create_directories(d);
    return d;
}

CliResult run_cli(const std::string& args, const std::string& tag) {
    fs::path out = scratch_dir() / (tag + ".out");
    std::string cmd = std::string(DRG_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2> " + (scratch_dir() / (tag + ".err")).string();
    int rc = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    return r;
}

fs::path write_config(const json& j, const std::string& name) {
    fs::path p = scratch_dir() / name;
    std::ofstream out(p);
    out << j.dump(2) << '\n';
    return p;
}

}  // namespace

TEST_CASE("cli: tampered verification is caught with exit code 3") {
    CliResult r = run_cli("verify --level fast --tamper", "tamper");
    CHECK(r.exit_code == 3);
    CHECK(r.out.find("FAIL") != std::string::npos);
    CHECK(r.out.find("checks passed") != std::string::npos);
}

TEST_CASE("cli: run rejects non-positive step counts") {
    fs::path cfg = write_config(minimal_config_json(), "cfg_run0.json");
    CliResult r = run_cli("run --config " + cfg.string() + " --steps 0", "run0");
    CHECK(r.exit_code == 1);
}

TEST_CASE("cli: identical seeds give byte-identical step logs") {
    fs::path cfg = write_config(minimal_config_json(), "cfg_det.json");
    std::string args = "run --config " + cfg.string() + " --steps 3 --format csv";
    CliResult a = run_cli(args, "det_a");
    CliResult b = run_cli(args, "det_b");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("m,objective_fast,objective_slow", 0) == 0);

    CliResult c = run_cli(args + " --seed aabbccddeeff0011", "det_c");
    CHECK(c.exit_code == 0);
    CHECK(c.out != a.out);
}

TEST_CASE("cli: emit refuses immature checkpoints and honors --count") {
    fs::path cfg = write_config(minimal_config_json(), "cfg_immature.json");
    fs::path ck1 = scratch_dir() / "immature.ck.json";
    CliResult r1 = run_cli("run --config " + cfg.string() +
                               " --steps 1 --out " + ck1.string(),
                           "mk_immature");
    REQUIRE(r1.exit_code == 0);
    CliResult e1 = run_cli("emit --checkpoint " + ck1.string(), "emit_immature");
    CHECK(e1.exit_code == 1);

    json fast = minimal_config_json();
    fast["maturity_factor"] = 0.05;  // mature after a single step at n = 8
    fs::path cfg2 = write_config(fast, "cfg_mature.json");
    fs::path ck2 = scratch_dir() / "mature.ck.json";
    CliResult r2 = run_cli("run --config " + cfg2.string() +
                               " --steps 1 --out " + ck2.string(),
                           "mk_mature");
    REQUIRE(r2.exit_code == 0);
    CliResult e2 = run_cli("emit --checkpoint " + ck2.string() + " --count 3",
                           "emit_mature");
    CHECK(e2.exit_code == 0);
    std::istringstream lines(e2.out);
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        ++count;
        CHECK(line.size() == 8);
        CHECK(line.find_first_not_of("01") == std::string::npos);
    }
    CHECK(count == 3);
}

#endif  // DRG_CLI_PATH
