#include <CLI11.hpp>
#include <Eigen/Core>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "drg/acceptance.hpp"
#include "drg/io.hpp"

namespace {

using namespace drg;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw ValidationError("cannot open output file: " + path);
    return file;
}

void apply_thread_cap() {
    if (const char* env = std::getenv("DRG_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) Eigen::setNbThreads(t);
    }
}

EngineConfig load_config(const std::string& path, const std::string& seed_hex) {
    json j = load_json(path);
    if (!seed_hex.empty()) j["seed"] = seed_hex;
    return config_from_json(j);
}

int cmd_run(const std::string& config_path, const std::string& seed_hex,
            long steps, const std::string& out_path,
            const std::string& format) {
    if (steps < 1) throw ValidationError("run: --steps must be >= 1");
    EngineConfig config = load_config(config_path, seed_hex);
    EngineState state = init(config);

    bool csv = format == "csv";
    if (csv)
        std::cout << "m,objective_fast,objective_slow,reached_target,"
                     "repick_count,mix_weight\n";

    auto t0 = std::chrono::steady_clock::now();
    double objective_sum = 0.0;
    long defeats = 0;
    for (long t = 0; t < steps; ++t) {
        StepRecord rec = step(state, config);
        objective_sum += rec.objective_slow;
        if (rec.reached_target) ++defeats;
        if (csv)
            std::cout << rec.m << ',' << rec.objective_fast << ','
                      << rec.objective_slow << ',' << (rec.reached_target ? 1 : 0)
                      << ',' << rec.repick_count << ',' << rec.mix_weight
                      << '\n';
        else
            std::cout << to_json(rec).dump() << '\n';
    }
    double wall_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ValidationError("cannot open output file: " + out_path);
        out << checkpoint_to_json(state, config).dump(2) << '\n';
    }

    json report{{"config", to_json(config)},
                {"checkpoint", out_path},
                {"summary",
                 {{"steps", steps},
                  {"mean_objective", objective_sum / static_cast<double>(steps)},
                  {"defeat_rate",
                   static_cast<double>(defeats) / static_cast<double>(steps)},
                  {"wall_s", wall_s}}}};
    std::cerr << report.dump() << '\n';
    return 0;
}

int cmd_emit(const std::string& checkpoint_path, long count,
             const std::string& seed_hex, const std::string& out_path) {
    if (count < 1) throw ValidationError("emit: --count must be >= 1");
    json j = load_json(checkpoint_path);
    EngineConfig config = checkpoint_config(j);
    EngineState state = checkpoint_from_json(j, config);
    Rng rng = seed_hex.empty() ? state.rng.split("emit")
                               : Rng::from_bytes(hex_to_bytes(seed_hex));

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    for (long t = 0; t < count; ++t) {
        ParamVector x = emit(state, config, rng);
        std::string line(x.size(), '0');
        for (std::size_t s = 0; s < x.size(); ++s)
            if (x[s] > 0.5) line[s] = '1';
        out << line << '\n';
    }
    return 0;
}

int cmd_protocol_sim(const std::string& config_path,
                     const std::string& seed_hex, long rounds,
                     const std::string& adversary_name,
                     const std::string& out_path) {
    EngineConfig config = load_config(config_path, seed_hex);
    AdversaryKind adversary;
    if (adversary_name == "oracle") adversary = AdversaryKind::Oracle;
    else if (adversary_name == "bilinear") adversary = AdversaryKind::Bilinear;
    else if (adversary_name == "partition") adversary = AdversaryKind::Partition;
    else if (adversary_name == "constant") adversary = AdversaryKind::Constant;
    else throw ValidationError("invalid adversary name: " + adversary_name);

    ProtocolReport rep = protocol_sim(config, rounds, adversary);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << to_json(rep).dump(2) << '\n';
    return 0;
}

int cmd_verify(const std::string& level_name, bool tamper) {
    VerifyOptions opts;
    if (level_name == "fast") opts.level = VerifyLevel::Fast;
    else if (level_name == "full") opts.level = VerifyLevel::Full;
    else throw ValidationError("verify: --level must be fast or full");
    opts.tamper = tamper;

    std::vector<CheckResult> results = run_acceptance(opts, std::cout);
    long failures = 0;
    for (const auto& r : results)
        if (!r.pass) ++failures;
    std::cout << results.size() - failures << "/" << results.size()
              << " checks passed\n";
    return failures == 0 ? 0 : 3;
}

int cmd_bench(std::vector<int> sizes, const std::string& method_name,
              const std::string& seed_hex, const std::string& out_path) {
    Method method;
    if (method_name == "bilinear") method = Method::Bilinear;
    else if (method_name == "partition") method = Method::Partition;
    else throw ValidationError("bench: --method must be bilinear or partition");
    if (sizes.empty())
        sizes = method == Method::Bilinear
                    ? std::vector<int>{32, 64, 128, 256}
                    : std::vector<int>{64, 128, 256, 512, 1024};

    Rng rng = seed_hex.empty() ? Rng(0xbe7c4ed5ULL)
                               : Rng::from_bytes(hex_to_bytes(seed_hex));
    std::vector<BenchRow> rows = run_bench(sizes, method, rng);

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "n,method,fit_ms,search_ms,total_ms\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.method << ',' << r.fit_ms << ',' << r.search_ms
            << ',' << r.total_ms << '\n';
    std::cerr << "exploration log-log slope: " << loglog_slope(rows) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep random generator workbench"};
    app.require_subcommand(1);

    std::string config_path, seed_hex, out_path, format = "json";
    long steps = 0;

    CLI::App* run = app.add_subcommand("run", "Run the engine and checkpoint");
    run->add_option("--config", config_path, "Engine config JSON")->required();
    run->add_option("--seed", seed_hex, "Seed override (hex)");
    run->add_option("--steps", steps, "Number of steps")->required();
    run->add_option("--out", out_path, "Checkpoint output path");
    run->add_option("--format", format, "Step-log format: json|csv");

    long count = 1;
    std::string checkpoint_path;
    CLI::App* emit_cmd = app.add_subcommand("emit", "Emit parameter vectors");
    emit_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint JSON")
        ->required();
    emit_cmd->add_option("--count", count, "Number of vectors");
    emit_cmd->add_option("--seed", seed_hex, "Emission seed (hex)");
    emit_cmd->add_option("--out", out_path, "Output path (default stdout)");

    long rounds = 10000;
    std::string adversary = "bilinear";
    CLI::App* sim = app.add_subcommand("protocol-sim",
                                       "Two-party protocol with eavesdropper");
    sim->add_option("--config", config_path, "Engine config JSON")->required();
    sim->add_option("--seed", seed_hex, "Seed override (hex)");
    sim->add_option("--rounds", rounds, "Monte Carlo rounds");
    sim->add_option("--adversary", adversary,
                    "oracle|bilinear|partition|constant");
    sim->add_option("--out", out_path, "Output path (default stdout)");

    std::string level = "full";
    bool tamper = false;
    CLI::App* verify = app.add_subcommand("verify", "Run verification checks");
    verify->add_option("--level", level, "fast|full");
    verify->add_flag("--tamper", tamper)->group("");  // falsifiability fixture

    std::vector<int> sizes;
    std::string method = "partition";
    CLI::App* bench = app.add_subcommand("bench", "Benchmark fit + search");
    bench->add_option("--sizes", sizes, "Problem sizes (even, >= 6)");
    bench->add_option("--method", method, "bilinear|partition");
    bench->add_option("--seed", seed_hex, "Bench seed (hex)");
    bench->add_option("--out", out_path, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        apply_thread_cap();
        if (run->parsed())
            return cmd_run(config_path, seed_hex, steps, out_path, format);
        if (emit_cmd->parsed())
            return cmd_emit(checkpoint_path, count, seed_hex, out_path);
        if (sim->parsed())
            return cmd_protocol_sim(config_path, seed_hex, rounds, adversary,
                                    out_path);
        if (verify->parsed()) return cmd_verify(level, tamper);
        if (bench->parsed())
            return cmd_bench(sizes, method, seed_hex, out_path);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
