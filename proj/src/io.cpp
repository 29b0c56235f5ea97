#include "drg/io.hpp"

#include <algorithm>

namespace drg {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ValidationError("invalid hex digit");
}

std::vector<double> matrix_to_vec(const Eigen::MatrixXd& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

Eigen::MatrixXd vec_to_matrix(const std::vector<double>& v, int rows, int cols) {
    require(static_cast<int>(v.size()) == rows * cols,
            "serialized matrix has wrong size");
    Eigen::MatrixXd m(rows, cols);
    std::size_t idx = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = v[idx++];
    return m;
}

void reject_unknown(const json& j, std::initializer_list<const char*> fields) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(fields.begin(), fields.end(), [&](const char* f) {
                return key == f;
            }) == fields.end())
            throw ValidationError("unknown config field: " + key);
    }
}

}  // namespace

std::string bytes_to_hex(const std::vector<std::uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::vector<std::uint8_t> hex_to_bytes(const std::string& hex) {
    require(hex.size() % 2 == 0, "hex string must have even length");
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(hex_digit(hex[i]) * 16 +
                                                hex_digit(hex[i + 1])));
    return out;
}

// --- distributions -------------------------------------------------------

json to_json(const Permutation& p) { return json(p.map()); }

Permutation permutation_from_json(const json& j) {
    return Permutation(j.get<std::vector<int>>());
}

json to_json(const LGridDistribution& d) {
    return json{{"n", d.n},
                {"weights", matrix_to_vec(d.L)},
                {"sigma", to_json(d.sigma)}};
}

LGridDistribution lgrid_from_json(const json& j) {
    LGridDistribution d;
    d.n = j.at("n").get<int>();
    int h = d.n / 2;
    d.L = vec_to_matrix(j.at("weights").get<std::vector<double>>(), h + 1, h + 1);
    d.sigma = permutation_from_json(j.at("sigma"));
    d.validate();
    return d;
}

json to_json(const MixtureDistribution& d) {
    json comps = json::array();
    for (const auto& c : d.components)
        comps.push_back(json{{"weight", c.weight}, {"dist", to_json(c.dist)}});
    return json{{"components", comps}};
}

MixtureDistribution mixture_from_json(const json& j) {
    MixtureDistribution d;
    for (const auto& c : j.at("components"))
        d.components.push_back(
            {c.at("weight").get<double>(), lgrid_from_json(c.at("dist"))});
    d.validate();
    return d;
}

json to_json(const QuadraticMatrix& q) {
    return json{{"mu", std::vector<double>(q.mu.data(), q.mu.data() + q.mu.size())},
                {"M", matrix_to_vec(q.M)}};
}

QuadraticMatrix quadratic_from_json(const json& j) {
    QuadraticMatrix q;
    auto mu = j.at("mu").get<std::vector<double>>();
    int n = static_cast<int>(mu.size());
    q.mu = Eigen::Map<Eigen::VectorXd>(mu.data(), n);
    q.M = vec_to_matrix(j.at("M").get<std::vector<double>>(), n, n);
    return q;
}

// --- strategies ----------------------------------------------------------

json to_json(const Strategy& s) {
    if (const auto* t = std::get_if<TabulatedStrategy>(&s)) {
        json entries = json::array();
        for (const auto& [key, value] : t->table)
            entries.push_back(json::array(
                {static_cast<std::uint32_t>(key >> 32),
                 static_cast<std::uint32_t>(key & 0xffffffffu), value}));
        return json{{"type", "tabulated"},
                    {"n", t->n},
                    {"k", t->k},
                    {"fill_value", t->fill_value},
                    {"entries", entries}};
    }
    if (const auto* b = std::get_if<BilinearStrategy>(&s))
        return json{{"type", "bilinear"},
                    {"n", b->n},
                    {"k", b->k},
                    {"omega", matrix_to_vec(b->Omega)}};
    const auto& p = std::get<PartitionStrategy>(s);
    return json{{"type", "partition"},
                {"n", p.n},
                {"k", p.k},
                {"sigma_a", to_json(p.sigma_a)},
                {"sigma_b", to_json(p.sigma_b)}};
}

Strategy strategy_from_json(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "tabulated") {
        TabulatedStrategy t;
        t.n = j.at("n").get<int>();
        t.k = j.at("k").get<double>();
        t.fill_value = j.at("fill_value").get<double>();
        for (const auto& e : j.at("entries"))
            t.table.emplace(TabulatedStrategy::key(e.at(0).get<std::uint32_t>(),
                                                   e.at(1).get<std::uint32_t>()),
                            e.at(2).get<double>());
        return t;
    }
    if (type == "bilinear") {
        BilinearStrategy b;
        b.n = j.at("n").get<int>();
        b.k = j.at("k").get<double>();
        b.Omega = vec_to_matrix(j.at("omega").get<std::vector<double>>(), b.n, b.n);
        return b;
    }
    if (type == "partition") {
        PartitionStrategy p;
        p.n = j.at("n").get<int>();
        p.k = j.at("k").get<double>();
        p.sigma_a = permutation_from_json(j.at("sigma_a"));
        p.sigma_b = permutation_from_json(j.at("sigma_b"));
        return p;
    }
    throw ValidationError("unknown strategy type: " + type);
}

// --- reports -------------------------------------------------------------

json to_json(const GapEstimate& g) {
    const char* method = g.method == GapEstimate::Method::Exhaustive
                             ? "exhaustive"
                             : g.method == GapEstimate::Method::ClosedForm
                                   ? "closed_form"
                                   : "monte_carlo";
    return json{{"value", g.value},
                {"method", method},
                {"std_error", g.std_error},
                {"samples", g.samples}};
}

json to_json(const SearchOutcome& o) {
    return json{{"sigma", to_json(o.sigma)},
                {"objective", o.objective},
                {"reached_target", o.reached_target},
                {"steps", o.steps}};
}

json to_json(const StepRecord& r) {
    return json{{"m", r.m},
                {"objective_fast", r.objective_fast},
                {"objective_slow", r.objective_slow},
                {"reached_target", r.reached_target},
                {"repick_count", r.repick_count},
                {"mix_weight", r.mix_weight}};
}

json to_json(const ProtocolReport& r) {
    return json{{"rounds", r.rounds},
                {"pair_sq", r.pair_sq},
                {"pair_sq_err", r.pair_sq_err},
                {"adv_sq", r.adv_sq},
                {"adv_sq_err", r.adv_sq_err},
                {"advantage_ratio", r.advantage_ratio}};
}

// --- engine config -------------------------------------------------------

json to_json(const EngineConfig& c) {
    const char* method = c.method == Method::Bilinear
                             ? "bilinear"
                             : c.method == Method::Partition ? "partition"
                                                             : "combined";
    return json{{"n", c.n},
                {"k", c.k},
                {"alpha", c.alpha},
                {"theta_spread", c.theta_spread},
                {"maturity_factor", c.maturity_factor},
                {"method", method},
                {"mix_mode",
                 json{{"random", c.mix_mode.random},
                      {"alpha_mix", c.mix_mode.alpha_mix}}},
                {"seed", bytes_to_hex(c.seed)},
                {"target_multiple", c.target_multiple},
                {"restart_budget", c.restart_budget}};
}

EngineConfig config_from_json(const json& j) {
    reject_unknown(j, {"n", "k", "alpha", "theta_spread", "maturity_factor",
                       "method", "mix_mode", "seed", "target_multiple",
                       "restart_budget"});
    EngineConfig c;
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("k")) c.k = j.at("k").get<double>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("theta_spread"))
        c.theta_spread = j.at("theta_spread").get<double>();
    if (j.contains("maturity_factor"))
        c.maturity_factor = j.at("maturity_factor").get<double>();
    if (j.contains("method")) {
        std::string m = j.at("method").get<std::string>();
        if (m == "bilinear") c.method = Method::Bilinear;
        else if (m == "partition") c.method = Method::Partition;
        else if (m == "combined") c.method = Method::Combined;
        else throw ValidationError("config.method must be bilinear|partition|combined");
    }
    if (j.contains("mix_mode")) {
        const json& mm = j.at("mix_mode");
        reject_unknown(mm, {"random", "alpha_mix"});
        if (mm.contains("random")) c.mix_mode.random = mm.at("random").get<bool>();
        if (mm.contains("alpha_mix"))
            c.mix_mode.alpha_mix = mm.at("alpha_mix").get<double>();
    }
    if (j.contains("seed")) c.seed = hex_to_bytes(j.at("seed").get<std::string>());
    if (j.contains("target_multiple"))
        c.target_multiple = j.at("target_multiple").get<double>();
    if (j.contains("restart_budget"))
        c.restart_budget = j.at("restart_budget").get<int>();
    c.validate();
    return c;
}

std::uint64_t config_hash(const EngineConfig& c) {
    std::string canon = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : canon) {
        h ^= static_cast<std::uint8_t>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// --- checkpoints ---------------------------------------------------------

json checkpoint_to_json(const EngineState& st, const EngineConfig& c) {
    json digest = json::array();
    for (auto f : st.history_digest) digest.push_back(f);
    return json{{"m", st.m},
                {"phi_current", to_json(st.phi_current)},
                {"avg_moments", to_json(st.avg_moments)},
                {"avg_count", st.avg_count},
                {"rng_state_hex", st.rng.state_hex()},
                {"config_hash", config_hash(c)},
                {"config", to_json(c)},
                {"history_digest", digest}};
}

EngineConfig checkpoint_config(const json& j) {
    return config_from_json(j.at("config"));
}

EngineState checkpoint_from_json(const json& j, const EngineConfig& c) {
    require(j.at("config_hash").get<std::uint64_t>() == config_hash(c),
            "checkpoint: config hash mismatch");
    EngineState st;
    st.m = j.at("m").get<long>();
    st.phi_current = mixture_from_json(j.at("phi_current"));
    st.avg_moments = quadratic_from_json(j.at("avg_moments"));
    st.avg_count = j.at("avg_count").get<long>();
    st.rng = Rng::from_state_hex(j.at("rng_state_hex").get<std::string>());
    for (const auto& f : j.at("history_digest"))
        st.history_digest.push_back(f.get<std::uint64_t>());
    return st;
}

}  // namespace drg
