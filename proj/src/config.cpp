#include "dcmg/config.hpp"

#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dcmg {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

// Reads YAML maps field by field, tracking the dotted path for messages and
// rejecting keys nobody asked for.
class Reader {
public:
    Reader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (present() && !node_.IsMap()) fail(path_, "expected a mapping");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!present()) return;
        const YAML::Node v = node_[key];
        if (!v) return;
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            fail(where(key), "has the wrong type");
        }
    }

    YAML::Node child(const char* key) {
        seen_.insert(key);
        return present() ? node_[key] : YAML::Node();
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        if (!present()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) fail(where(key), "is not a known setting");
        }
    }

    [[noreturn]] static void fail(const std::string& field, const std::string& what) {
        throw std::invalid_argument(fmt::format("config: '{}' {}", field, what));
    }

private:
    // An absent key and an empty (null) section both keep the defaults.
    bool present() const { return node_ && !node_.IsNull(); }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

// Runs a validate() and prefixes its message with the section name.
template <class F>
void checked(const std::string& section, F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(fmt::format("config: {}: {}", section, e.what()));
    }
}

const char* method_name(Method m) { return m == Method::RK4 ? "rk4" : "dp45"; }

Method parse_method(const std::string& s, const std::string& field) {
    if (s == "rk4") return Method::RK4;
    if (s == "dp45") return Method::DormandPrince45;
    Reader::fail(field, "must be 'rk4' or 'dp45'");
}

}  // namespace

Outcome parse_outcome(const std::string& s) {
    if (s == "Stable" || s == "stable") return Outcome::Stable;
    if (s == "Unstable" || s == "unstable") return Outcome::Unstable;
    if (s == "Undecided" || s == "undecided") return Outcome::Undecided;
    throw std::invalid_argument(fmt::format("unknown outcome '{}'", s));
}

StrategyKind parse_strategy(const std::string& s) {
    if (s == "baseline") return StrategyKind::Baseline;
    if (s == "scheduled") return StrategyKind::Scheduled;
    throw std::invalid_argument(fmt::format("unknown strategy '{}' (baseline or scheduled)", s));
}

void RunConfig::validate() const {
    checked("plant", [&] { study.plant.validate(); });
    for (const auto& m : study.modes) {
        checked(fmt::format("modes[{}]", m.sigma), [&] { m.validate(); });
    }
    for (int s = 1; s <= 4; ++s) {
        if (study.modes[static_cast<std::size_t>(s - 1)].sigma != s) {
            throw std::invalid_argument("config: modes must be listed in order 1..4");
        }
    }
    checked("thresholds", [&] { study.thresholds.validate(); });
    checked("integrator", [&] { study.integrator.validate(); });
    checked("verdict", [&] { study.verdict.validate(); });
    std::set<std::string> ids;
    for (const auto& c : cases) {
        if (c.id.empty() || !ids.insert(c.id).second) {
            throw std::invalid_argument(fmt::format("config: case id '{}' is empty or repeated", c.id));
        }
        if (c.sigma_from < 1 || c.sigma_from > 4 || c.sigma_to < 1 || c.sigma_to > 4) {
            throw std::invalid_argument(fmt::format("config: case '{}' has a mode outside 1..4", c.id));
        }
        if (!(c.t_step > 0.0)) {
            throw std::invalid_argument(fmt::format("config: case '{}' needs t_step > 0", c.id));
        }
    }
    if (output_dir.empty()) throw std::invalid_argument("config: 'output_dir' must not be empty");
}

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument(fmt::format("config: YAML parse error: {}", e.what()));
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);

    RunConfig cfg;
    auto& st = cfg.study;
    Reader top(root, "");
    {
        Reader r(top.child("circuit"), "circuit");
        auto& c = st.plant.circuit;
        r.get("R_line", c.R_line);
        r.get("L_line", c.L_line);
        r.get("L_bat", c.L_bat);
        r.get("C_bat", c.C_bat);
        r.get("C_bus", c.C_bus);
        r.get("U_s", c.U_s);
        r.get("I_low", c.I_low);
        r.get("I_up", c.I_up);
        r.get("P_base", c.P_base);
        r.finish();
    }
    {
        Reader r(top.child("control"), "control");
        auto& k = st.plant.control;
        r.get("k_Pv", k.k_Pv);
        r.get("k_Iv", k.k_Iv);
        r.get("k_Pi", k.k_Pi);
        r.get("k_Ii", k.k_Ii);
        r.finish();
    }
    {
        Reader r(top.child("options"), "options");
        r.get("clamp_current_ref", st.plant.options.clamp_current_ref);
        r.get("duty_saturation", st.plant.options.duty_saturation);
        r.finish();
    }
    if (YAML::Node modes = top.child("modes")) {
        if (!modes.IsSequence() || modes.size() != 4) Reader::fail("modes", "must list exactly 4 modes");
        for (std::size_t i = 0; i < 4; ++i) {
            Reader r(modes[i], fmt::format("modes[{}]", i));
            auto& m = st.modes[i];
            r.get("sigma", m.sigma);
            r.get("U_ref", m.U_ref);
            r.get("R_d", m.R_d);
            r.finish();
        }
    }
    {
        Reader r(top.child("thresholds"), "thresholds");
        auto& t = st.thresholds;
        r.get("V_1", t.V_1);
        r.get("V_2", t.V_2);
        r.get("V_N", t.V_N);
        r.get("V_3", t.V_3);
        r.get("V_4", t.V_4);
        r.get("V_min", t.V_min);
        r.finish();
    }
    auto read_integrator = [](Reader& r, IntegratorConfig& ic) {
        std::string method = method_name(ic.method);
        r.get("method", method);
        ic.method = parse_method(method, r.where("method"));
        r.get("h_init", ic.h_init);
        r.get("h_min", ic.h_min);
        r.get("h_max", ic.h_max);
        r.get("rel_tol", ic.rel_tol);
        r.get("abs_tol", ic.abs_tol);
        r.get("event_time_tol", ic.event_time_tol);
        r.get("max_steps", ic.max_steps);
        r.finish();
    };
    auto read_verdict = [](Reader& r, VerdictConfig& vc) {
        r.get("v_collapse", vc.v_collapse);
        r.get("v_ceiling", vc.v_ceiling);
        r.get("band_v", vc.band_v);
        r.get("band_sv", vc.band_sv);
        r.get("sv_floor", vc.sv_floor);
        r.get("window", vc.window);
        r.get("horizon", vc.horizon);
        r.get("max_switches", vc.max_switches);
        r.finish();
    };
    {
        Reader r(top.child("integrator"), "integrator");
        read_integrator(r, st.integrator);
    }
    {
        Reader r(top.child("verdict"), "verdict");
        read_verdict(r, st.verdict);
    }
    {
        Reader r(top.child("roa"), "roa");
        auto& ro = st.roa;
        {
            Reader o(r.child("oracle_integrator"), "roa.oracle_integrator");
            read_integrator(o, ro.oracle_integrator);
        }
        {
            Reader o(r.child("oracle_verdict"), "roa.oracle_verdict");
            read_verdict(o, ro.oracle_verdict);
        }
        {
            Reader o(r.child("trace_integrator"), "roa.trace_integrator");
            read_integrator(o, ro.trace_integrator);
        }
        r.get("single_mode_v_collapse", ro.single_mode_v_collapse);
        r.get("seed_scale", ro.seed_scale);
        r.get("max_trace_time", ro.max_trace_time);
        r.get("max_trace_steps", ro.max_trace_steps);
        r.get("max_arc_length", ro.max_arc_length);
        r.finish();
    }
    if (YAML::Node cases = top.child("cases")) {
        if (!cases.IsSequence()) Reader::fail("cases", "must be a list");
        cfg.cases.clear();
        for (std::size_t i = 0; i < cases.size(); ++i) {
            Reader r(cases[i], fmt::format("cases[{}]", i));
            CaseSpec c;
            std::string expected = "Stable";
            std::string expected_sched;
            r.get("id", c.id);
            r.get("from", c.sigma_from);
            r.get("to", c.sigma_to);
            r.get("pe_before_pu", c.pe_before_pu);
            r.get("pe_after_pu", c.pe_after_pu);
            r.get("t_step", c.t_step);
            r.get("expected", expected);
            r.get("expected_scheduled", expected_sched);
            r.finish();
            try {
                c.expected = parse_outcome(expected);
                if (!expected_sched.empty()) c.expected_scheduled = parse_outcome(expected_sched);
            } catch (const std::invalid_argument& e) {
                Reader::fail(r.where("expected"), e.what());
            }
            cfg.cases.push_back(c);
        }
    }
    top.get("output_dir", cfg.output_dir);
    top.get("seed", cfg.seed);
    top.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(fmt::format("config: cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
    const auto& st = cfg.study;
    YAML::Emitter out;
    out << YAML::BeginMap;
    auto kv = [&](const char* k, double v) { out << YAML::Key << k << YAML::Value << num(v); };
    auto kvb = [&](const char* k, bool v) { out << YAML::Key << k << YAML::Value << v; };
    auto kvs = [&](const char* k, const std::string& v) { out << YAML::Key << k << YAML::Value << v; };
    auto kvu = [&](const char* k, std::uint64_t v) { out << YAML::Key << k << YAML::Value << v; };

    const auto& c = st.plant.circuit;
    out << YAML::Key << "circuit" << YAML::Value << YAML::BeginMap;
    kv("R_line", c.R_line);
    kv("L_line", c.L_line);
    kv("L_bat", c.L_bat);
    kv("C_bat", c.C_bat);
    kv("C_bus", c.C_bus);
    kv("U_s", c.U_s);
    kv("I_low", c.I_low);
    kv("I_up", c.I_up);
    kv("P_base", c.P_base);
    out << YAML::EndMap;

    const auto& k = st.plant.control;
    out << YAML::Key << "control" << YAML::Value << YAML::BeginMap;
    kv("k_Pv", k.k_Pv);
    kv("k_Iv", k.k_Iv);
    kv("k_Pi", k.k_Pi);
    kv("k_Ii", k.k_Ii);
    out << YAML::EndMap;

    out << YAML::Key << "options" << YAML::Value << YAML::BeginMap;
    kvb("clamp_current_ref", st.plant.options.clamp_current_ref);
    kvb("duty_saturation", st.plant.options.duty_saturation);
    out << YAML::EndMap;

    out << YAML::Key << "modes" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : st.modes) {
        out << YAML::Flow << YAML::BeginMap;
        kvu("sigma", static_cast<std::uint64_t>(m.sigma));
        kv("U_ref", m.U_ref);
        kv("R_d", m.R_d);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    const auto& t = st.thresholds;
    out << YAML::Key << "thresholds" << YAML::Value << YAML::BeginMap;
    kv("V_1", t.V_1);
    kv("V_2", t.V_2);
    kv("V_N", t.V_N);
    kv("V_3", t.V_3);
    kv("V_4", t.V_4);
    kv("V_min", t.V_min);
    out << YAML::EndMap;

    auto integ = [&](const char* key, const IntegratorConfig& ic) {
        out << YAML::Key << key << YAML::Value << YAML::BeginMap;
        kvs("method", method_name(ic.method));
        kv("h_init", ic.h_init);
        kv("h_min", ic.h_min);
        kv("h_max", ic.h_max);
        kv("rel_tol", ic.rel_tol);
        kv("abs_tol", ic.abs_tol);
        kv("event_time_tol", ic.event_time_tol);
        kvu("max_steps", ic.max_steps);
        out << YAML::EndMap;
    };
    auto verd = [&](const char* key, const VerdictConfig& vc) {
        out << YAML::Key << key << YAML::Value << YAML::BeginMap;
        kv("v_collapse", vc.v_collapse);
        kv("v_ceiling", vc.v_ceiling);
        kv("band_v", vc.band_v);
        kv("band_sv", vc.band_sv);
        kv("sv_floor", vc.sv_floor);
        kv("window", vc.window);
        kv("horizon", vc.horizon);
        kvu("max_switches", vc.max_switches);
        out << YAML::EndMap;
    };
    integ("integrator", st.integrator);
    verd("verdict", st.verdict);

    const auto& ro = st.roa;
    out << YAML::Key << "roa" << YAML::Value << YAML::BeginMap;
    integ("oracle_integrator", ro.oracle_integrator);
    verd("oracle_verdict", ro.oracle_verdict);
    integ("trace_integrator", ro.trace_integrator);
    kv("single_mode_v_collapse", ro.single_mode_v_collapse);
    kv("seed_scale", ro.seed_scale);
    kv("max_trace_time", ro.max_trace_time);
    kvu("max_trace_steps", ro.max_trace_steps);
    kv("max_arc_length", ro.max_arc_length);
    out << YAML::EndMap;

    out << YAML::Key << "cases" << YAML::Value << YAML::BeginSeq;
    for (const auto& cs : cfg.cases) {
        out << YAML::Flow << YAML::BeginMap;
        kvs("id", cs.id);
        kvu("from", static_cast<std::uint64_t>(cs.sigma_from));
        kvu("to", static_cast<std::uint64_t>(cs.sigma_to));
        kv("pe_before_pu", cs.pe_before_pu);
        kv("pe_after_pu", cs.pe_after_pu);
        kv("t_step", cs.t_step);
        kvs("expected", to_string(cs.expected));
        if (cs.expected_scheduled) kvs("expected_scheduled", to_string(*cs.expected_scheduled));
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    kvs("output_dir", cfg.output_dir);
    kvu("seed", cfg.seed);
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

}  // namespace dcmg
