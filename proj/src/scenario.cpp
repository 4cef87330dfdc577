#include "qtank/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace qtank::scenario {

namespace {

struct Entry {
    int line = 0;
    std::string key;
    std::string value;
};

using Section = std::vector<Entry>;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"plant", {"A1", "A2", "A3", "A4", "a1", "a2", "a3", "a4", "k_c", "g"}},
        {"operating_point",
         {"phase", "h0_1", "h0_2", "h0_3", "h0_4", "v0_1", "v0_2", "k_pump_1", "k_pump_2",
          "gamma_1", "gamma_2"}},
        {"control", {"K1", "Ti1", "K2", "Ti2"}},
        {"setpoints", {"step"}},
        {"observer", {"nodes", "gamma", "eps_bar", "k_1", "k_2", "L1", "L2", "edge"}},
        {"sim", {"dt", "t_end", "x0", "nonlinear", "observer_feedforward"}},
    };
    return keys;
}

bool is_repeatable(const std::string& key) { return key == "step" || key == "edge"; }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_parse(int line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_validation(const std::string& field, const std::string& constraint) {
    throw ValidationError(field + ": " + constraint);
}

double parse_double(const Entry& e, const std::string& token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        fail_parse(e.line, "'" + e.key + "': not a number: '" + token + "'");
    }
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::vector<double> parse_doubles(const Entry& e, std::size_t expected) {
    const auto toks = split_ws(e.value);
    if (expected != 0 && toks.size() != expected) {
        fail_parse(e.line, "'" + e.key + "': expected " + std::to_string(expected) +
                               " values, got " + std::to_string(toks.size()));
    }
    std::vector<double> out;
    for (const auto& t : toks) out.push_back(parse_double(e, t));
    return out;
}

bool parse_bool(const Entry& e) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail_parse(e.line, "'" + e.key + "': expected true or false, got '" + e.value + "'");
}

std::map<std::string, Section> tokenize(const std::string& text) {
    std::map<std::string, Section> sections;
    std::istringstream is(text);
    std::string raw;
    std::string current;
    std::map<std::string, std::set<std::string>> seen;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail_parse(line_no, "malformed section header");
            current = line.substr(1, line.size() - 2);
            if (!known_keys().count(current)) {
                fail_parse(line_no, "unknown section '" + current + "'");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_parse(line_no, "expected key = value");
        if (current.empty()) fail_parse(line_no, "key outside any section");
        Entry e{line_no, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
        if (!known_keys().at(current).count(e.key)) {
            fail_parse(line_no, "unknown key '" + e.key + "' in section [" + current + "]");
        }
        if (!is_repeatable(e.key) && !seen[current].insert(e.key).second) {
            fail_parse(line_no, "duplicate key '" + e.key + "'");
        }
        sections[current].push_back(std::move(e));
    }
    return sections;
}

const Entry* find(const Section* sec, const std::string& key) {
    if (!sec) return nullptr;
    for (const auto& e : *sec) {
        if (e.key == key) return &e;
    }
    return nullptr;
}

void validate_config(const sim::SimConfig& cfg) {
    for (std::size_t i = 0; i < 4; ++i) {
        if (cfg.geometry.upper_area[i] <= 0.0) fail_validation("A" + std::to_string(i + 1), "must be > 0");
        if (cfg.geometry.outlet_area[i] <= 0.0) fail_validation("a" + std::to_string(i + 1), "must be > 0");
        if (cfg.geometry.outlet_area[i] >= cfg.geometry.upper_area[i]) {
            fail_validation("a" + std::to_string(i + 1), "must be < A" + std::to_string(i + 1));
        }
        if (cfg.op.h0[i] <= 0.0) fail_validation("h0_" + std::to_string(i + 1), "must be > 0");
    }
    if (cfg.geometry.sensor_gain <= 0.0) fail_validation("k_c", "must be > 0");
    if (cfg.geometry.gravity <= 0.0) fail_validation("g", "must be > 0");
    for (std::size_t n = 0; n < 2; ++n) {
        if (cfg.op.pump_gain[n] <= 0.0) fail_validation("k_pump_" + std::to_string(n + 1), "must be > 0");
        if (cfg.op.valve_ratio[n] < 0.0 || cfg.op.valve_ratio[n] > 1.0) {
            fail_validation("gamma_" + std::to_string(n + 1), "must lie in [0, 1]");
        }
        if (cfg.pi_gains[n].Ti == 0.0) fail_validation("Ti" + std::to_string(n + 1), "must be nonzero");
    }
    try {
        control::validate(cfg.schedule);
    } catch (const std::invalid_argument& e) {
        fail_validation("setpoints", e.what());
    }
    if (cfg.dt <= 0.0) fail_validation("dt", "must be > 0");
    if (cfg.t_end < cfg.dt) fail_validation("t_end", "must be >= dt");
    if (cfg.observer.n_nodes != 1 && cfg.observer.n_nodes != 2) {
        fail_validation("nodes", "must be 1 or 2 (two measured outputs to partition)");
    }
    if (cfg.observer.eps_bar <= 0.0 || cfg.observer.eps_bar > std::sqrt(2.0)) {
        fail_validation("eps_bar", "must lie in (0, sqrt(2)]");
    }
    for (std::size_t i = 0; i < cfg.observer.k_weight.size(); ++i) {
        if (cfg.observer.k_weight[i] < 1.0) {
            fail_validation("k_" + std::to_string(i + 1), "must be >= 1");
        }
    }
    for (const auto& [a, b] : cfg.observer.edges) {
        if (a >= cfg.observer.n_nodes || b >= cfg.observer.n_nodes || a == b) {
            fail_validation("edge", "endpoints must be distinct nodes in 1..nodes");
        }
    }
}

} // namespace

sim::SimConfig parse_scenario(const std::string& text, const Overrides& overrides) {
    const auto sections = tokenize(text);
    auto sec = [&](const char* name) -> const Section* {
        const auto it = sections.find(name);
        return it == sections.end() ? nullptr : &it->second;
    };

    // the phase decides the defaults for everything else
    plant::Phase phase = plant::Phase::Minus;
    if (const Entry* e = find(sec("operating_point"), "phase")) {
        if (e->value == "minus") phase = plant::Phase::Minus;
        else if (e->value == "plus") phase = plant::Phase::Plus;
        else fail_parse(e->line, "phase must be 'minus' or 'plus'");
    }
    if (overrides.phase) phase = *overrides.phase;

    sim::SimConfig cfg = sim::default_config(phase);

    if (const Section* s = sec("plant")) {
        for (const auto& e : *s) {
            const double v = parse_double(e, e.value);
            if (e.key == "k_c") cfg.geometry.sensor_gain = v;
            else if (e.key == "g") cfg.geometry.gravity = v;
            else if (e.key[0] == 'A') cfg.geometry.upper_area[e.key[1] - '1'] = v;
            else cfg.geometry.outlet_area[e.key[1] - '1'] = v;
        }
    }
    if (const Section* s = sec("operating_point")) {
        for (const auto& e : *s) {
            if (e.key == "phase") continue;
            const double v = parse_double(e, e.value);
            if (e.key.rfind("h0_", 0) == 0) cfg.op.h0[e.key[3] - '1'] = v;
            else if (e.key.rfind("v0_", 0) == 0) cfg.op.v0[e.key[3] - '1'] = v;
            else if (e.key.rfind("k_pump_", 0) == 0) cfg.op.pump_gain[e.key[7] - '1'] = v;
            else cfg.op.valve_ratio[e.key[6] - '1'] = v;
        }
    }
    if (const Section* s = sec("control")) {
        for (const auto& e : *s) {
            const double v = parse_double(e, e.value);
            if (e.key == "K1") cfg.pi_gains[0].K = v;
            else if (e.key == "Ti1") cfg.pi_gains[0].Ti = v;
            else if (e.key == "K2") cfg.pi_gains[1].K = v;
            else cfg.pi_gains[1].Ti = v;
        }
    }
    if (const Section* s = sec("setpoints")) {
        cfg.schedule.entries.clear();
        for (const auto& e : *s) {
            const auto vals = parse_doubles(e, 3);
            cfg.schedule.entries.push_back({vals[0], vals[1], vals[2]});
        }
    }
    if (const Section* s = sec("observer")) {
        // resolve the node count first; the per-node keys depend on it
        if (const Entry* e = find(s, "nodes")) {
            const double v = parse_double(*e, e->value);
            if (v != std::floor(v) || v < 1.0) fail_parse(e->line, "nodes must be a positive integer");
            cfg.observer.n_nodes = static_cast<std::size_t>(v);
            cfg.observer.k_weight.resize(cfg.observer.n_nodes, 1.0);
            cfg.observer.l_given.resize(cfg.observer.n_nodes);
            if (cfg.observer.n_nodes == 1) {
                cfg.observer.edges.clear();
                cfg.observer.l_given = {{}}; // single-output gains do not transfer to the merged node; use placement
            }
        }
        bool edges_given = false;
        for (const auto& e : *s) {
            if (e.key == "nodes") {
                continue;
            } else if (e.key == "gamma") {
                cfg.observer.gamma_coupling = parse_double(e, e.value);
            } else if (e.key == "eps_bar") {
                cfg.observer.eps_bar = parse_double(e, e.value);
            } else if (e.key == "k_1" || e.key == "k_2") {
                const std::size_t idx = e.key[2] - '1';
                if (idx >= cfg.observer.k_weight.size()) {
                    fail_parse(e.line, "'" + e.key + "': node index exceeds nodes");
                }
                cfg.observer.k_weight[idx] = parse_double(e, e.value);
            } else if (e.key == "L1" || e.key == "L2") {
                const std::size_t idx = e.key[1] - '1';
                if (idx >= cfg.observer.l_given.size()) {
                    fail_parse(e.line, "'" + e.key + "': node index exceeds nodes");
                }
                if (e.value == "auto") {
                    cfg.observer.l_given[idx].clear();
                } else {
                    cfg.observer.l_given[idx] = parse_doubles(e, 0);
                }
            } else { // edge
                if (!edges_given) {
                    cfg.observer.edges.clear();
                    edges_given = true;
                }
                const auto vals = parse_doubles(e, 2);
                if (vals[0] < 1 || vals[1] < 1 || vals[0] != std::floor(vals[0]) ||
                    vals[1] != std::floor(vals[1])) {
                    fail_parse(e.line, "edge endpoints must be 1-based node indices");
                }
                cfg.observer.edges.emplace_back(static_cast<std::size_t>(vals[0]) - 1,
                                                static_cast<std::size_t>(vals[1]) - 1);
            }
        }
    }
    if (const Section* s = sec("sim")) {
        for (const auto& e : *s) {
            if (e.key == "dt") cfg.dt = parse_double(e, e.value);
            else if (e.key == "t_end") cfg.t_end = parse_double(e, e.value);
            else if (e.key == "nonlinear") cfg.nonlinear_plant = parse_bool(e);
            else if (e.key == "observer_feedforward") cfg.observer_feedforward = parse_bool(e);
            else {
                const auto vals = parse_doubles(e, 4);
                for (std::size_t i = 0; i < 4; ++i) cfg.x0_deviation[i] = vals[i];
            }
        }
    }

    if (overrides.dt) cfg.dt = *overrides.dt;
    if (overrides.t_end) cfg.t_end = *overrides.t_end;

    validate_config(cfg);
    return cfg;
}

std::string emit_scenario(const sim::SimConfig& cfg) {
    std::ostringstream os;
    os.precision(17);

    os << "[plant]\n";
    for (std::size_t i = 0; i < 4; ++i) {
        os << "A" << i + 1 << " = " << cfg.geometry.upper_area[i] << "\n";
    }
    for (std::size_t i = 0; i < 4; ++i) {
        os << "a" << i + 1 << " = " << cfg.geometry.outlet_area[i] << "\n";
    }
    os << "k_c = " << cfg.geometry.sensor_gain << "\n";
    os << "g = " << cfg.geometry.gravity << "\n";

    os << "\n[operating_point]\n";
    os << "phase = " << (cfg.op.phase_label == plant::Phase::Minus ? "minus" : "plus") << "\n";
    for (std::size_t i = 0; i < 4; ++i) os << "h0_" << i + 1 << " = " << cfg.op.h0[i] << "\n";
    for (std::size_t i = 0; i < 2; ++i) os << "v0_" << i + 1 << " = " << cfg.op.v0[i] << "\n";
    for (std::size_t i = 0; i < 2; ++i) {
        os << "k_pump_" << i + 1 << " = " << cfg.op.pump_gain[i] << "\n";
    }
    for (std::size_t i = 0; i < 2; ++i) {
        os << "gamma_" << i + 1 << " = " << cfg.op.valve_ratio[i] << "\n";
    }

    os << "\n[control]\n";
    os << "K1 = " << cfg.pi_gains[0].K << "\nTi1 = " << cfg.pi_gains[0].Ti << "\n";
    os << "K2 = " << cfg.pi_gains[1].K << "\nTi2 = " << cfg.pi_gains[1].Ti << "\n";

    os << "\n[setpoints]\n";
    for (const auto& e : cfg.schedule.entries) {
        os << "step = " << e.t_start << " " << e.r1 << " " << e.r2 << "\n";
    }

    os << "\n[observer]\n";
    os << "nodes = " << cfg.observer.n_nodes << "\n";
    os << "gamma = " << cfg.observer.gamma_coupling << "\n";
    os << "eps_bar = " << cfg.observer.eps_bar << "\n";
    for (std::size_t i = 0; i < cfg.observer.k_weight.size(); ++i) {
        os << "k_" << i + 1 << " = " << cfg.observer.k_weight[i] << "\n";
    }
    for (std::size_t i = 0; i < cfg.observer.l_given.size(); ++i) {
        os << "L" << i + 1 << " = ";
        if (cfg.observer.l_given[i].empty()) {
            os << "auto";
        } else {
            for (std::size_t j = 0; j < cfg.observer.l_given[i].size(); ++j) {
                os << (j ? " " : "") << cfg.observer.l_given[i][j];
            }
        }
        os << "\n";
    }
    for (const auto& [a, b] : cfg.observer.edges) {
        os << "edge = " << a + 1 << " " << b + 1 << "\n";
    }

    os << "\n[sim]\n";
    os << "dt = " << cfg.dt << "\n";
    os << "t_end = " << cfg.t_end << "\n";
    os << "x0 =";
    for (double v : cfg.x0_deviation) os << " " << v;
    os << "\n";
    os << "nonlinear = " << (cfg.nonlinear_plant ? "true" : "false") << "\n";
    os << "observer_feedforward = " << (cfg.observer_feedforward ? "true" : "false") << "\n";
    return os.str();
}

} // namespace qtank::scenario
