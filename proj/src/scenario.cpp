#include "transactive/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "transactive/errors.hpp"

namespace transactive {

namespace {

std::string at_line(const YAML::Node& node) {
    const auto mark = node.Mark();
    if (mark.line < 0) return "";
    return fmt::format("line {}: ", mark.line + 1);
}

class Reader {
public:
    std::vector<std::string> issues;

    void issue(const YAML::Node& where, const std::string& msg) { issues.push_back(at_line(where) + msg); }

    void only_keys(const YAML::Node& map, std::initializer_list<const char*> allowed,
                   const std::string& what) {
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; })) {
                issue(kv.first, fmt::format("{}: unknown key '{}'", what, key));
            }
        }
    }

    std::optional<double> number(const YAML::Node& map, const char* key, const std::string& what,
                                 bool required = true) {
        const YAML::Node n = map[key];
        if (!n) {
            if (required) issue(map, fmt::format("{}: missing '{}'", what, key));
            return std::nullopt;
        }
        if (!n.IsScalar()) {
            issue(n, fmt::format("{}: '{}' must be a number", what, key));
            return std::nullopt;
        }
        try {
            const double v = n.as<double>();
            if (!std::isfinite(v)) throw YAML::BadConversion(n.Mark());
            return v;
        } catch (const YAML::BadConversion&) {
            issue(n, fmt::format("{}: '{}' must be a finite number, got '{}'", what, key, n.Scalar()));
            return std::nullopt;
        }
    }

    std::optional<std::int64_t> integer(const YAML::Node& n, const std::string& what) {
        if (!n.IsScalar()) {
            issue(n, what + " must be an integer");
            return std::nullopt;
        }
        try {
            return n.as<std::int64_t>();
        } catch (const YAML::BadConversion&) {
            issue(n, fmt::format("{} must be an integer, got '{}'", what, n.Scalar()));
            return std::nullopt;
        }
    }

    std::optional<AgentId> agent_id(const YAML::Node& n, const std::string& what) {
        auto v = integer(n, what);
        if (!v) return std::nullopt;
        if (*v <= 0 || *v > std::numeric_limits<std::uint32_t>::max()) {
            issue(n, fmt::format("{} must be a positive integer, got {}", what, *v));
            return std::nullopt;
        }
        return AgentId(static_cast<std::uint32_t>(*v));
    }

    std::optional<AgentState> agent(const YAML::Node& n) {
        if (!n.IsMap()) {
            issue(n, "agent entry must be a mapping");
            return std::nullopt;
        }
        std::optional<AgentId> id;
        if (n["id"]) {
            id = agent_id(n["id"], "agent id");
        } else {
            issue(n, "agent: missing 'id'");
        }
        const std::string what = id ? "agent " + to_string(*id) : "agent";
        std::string kind;
        if (!n["kind"] || !n["kind"].IsScalar()) {
            issue(n, what + ": missing 'kind'");
            return std::nullopt;
        }
        kind = n["kind"].as<std::string>();
        const bool generator = kind == "generator";
        if (!generator && kind != "consumer") {
            issue(n["kind"], fmt::format("{}: kind must be generator or consumer, got '{}'", what, kind));
            return std::nullopt;
        }
        if (generator) {
            only_keys(n, {"id", "kind", "cost", "p_min", "p_max", "rate_min", "rate_max", "initial_power"}, what);
        } else {
            only_keys(n, {"id", "kind", "value", "p_min", "p_max", "rate_min", "rate_max", "base_load",
                          "initial_power"},
                      what);
        }
        auto coef = number(n, generator ? "cost" : "value", what);
        auto p_min = number(n, "p_min", what);
        auto p_max = number(n, "p_max", what);
        auto t_min = number(n, "rate_min", what);
        auto t_max = number(n, "rate_max", what);
        auto base = generator ? std::optional<double>(0.0) : number(n, "base_load", what, false);
        auto power = number(n, "initial_power", what);
        if (!id || !coef || !p_min || !p_max || !t_min || !t_max || !power) return std::nullopt;

        AgentState state = generator
            ? make_generator(*id, GeneratorParams{*coef, *p_min, *p_max, *t_min, *t_max}, *power)
            : make_consumer(*id, ConsumerParams{*coef, *p_min, *p_max, *t_min, *t_max, base.value_or(0.0)},
                            *power);
        for (const auto& s : validate(state)) issue(n, what + ": " + s);
        return state;
    }

    std::vector<Edge> edges(const YAML::Node& n, const std::string& what) {
        std::vector<Edge> out;
        if (!n.IsSequence()) {
            issue(n, what + " must be a list of [a, b] pairs");
            return out;
        }
        for (const auto& e : n) {
            if (!e.IsSequence() || e.size() != 2) {
                issue(e, what + ": each edge must be a pair [a, b]");
                continue;
            }
            auto a = agent_id(e[0], "edge endpoint");
            auto b = agent_id(e[1], "edge endpoint");
            if (!a || !b) continue;
            if (*a == *b) {
                issue(e, fmt::format("{}: self-loop on agent {}", what, a->value));
                continue;
            }
            out.emplace_back(std::min(*a, *b), std::max(*a, *b));
        }
        return out;
    }
};

struct Labels {
    std::vector<std::string> agents;
    std::vector<std::string> events;
    std::string edges;
};

// Overlapping achievable demand and generation ranges.
void check_feasible(const std::map<AgentId, AgentState>& agents, const std::string& where,
                    std::vector<std::string>& issues) {
    double d_lo = 0, d_hi = 0, g_lo = 0, g_hi = 0;
    std::size_t generators = 0, consumers = 0;
    for (const auto& [id, a] : agents) {
        if (a.is_generator()) {
            ++generators;
            g_lo += a.p_min();
            g_hi += a.p_max();
        } else {
            ++consumers;
            d_lo += a.p_min() + a.base_load();
            d_hi += a.p_max() + a.base_load();
        }
    }
    if (generators == 0) issues.push_back(where + "at least one generator is required");
    if (consumers == 0) issues.push_back(where + "at least one consumer is required");
    if (generators && consumers && (d_hi < g_lo || d_lo > g_hi)) {
        issues.push_back(fmt::format("{}demand range [{}, {}] does not overlap generation range [{}, {}]",
                                     where, d_lo, d_hi, g_lo, g_hi));
    }
}

std::vector<std::string> semantic_checks(const Scenario& s, const Labels& labels) {
    std::vector<std::string> issues;
    if (s.format_version != 1) issues.push_back(fmt::format("unsupported format_version {}", s.format_version));
    if (!(s.alpha0 > 0)) issues.push_back("alpha0 must be positive");
    if (!(s.epsilon >= 0)) issues.push_back("epsilon must be >= 0");
    if (s.fixed_price && !(*s.fixed_price > 0)) issues.push_back("fixed_price must be positive");
    if (s.agents.empty()) issues.push_back("no agents");

    std::map<AgentId, AgentState> live;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        const auto& a = s.agents[i];
        const std::string& where = labels.agents.at(i);
        for (const auto& msg : validate(a)) issues.push_back(where + "agent " + to_string(a.id) + ": " + msg);
        if (!live.emplace(a.id, a).second) issues.push_back(where + "duplicate agent id " + to_string(a.id));
    }
    if (live.empty()) return issues;
    check_feasible(live, "", issues);

    std::set<AgentId> nodes;
    for (const auto& [id, a] : live) nodes.insert(id);
    Topology topology;
    try {
        std::set<Edge> unique;
        for (const auto& e : s.edges) {
            if (!unique.insert(e).second) {
                issues.push_back(fmt::format("{}duplicate edge [{}, {}]", labels.edges, e.first.value, e.second.value));
            }
        }
        topology = Topology(nodes, s.edges);
        if (!is_connected(topology)) issues.push_back(labels.edges + "communication graph is disconnected");
    } catch (const Error& e) {
        issues.push_back(labels.edges + e.what());
        return issues;
    }

    std::vector<std::size_t> order(s.events.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return s.events[x].at_iteration < s.events[y].at_iteration;
    });
    for (std::size_t i : order) {
        const auto& ev = s.events[i];
        const std::string& where = labels.events.at(i);
        if (ev.at_iteration < 1) issues.push_back(where + "event iteration must be >= 1");
        if (ev.at_iteration >= s.max_iterations) {
            issues.push_back(fmt::format("{}event at {} is never reached (max_iterations {})", where,
                                         ev.at_iteration, s.max_iterations));
        }
        if (const auto* b = std::get_if<BaseLoadSet>(&ev.action)) {
            auto it = live.find(b->consumer);
            if (it == live.end()) {
                issues.push_back(where + "base_load names unknown agent " + to_string(b->consumer));
            } else if (it->second.is_generator()) {
                issues.push_back(where + "base_load names generator " + to_string(b->consumer));
            } else if (!(b->watts >= 0)) {
                issues.push_back(where + "base_load watts must be >= 0");
            } else {
                std::get<ConsumerParams>(it->second.params).base_load = b->watts;
                check_feasible(live, where, issues);
            }
        } else if (const auto* j = std::get_if<Join>(&ev.action)) {
            const AgentId id = j->agent.id;
            for (const auto& msg : validate(j->agent)) {
                issues.push_back(where + "joining agent " + to_string(id) + ": " + msg);
            }
            if (live.contains(id)) {
                issues.push_back(where + "joining agent " + to_string(id) + " is already present");
                continue;
            }
            bool edges_ok = true;
            for (const auto& [a, b] : j->edges) {
                if (a != id && b != id) {
                    issues.push_back(fmt::format("{}join edge [{}, {}] does not touch agent {}", where,
                                                 a.value, b.value, id.value));
                    edges_ok = false;
                }
            }
            if (!edges_ok) continue;
            try {
                topology = topology.with_agent(id, j->edges);
            } catch (const Error& e) {
                issues.push_back(where + e.what());
                continue;
            }
            live.emplace(id, j->agent);
            if (!is_connected(topology)) {
                issues.push_back(where + "join of agent " + to_string(id) + " leaves the graph disconnected");
            }
            check_feasible(live, where, issues);
        } else {
            const auto& l = std::get<Leave>(ev.action);
            if (l.agents.empty()) issues.push_back(where + "leave lists no agents");
            std::vector<AgentId> removable;
            for (AgentId id : l.agents) {
                if (!live.contains(id)) {
                    issues.push_back(where + "leave names unknown agent " + to_string(id));
                } else if (std::find(removable.begin(), removable.end(), id) == removable.end()) {
                    removable.push_back(id);
                }
            }
            if (removable.empty()) continue;
            topology = topology.without_agents(removable);
            for (AgentId id : removable) live.erase(id);
            if (topology.empty()) {
                issues.push_back(where + "leave removes every agent");
                return issues;
            }
            if (!is_connected(topology)) issues.push_back(where + "leave disconnects the communication graph");
            check_feasible(live, where, issues);
        }
    }
    return issues;
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& s) {
    Labels labels;
    labels.agents.assign(s.agents.size(), "");
    for (std::size_t i = 0; i < s.events.size(); ++i) labels.events.push_back(fmt::format("event {}: ", i + 1));
    return semantic_checks(s, labels);
}

Scenario parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ParseError(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
    }
    if (!root.IsMap()) throw ParseError("scenario document must be a mapping");

    Reader r;
    Scenario s;
    Labels labels;
    r.only_keys(root, {"format_version", "name", "seed", "max_iterations", "alpha0", "epsilon", "fixed_price",
                       "edge_probability", "agents", "edges", "events"},
                "scenario");

    if (!root["format_version"]) {
        r.issue(root, "missing 'format_version'");
    } else if (auto v = r.integer(root["format_version"], "format_version")) {
        s.format_version = static_cast<int>(*v);
        if (*v != 1) r.issue(root["format_version"], fmt::format("unsupported format_version {}", *v));
    }
    if (root["name"]) s.name = root["name"].as<std::string>();
    if (root["seed"]) {
        if (auto v = r.integer(root["seed"], "seed")) {
            if (*v < 0) r.issue(root["seed"], "seed must be >= 0");
            s.seed = static_cast<std::uint64_t>(*v);
        }
    }
    if (!root["max_iterations"]) {
        r.issue(root, "missing 'max_iterations'");
    } else if (auto v = r.integer(root["max_iterations"], "max_iterations")) {
        if (*v < 0) r.issue(root["max_iterations"], "max_iterations must be >= 0");
        s.max_iterations = static_cast<std::uint64_t>(std::max<std::int64_t>(*v, 0));
    }
    if (auto v = r.number(root, "alpha0", "scenario")) {
        s.alpha0 = *v;
        if (!(*v > 0)) r.issue(root["alpha0"], "alpha0 must be positive");
    }
    if (auto v = r.number(root, "epsilon", "scenario", false)) {
        s.epsilon = *v;
        if (*v < 0) r.issue(root["epsilon"], "epsilon must be >= 0");
    }
    if (auto v = r.number(root, "fixed_price", "scenario", false)) {
        s.fixed_price = *v;
        if (!(*v > 0)) r.issue(root["fixed_price"], "fixed_price must be positive");
    }
    double edge_probability = kDefaultEdgeProbability;
    if (auto v = r.number(root, "edge_probability", "scenario", false)) {
        edge_probability = *v;
        if (*v < 0 || *v > 1) r.issue(root["edge_probability"], "edge_probability must lie in [0, 1]");
    }

    const YAML::Node agents = root["agents"];
    if (!agents || !agents.IsSequence() || agents.size() == 0) {
        r.issue(agents ? agents : root, "'agents' must be a non-empty list");
    } else {
        for (const auto& n : agents) {
            if (auto a = r.agent(n)) {
                s.agents.push_back(*a);
                labels.agents.push_back(at_line(n));
            }
        }
    }

    if (const YAML::Node edges = root["edges"]) {
        s.edges = r.edges(edges, "edges");
        labels.edges = at_line(edges);
    } else if (!s.agents.empty()) {
        std::vector<AgentId> ids;
        for (const auto& a : s.agents) ids.push_back(a.id);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        s.edges = random_connected_topology(ids, edge_probability, s.seed).edges();
    }

    if (const YAML::Node events = root["events"]) {
        if (!events.IsSequence()) {
            r.issue(events, "'events' must be a list");
        } else {
            for (const auto& n : events) {
                if (!n.IsMap()) {
                    r.issue(n, "event must be a mapping");
                    continue;
                }
                r.only_keys(n, {"at", "base_load", "join", "leave"}, "event");
                ScenarioEvent ev;
                bool ok = true;
                if (!n["at"]) {
                    r.issue(n, "event: missing 'at'");
                    ok = false;
                } else if (auto v = r.integer(n["at"], "event 'at'")) {
                    if (*v < 1) {
                        r.issue(n["at"], "event 'at' must be >= 1");
                        ok = false;
                    }
                    ev.at_iteration = static_cast<std::uint64_t>(std::max<std::int64_t>(*v, 0));
                } else {
                    ok = false;
                }
                const int actions = (n["base_load"] ? 1 : 0) + (n["join"] ? 1 : 0) + (n["leave"] ? 1 : 0);
                if (actions != 1) {
                    r.issue(n, "event needs exactly one of base_load, join, leave");
                    continue;
                }
                if (const YAML::Node b = n["base_load"]) {
                    if (!b.IsMap()) {
                        r.issue(b, "base_load must be a mapping with agent and watts");
                        continue;
                    }
                    r.only_keys(b, {"agent", "watts"}, "base_load");
                    std::optional<AgentId> id;
                    if (b["agent"]) id = r.agent_id(b["agent"], "base_load agent");
                    else r.issue(b, "base_load: missing 'agent'");
                    auto watts = r.number(b, "watts", "base_load");
                    if (!id || !watts) continue;
                    ev.action = BaseLoadSet{*id, *watts};
                } else if (const YAML::Node j = n["join"]) {
                    if (!j.IsMap() || !j["agent"]) {
                        r.issue(j, "join needs an 'agent' mapping");
                        continue;
                    }
                    r.only_keys(j, {"agent", "edges"}, "join");
                    auto a = r.agent(j["agent"]);
                    std::vector<Edge> edges;
                    if (j["edges"]) edges = r.edges(j["edges"], "join edges");
                    else r.issue(j, "join: missing 'edges'");
                    if (!a) continue;
                    ev.action = Join{*a, edges};
                } else {
                    const YAML::Node l = n["leave"];
                    if (!l.IsSequence()) {
                        r.issue(l, "leave must be a list of agent ids");
                        continue;
                    }
                    Leave leave;
                    for (const auto& id : l) {
                        if (auto v = r.agent_id(id, "leave agent")) leave.agents.push_back(*v);
                    }
                    ev.action = leave;
                }
                if (!ok) continue;
                s.events.push_back(ev);
                labels.events.push_back(at_line(n));
            }
        }
    }

    if (r.issues.empty()) {
        for (auto& msg : semantic_checks(s, labels)) r.issues.push_back(std::move(msg));
    }
    if (!r.issues.empty()) throw ValidationError(std::move(r.issues));
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string agent_yaml(const AgentState& a) {
    if (a.is_generator()) {
        const auto& g = a.generator();
        return fmt::format(
            "{{id: {}, kind: generator, cost: {}, p_min: {}, p_max: {}, rate_min: {}, rate_max: {}, "
            "initial_power: {}}}",
            a.id.value, g.cost, g.p_min, g.p_max, g.rate_min, g.rate_max, a.power);
    }
    const auto& c = a.consumer();
    return fmt::format(
        "{{id: {}, kind: consumer, value: {}, p_min: {}, p_max: {}, rate_min: {}, rate_max: {}, "
        "base_load: {}, initial_power: {}}}",
        a.id.value, c.value, c.p_min, c.p_max, c.rate_min, c.rate_max, c.base_load, a.power);
}

std::string edge_list(const std::vector<Edge>& edges) {
    std::string out = "[";
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (i) out += ", ";
        out += fmt::format("[{}, {}]", edges[i].first.value, edges[i].second.value);
    }
    return out + "]";
}

}  // namespace

void write_scenario(const Scenario& s, std::ostream& out) {
    out << "format_version: " << s.format_version << "\n";
    out << "name: " << quoted(s.name) << "\n";
    out << "seed: " << s.seed << "\n";
    out << "max_iterations: " << s.max_iterations << "\n";
    out << fmt::format("alpha0: {}\n", s.alpha0);
    out << fmt::format("epsilon: {}\n", s.epsilon);
    if (s.fixed_price) out << fmt::format("fixed_price: {}\n", *s.fixed_price);
    out << "agents:\n";
    for (const auto& a : s.agents) out << "  - " << agent_yaml(a) << "\n";
    out << "edges:\n";
    for (const auto& [a, b] : s.edges) out << fmt::format("  - [{}, {}]\n", a.value, b.value);
    if (!s.events.empty()) out << "events:\n";
    for (const auto& ev : s.events) {
        out << "  - at: " << ev.at_iteration << "\n";
        if (const auto* b = std::get_if<BaseLoadSet>(&ev.action)) {
            out << fmt::format("    base_load: {{agent: {}, watts: {}}}\n", b->consumer.value, b->watts);
        } else if (const auto* j = std::get_if<Join>(&ev.action)) {
            out << "    join:\n";
            out << "      agent: " << agent_yaml(j->agent) << "\n";
            out << "      edges: " << edge_list(j->edges) << "\n";
        } else {
            const auto& l = std::get<Leave>(ev.action);
            out << "    leave: [";
            for (std::size_t i = 0; i < l.agents.size(); ++i) out << (i ? ", " : "") << l.agents[i].value;
            out << "]\n";
        }
    }
}

void write_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    write_scenario(scenario, out);
    if (!out) throw Error("write to '" + path + "' failed");
}

void write_records(const std::vector<IterationRecord>& records, std::ostream& out) {
    out << kCsvHeader << "\n";
    fmt::memory_buffer buf;
    for (const auto& r : records) {
        for (const auto& a : r.agents) {
            buf.clear();
            fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{},{},{},{}\n", r.k, a.id.value,
                           to_string(a.kind), a.power, a.base_load, r.price, r.generation, r.demand,
                           r.social_welfare, r.imbalance, a.box_violation ? 1 : 0, a.rate_violation ? 1 : 0);
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        }
    }
}

void write_records(const std::vector<IterationRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    write_records(records, out);
    if (!out) throw Error("write to '" + path + "' failed");
}

namespace {

using Series = std::vector<std::pair<double, double>>;

void line_chart(const std::string& path, const std::string& title, const std::string& y_label,
                const std::vector<std::pair<std::string, Series>>& series) {
    constexpr double W = 900, H = 480, L = 80, R = 170, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& [name, pts] : series) {
        for (const auto& [x, y] : pts) {
            if (!std::isfinite(y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y0 -= 1, y1 += 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                   "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)",
                       W, H)
        << "\n";
    out << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", W, H) << "\n";
    out << fmt::format(R"(<text x="{}" y="22" font-size="15">{}</text>)", L, title) << "\n";
    out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>)", L, T,
                       W - L - R, H - T - B)
        << "\n";
    for (int i = 0; i <= 4; ++i) {
        const double yv = y0 + (y1 - y0) * i / 4.0;
        const double xv = x0 + (x1 - x0) * i / 4.0;
        out << fmt::format(R"(<text x="{}" y="{}" text-anchor="end">{:.4g}</text>)", L - 6, sy(yv) + 4, yv) << "\n";
        out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{:.0f}</text>)", sx(xv), H - B + 18, xv)
            << "\n";
    }
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">iteration k</text>)", (L + W - R) / 2, H - 10)
        << "\n";
    out << fmt::format(R"svg(<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>)svg",
                       (T + H - B) / 2, (T + H - B) / 2, y_label)
        << "\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& [name, pts] = series[i];
        const char* color = colors[i % std::size(colors)];
        std::string d;
        bool pen = false;
        for (const auto& [x, y] : pts) {
            if (!std::isfinite(y)) {
                pen = false;
                continue;
            }
            d += fmt::format("{}{:.2f},{:.2f} ", pen ? "L" : "M", sx(x), sy(y));
            pen = true;
        }
        out << fmt::format(R"(<path d="{}" fill="none" stroke="{}" stroke-width="1.3"/>)", d, color) << "\n";
        const double ly = T + 14 + 16 * static_cast<double>(i);
        out << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>)", W - R + 12,
                           ly - 4, W - R + 32, ly - 4, color)
            << "\n";
        out << fmt::format(R"(<text x="{}" y="{}">{}</text>)", W - R + 38, ly, name) << "\n";
    }
    out << "</svg>\n";
}

}  // namespace

void write_plots(const std::vector<IterationRecord>& records, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::map<AgentId, std::pair<AgentKind, Series>> per_agent;
    Series demand, generation, price;
    for (const auto& r : records) {
        const double k = static_cast<double>(r.k);
        for (const auto& a : r.agents) {
            auto& entry = per_agent[a.id];
            entry.first = a.kind;
            entry.second.emplace_back(k, a.power);
        }
        demand.emplace_back(k, r.demand);
        generation.emplace_back(k, r.generation);
        price.emplace_back(k, r.price);
    }
    std::vector<std::pair<std::string, Series>> powers;
    for (auto& [id, entry] : per_agent) {
        powers.emplace_back(fmt::format("{} {}", entry.first == AgentKind::Generator ? "gen" : "load", id.value),
                            std::move(entry.second));
    }
    const auto base = std::filesystem::path(dir);
    line_chart((base / "power.svg").string(), "Controllable power per agent", "W", powers);
    line_chart((base / "balance.svg").string(), "Total demand and generation", "W",
               {{"P_D", demand}, {"P_G", generation}});
    line_chart((base / "price.svg").string(), "System price", "cost units", {{"price", price}});
}

}  // namespace transactive
