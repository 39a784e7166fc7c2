#include "hydrosample/network.hpp"
#include "hydrosample/errors.hpp"
#include "hydrosample/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace hydrosample {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

std::string strip_comment(const std::string& line) {
    auto pos = line.find_first_of(";#");
    return pos == std::string::npos ? line : line.substr(0, pos);
}

[[noreturn]] void fail_line(int lineno, const std::string& msg) {
    throw ValidationError("line " + std::to_string(lineno) + ": " + msg);
}

void check_id(const std::string& id, const std::string& what) {
    if (id.empty()) throw ValidationError(what + " id is empty");
    for (char c : id) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ';' || c == '[' || c == ']') {
            throw ValidationError(what + " id '" + id + "' contains a reserved character");
        }
    }
}

} // namespace

PipeNetwork::PipeNetwork(std::vector<Junction> junctions,
                         std::vector<Reservoir> reservoirs,
                         std::vector<Pipe> pipes)
    : junctions_(std::move(junctions)),
      reservoirs_(std::move(reservoirs)),
      pipes_(std::move(pipes)) {
    for (std::size_t i = 0; i < junctions_.size(); ++i) {
        junction_index_.emplace(junctions_[i].id, static_cast<int>(i));
    }
    for (std::size_t i = 0; i < reservoirs_.size(); ++i) {
        reservoir_index_.emplace(reservoirs_[i].id, static_cast<int>(i));
    }
    validate();
}

std::optional<int> PipeNetwork::junction_index(const std::string& id) const {
    auto it = junction_index_.find(id);
    if (it == junction_index_.end()) return std::nullopt;
    return it->second;
}

bool PipeNetwork::is_reservoir(const std::string& id) const {
    return reservoir_index_.count(id) > 0;
}

bool PipeNetwork::has_node(const std::string& id) const {
    return junction_index_.count(id) > 0 || reservoir_index_.count(id) > 0;
}

bool PipeNetwork::operator==(const PipeNetwork& other) const {
    auto eq_j = [](const Junction& a, const Junction& b) {
        return a.id == b.id && a.demand_m3s == b.demand_m3s;
    };
    auto eq_r = [](const Reservoir& a, const Reservoir& b) {
        return a.id == b.id && a.head_m == b.head_m;
    };
    auto eq_p = [](const Pipe& a, const Pipe& b) {
        return a.id == b.id && a.from == b.from && a.to == b.to &&
               a.length_m == b.length_m && a.diameter_m == b.diameter_m;
    };
    return std::equal(junctions_.begin(), junctions_.end(), other.junctions_.begin(),
                      other.junctions_.end(), eq_j) &&
           std::equal(reservoirs_.begin(), reservoirs_.end(), other.reservoirs_.begin(),
                      other.reservoirs_.end(), eq_r) &&
           std::equal(pipes_.begin(), pipes_.end(), other.pipes_.begin(),
                      other.pipes_.end(), eq_p);
}

void PipeNetwork::validate() const {
    if (reservoirs_.empty()) {
        throw ValidationError("network has no reservoir; the flow solve needs at least one");
    }
    if (junction_index_.size() != junctions_.size()) {
        throw ValidationError("duplicate junction id");
    }
    if (reservoir_index_.size() != reservoirs_.size()) {
        throw ValidationError("duplicate reservoir id");
    }
    for (const auto& j : junctions_) {
        check_id(j.id, "junction");
        if (reservoir_index_.count(j.id)) {
            throw ValidationError("id '" + j.id + "' declared as both junction and reservoir");
        }
        if (!(j.demand_m3s >= 0.0) || !std::isfinite(j.demand_m3s)) {
            throw ValidationError("junction '" + j.id + "' has negative or non-finite demand");
        }
    }
    for (const auto& r : reservoirs_) {
        check_id(r.id, "reservoir");
        if (!std::isfinite(r.head_m)) {
            throw ValidationError("reservoir '" + r.id + "' has non-finite head");
        }
    }

    std::unordered_map<std::string, int> pipe_ids;
    for (const auto& p : pipes_) {
        check_id(p.id, "pipe");
        if (!pipe_ids.emplace(p.id, 0).second) {
            throw ValidationError("duplicate pipe id '" + p.id + "'");
        }
        if (!has_node(p.from)) {
            throw ValidationError("pipe '" + p.id + "' references unknown node '" + p.from + "'");
        }
        if (!has_node(p.to)) {
            throw ValidationError("pipe '" + p.id + "' references unknown node '" + p.to + "'");
        }
        if (p.from == p.to) {
            throw ValidationError("pipe '" + p.id + "' is a self-loop");
        }
        if (!(p.length_m > 0.0) || !std::isfinite(p.length_m)) {
            throw ValidationError("pipe '" + p.id + "' must have positive length");
        }
        if (!(p.diameter_m > 0.0) || !std::isfinite(p.diameter_m)) {
            throw ValidationError("pipe '" + p.id + "' must have positive diameter");
        }
    }

    // Connectivity over the union graph (junctions + reservoirs).
    const int n_total = static_cast<int>(junctions_.size() + reservoirs_.size());
    if (n_total == 0) throw ValidationError("network is empty");
    auto node_ordinal = [&](const std::string& id) {
        if (auto ji = junction_index_.find(id); ji != junction_index_.end()) return ji->second;
        return static_cast<int>(junctions_.size()) + reservoir_index_.at(id);
    };
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_total));
    for (const auto& p : pipes_) {
        const int a = node_ordinal(p.from);
        const int b = node_ordinal(p.to);
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    std::vector<char> seen(static_cast<std::size_t>(n_total), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    if (reached != n_total) {
        throw ValidationError("network graph is disconnected");
    }
}

PipeNetwork parse_inp(const std::string& text) {
    enum class Section { none, junctions, reservoirs, pipes };
    Section section = Section::none;

    std::vector<Junction> junctions;
    std::vector<Reservoir> reservoirs;
    std::vector<Pipe> pipes;

    std::istringstream stream(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(stream, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string line = strip_comment(raw);
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;

        if (tokens[0].front() == '[') {
            if (tokens.size() != 1) fail_line(lineno, "unexpected text after section header");
            const std::string& header = tokens[0];
            if (header == "[JUNCTIONS]") section = Section::junctions;
            else if (header == "[RESERVOIRS]") section = Section::reservoirs;
            else if (header == "[PIPES]") section = Section::pipes;
            else fail_line(lineno, "unsupported section " + header);
            continue;
        }

        const std::string ctx = "line " + std::to_string(lineno);
        switch (section) {
        case Section::none:
            fail_line(lineno, "data before any section header");
        case Section::junctions: {
            if (tokens.size() != 2) fail_line(lineno, "junction rows need: id demand_m3s");
            junctions.push_back({tokens[0], parse_double(tokens[1], ctx)});
            break;
        }
        case Section::reservoirs: {
            if (tokens.size() != 2) fail_line(lineno, "reservoir rows need: id head_m");
            reservoirs.push_back({tokens[0], parse_double(tokens[1], ctx)});
            break;
        }
        case Section::pipes: {
            if (tokens.size() != 5) {
                fail_line(lineno, "pipe rows need: id from to length_m diameter_m");
            }
            pipes.push_back({tokens[0], tokens[1], tokens[2],
                             parse_double(tokens[3], ctx), parse_double(tokens[4], ctx)});
            // Early endpoint check so the error carries the line number.
            auto declared = [&](const std::string& id) {
                return std::any_of(junctions.begin(), junctions.end(),
                                   [&](const Junction& j) { return j.id == id; }) ||
                       std::any_of(reservoirs.begin(), reservoirs.end(),
                                   [&](const Reservoir& r) { return r.id == id; });
            };
            if (!declared(pipes.back().from)) {
                fail_line(lineno, "pipe '" + pipes.back().id + "' references undeclared node '" +
                                      pipes.back().from + "'");
            }
            if (!declared(pipes.back().to)) {
                fail_line(lineno, "pipe '" + pipes.back().id + "' references undeclared node '" +
                                      pipes.back().to + "'");
            }
            break;
        }
        }
    }

    return PipeNetwork(std::move(junctions), std::move(reservoirs), std::move(pipes));
}

std::string serialize_inp(const PipeNetwork& net) {
    std::string out;
    out += "[JUNCTIONS]\n";
    for (const auto& j : net.junctions()) {
        out += j.id + " " + format_double(j.demand_m3s) + "\n";
    }
    out += "\n[RESERVOIRS]\n";
    for (const auto& r : net.reservoirs()) {
        out += r.id + " " + format_double(r.head_m) + "\n";
    }
    out += "\n[PIPES]\n";
    for (const auto& p : net.pipes()) {
        out += p.id + " " + p.from + " " + p.to + " " + format_double(p.length_m) + " " +
               format_double(p.diameter_m) + "\n";
    }
    return out;
}

InjectionScenario parse_scenario(const std::string& text) {
    InjectionScenario sc;
    bool saw_source = false, saw_rate = false, saw_start = false, saw_duration = false,
         saw_timestep = false, saw_max_steps = false;

    std::istringstream stream(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(stream, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::string line = strip_comment(raw);
        std::replace(line.begin(), line.end(), '=', ' ');
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 2) fail_line(lineno, "scenario rows need: key value");
        const std::string ctx = "line " + std::to_string(lineno);
        const std::string& key = tokens[0];
        const std::string& val = tokens[1];
        if (key == "source") { sc.source = val; saw_source = true; }
        else if (key == "rate_mg_s") { sc.rate_mg_s = parse_double(val, ctx); saw_rate = true; }
        else if (key == "start_s") { sc.start_s = parse_double(val, ctx); saw_start = true; }
        else if (key == "duration_s") { sc.duration_s = parse_double(val, ctx); saw_duration = true; }
        else if (key == "timestep_s") { sc.timestep_s = parse_double(val, ctx); saw_timestep = true; }
        else if (key == "max_steps") { sc.max_steps = static_cast<int>(parse_long(val, ctx)); saw_max_steps = true; }
        else fail_line(lineno, "unknown scenario key '" + key + "'");
    }

    if (!saw_source) throw ValidationError("scenario file is missing 'source'");
    if (!saw_rate) throw ValidationError("scenario file is missing 'rate_mg_s'");
    if (!saw_start) throw ValidationError("scenario file is missing 'start_s'");
    if (!saw_duration) throw ValidationError("scenario file is missing 'duration_s'");
    if (!saw_timestep) throw ValidationError("scenario file is missing 'timestep_s'");
    if (!saw_max_steps) throw ValidationError("scenario file is missing 'max_steps'");
    return sc;
}

void validate_scenario(const PipeNetwork& net, const InjectionScenario& sc) {
    if (net.is_reservoir(sc.source)) {
        throw ValidationError("scenario source '" + sc.source + "' is a reservoir, not a junction");
    }
    if (!net.junction_index(sc.source)) {
        throw ValidationError("scenario source '" + sc.source + "' is not a junction of the network");
    }
    if (!(sc.rate_mg_s > 0.0)) throw ValidationError("scenario rate_mg_s must be > 0");
    if (!(sc.start_s >= 0.0)) throw ValidationError("scenario start_s must be >= 0");
    if (!(sc.duration_s > 0.0)) throw ValidationError("scenario duration_s must be > 0");
    if (!(sc.timestep_s > 0.0)) throw ValidationError("scenario timestep_s must be > 0");
    if (sc.max_steps <= 0) throw ValidationError("scenario max_steps must be > 0");
    const double steps = sc.duration_s / sc.timestep_s;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
        throw ValidationError("scenario duration_s must be an integer multiple of timestep_s");
    }
}

} // namespace hydrosample
