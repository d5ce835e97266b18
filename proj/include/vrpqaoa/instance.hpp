#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vrpqaoa/errors.hpp"
#include "vrpqaoa/numeric.hpp"

namespace vrpqaoa {

// Directed routing instance. Node 0 is the depot; k vehicles serve the
// remaining n-1 locations, every location exactly once, all routes starting
// and ending at the depot. Weights are directed edge costs; symmetry is not
// required. Immutable after construction.
class ProblemInstance {
public:
    ProblemInstance(int nodes, int vehicles, std::vector<double> weights_row_major)
        : n_(nodes), k_(vehicles), w_(std::move(weights_row_major)) {
        if (n_ < 2)
            throw validation_error("instance needs at least 2 nodes (depot plus one location), got n=" +
                                   std::to_string(n_));
        if (k_ < 1 || k_ > n_ - 1)
            throw validation_error("vehicle count k=" + std::to_string(k_) +
                                   " out of range: need 1 <= k <= n-1 = " + std::to_string(n_ - 1));
        if (w_.size() != static_cast<std::size_t>(n_) * n_)
            throw validation_error("weight matrix dimension mismatch: got " + std::to_string(w_.size()) +
                                   " entries, expected n*n = " + std::to_string(n_ * n_));
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                double w = w_[static_cast<std::size_t>(i) * n_ + j];
                if (i == j && w != 0.0)
                    throw validation_error("diagonal weight w[" + std::to_string(i) + "][" + std::to_string(i) +
                                           "] must be zero");
                if (w < 0.0)
                    throw validation_error("negative weight w[" + std::to_string(i) + "][" + std::to_string(j) +
                                           "] = " + std::to_string(w));
            }
        }
    }

    int nodes() const { return n_; }
    int vehicles() const { return k_; }

    /// One binary decision variable per directed edge.
    int num_vars() const { return n_ * (n_ - 1); }

    double weight(int i, int j) const { return w_[static_cast<std::size_t>(i) * n_ + j]; }

    double max_weight() const { return *std::max_element(w_.begin(), w_.end()); }

    /// Default penalty scale: n times the largest edge weight.
    double default_penalty() const { return n_ * max_weight(); }

    const std::vector<double>& weights() const { return w_; }

private:
    int n_;
    int k_;
    std::vector<double> w_;
};

// Flattened edge ordering: variables are grouped by source node, targets
// ascending with the diagonal skipped. t=0 is edge 0->1, t=N-1 is edge
// (n-1)->(n-2).

inline int var_index(int nodes, int i, int j) {
    if (i < 0 || i >= nodes || j < 0 || j >= nodes)
        throw std::domain_error("edge (" + std::to_string(i) + "," + std::to_string(j) + ") out of range for n=" +
                                std::to_string(nodes));
    if (i == j)
        throw std::domain_error("self-loop (" + std::to_string(i) + "," + std::to_string(i) +
                                ") has no decision variable");
    return i * (nodes - 1) + j - (j > i ? 1 : 0);
}

inline std::pair<int, int> var_pair(int nodes, int t) {
    if (t < 0 || t >= nodes * (nodes - 1))
        throw std::domain_error("variable index " + std::to_string(t) + " out of range for n=" +
                                std::to_string(nodes));
    int i = t / (nodes - 1);
    int r = t % (nodes - 1);
    return {i, r + (r >= i ? 1 : 0)};
}

// An N-bit assignment identified with the integer whose bit t
// (least-significant first) holds variable x_t.
class Configuration {
public:
    Configuration(int nodes, std::uint64_t index) : n_(nodes), index_(index) {
        int nvars = nodes * (nodes - 1);
        if (nodes < 2 || nvars > 63)
            throw std::domain_error("configuration supports 2 <= n <= 8, got n=" + std::to_string(nodes));
        if (nvars < 64 && index >= (std::uint64_t{1} << nvars))
            throw std::domain_error("configuration index " + std::to_string(index) + " does not fit " +
                                    std::to_string(nvars) + " variables");
    }

    static Configuration from_bits(int nodes, const std::vector<int>& bits) {
        if (static_cast<int>(bits.size()) != nodes * (nodes - 1))
            throw std::domain_error("bit vector length " + std::to_string(bits.size()) + " does not match n=" +
                                    std::to_string(nodes));
        std::uint64_t index = 0;
        for (std::size_t t = 0; t < bits.size(); ++t) {
            if (bits[t] != 0 && bits[t] != 1) throw std::domain_error("bits must be 0 or 1");
            index |= static_cast<std::uint64_t>(bits[t]) << t;
        }
        return Configuration(nodes, index);
    }

    static Configuration from_edges(int nodes, const std::vector<std::pair<int, int>>& edges) {
        std::uint64_t index = 0;
        for (auto [i, j] : edges) index |= std::uint64_t{1} << var_index(nodes, i, j);
        return Configuration(nodes, index);
    }

    int nodes() const { return n_; }
    int num_vars() const { return n_ * (n_ - 1); }
    std::uint64_t index() const { return index_; }

    bool bit(int t) const { return (index_ >> t) & 1u; }

    /// Decoded directed edge set, in variable order.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int t = 0; t < num_vars(); ++t)
            if (bit(t)) out.push_back(var_pair(n_, t));
        return out;
    }

    /// Bit t first; this is the order used in all text reports.
    std::string bitstring() const {
        std::string s(num_vars(), '0');
        for (int t = 0; t < num_vars(); ++t)
            if (bit(t)) s[t] = '1';
        return s;
    }

private:
    int n_;
    std::uint64_t index_;
};

enum class RouteClass {
    degree_infeasible,             // some in/out-degree equation violated
    degree_feasible_with_subtour,  // degrees hold but a cycle avoids the depot
    route_feasible,                // decodes into exactly k depot-anchored routes
};

inline const char* to_string(RouteClass c) {
    switch (c) {
        case RouteClass::degree_infeasible: return "degree-infeasible";
        case RouteClass::degree_feasible_with_subtour: return "degree-feasible-with-subtour";
        case RouteClass::route_feasible: return "route-feasible";
    }
    return "?";
}

// Routes are depot-anchored node cycles listed as {0, a, b, ...} meaning
// 0->a->b->...->0. Subtours are depot-free cycles {a, b, ...} rotated so the
// smallest node comes first. Both lists are sorted by first location.
struct RouteClassification {
    RouteClass cls = RouteClass::degree_infeasible;
    std::vector<std::vector<int>> routes;
    std::vector<std::vector<int>> subtours;
};

inline double route_cost(const Configuration& config, const ProblemInstance& inst) {
    if (config.nodes() != inst.nodes())
        throw std::domain_error("configuration has n=" + std::to_string(config.nodes()) + ", instance has n=" +
                                std::to_string(inst.nodes()));
    detail::CompensatedSum cost;
    for (int t = 0; t < config.num_vars(); ++t) {
        if (!config.bit(t)) continue;
        auto [i, j] = var_pair(inst.nodes(), t);
        cost.add(inst.weight(i, j));
    }
    return cost.value();
}

// Total classification: degree screening first, then cycle decomposition of
// the successor structure. With all degree equations satisfied, every chain
// started from a depot out-neighbor must return to the depot (in-degrees are
// exactly one, so chains cannot merge or re-enter themselves), which yields
// exactly k routes; locations unreachable from the depot sit on depot-free
// cycles and are reported as subtours.
inline RouteClassification classify(const Configuration& config, const ProblemInstance& inst) {
    if (config.nodes() != inst.nodes())
        throw std::domain_error("configuration/instance dimension mismatch");
    const int n = inst.nodes();
    const int k = inst.vehicles();

    std::vector<int> out_degree(n, 0), in_degree(n, 0);
    std::vector<std::vector<int>> successors(n);
    for (int t = 0; t < config.num_vars(); ++t) {
        if (!config.bit(t)) continue;
        auto [i, j] = var_pair(n, t);
        ++out_degree[i];
        ++in_degree[j];
        successors[i].push_back(j);
    }

    RouteClassification result;
    bool degrees_ok = out_degree[0] == k && in_degree[0] == k;
    for (int i = 1; i < n && degrees_ok; ++i)
        degrees_ok = out_degree[i] == 1 && in_degree[i] == 1;
    if (!degrees_ok) {
        result.cls = RouteClass::degree_infeasible;
        return result;
    }

    std::vector<bool> visited(n, false);
    for (int start : successors[0]) {  // ascending: successor lists were filled in variable order
        std::vector<int> route{0};
        for (int v = start; v != 0; v = successors[v][0]) {
            route.push_back(v);
            visited[v] = true;
        }
        result.routes.push_back(std::move(route));
    }
    for (int v = 1; v < n; ++v) {
        if (visited[v] || successors[v].empty()) continue;
        std::vector<int> cycle;
        int u = v;
        do {
            cycle.push_back(u);
            visited[u] = true;
            u = successors[u][0];
        } while (u != v);
        result.subtours.push_back(std::move(cycle));  // starts at its smallest node: v is unvisited-minimal
    }
    result.cls = result.subtours.empty() ? RouteClass::route_feasible : RouteClass::degree_feasible_with_subtour;
    return result;
}

// ---------------------------------------------------------------------------
// Instance documents
//
//   # comment
//   n 4
//   k 2
//   weights
//   0 36.84 5.06 30.63
//   ... (n rows of n reals, free-form whitespace)

namespace detail {

inline std::vector<std::string> tokenize_document(std::istream& in) {
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
    }
    return tokens;
}

inline double parse_real(const std::string& tok, const char* what) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw parse_error(std::string("expected ") + what + ", got '" + tok + "'");
    }
    if (pos != tok.size()) throw parse_error(std::string("expected ") + what + ", got '" + tok + "'");
    return value;
}

inline int parse_int(const std::string& tok, const char* what) {
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(tok, &pos);
    } catch (const std::exception&) {
        throw parse_error(std::string("expected ") + what + ", got '" + tok + "'");
    }
    if (pos != tok.size()) throw parse_error(std::string("expected ") + what + ", got '" + tok + "'");
    return value;
}

}  // namespace detail

inline ProblemInstance parse_instance(std::istream& in) {
    auto tokens = detail::tokenize_document(in);
    std::size_t pos = 0;
    auto expect = [&](const char* keyword) {
        if (pos >= tokens.size() || tokens[pos] != keyword)
            throw parse_error("instance document: expected '" + std::string(keyword) + "'" +
                              (pos < tokens.size() ? ", got '" + tokens[pos] + "'" : " before end of input"));
        ++pos;
    };
    expect("n");
    if (pos >= tokens.size()) throw parse_error("instance document: missing node count");
    int n = detail::parse_int(tokens[pos++], "node count");
    expect("k");
    if (pos >= tokens.size()) throw parse_error("instance document: missing vehicle count");
    int k = detail::parse_int(tokens[pos++], "vehicle count");
    expect("weights");
    if (n < 2) throw validation_error("instance needs at least 2 nodes (depot plus one location), got n=" +
                                      std::to_string(n));
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(n) * n);
    while (pos < tokens.size()) w.push_back(detail::parse_real(tokens[pos++], "weight"));
    if (w.size() != static_cast<std::size_t>(n) * n)
        throw validation_error("weight matrix dimension mismatch: got " + std::to_string(w.size()) +
                               " entries, expected n*n = " + std::to_string(n * n));
    return ProblemInstance(n, k, std::move(w));
}

inline ProblemInstance parse_instance(const std::string& text) {
    std::istringstream in(text);
    return parse_instance(in);
}

inline ProblemInstance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open instance file: " + path);
    return parse_instance(in);
}

inline void write_instance(std::ostream& out, const ProblemInstance& inst) {
    out << "n " << inst.nodes() << "\n";
    out << "k " << inst.vehicles() << "\n";
    out << "weights\n";
    out.precision(17);
    for (int i = 0; i < inst.nodes(); ++i) {
        for (int j = 0; j < inst.nodes(); ++j) out << (j ? " " : "") << inst.weight(i, j);
        out << "\n";
    }
}

// Bundled instances matching the published distance matrices.
inline std::vector<std::string> preset_names() { return {"vrp-4-2", "vrp-5-2", "vrp-5-3"}; }

inline ProblemInstance preset_instance(std::string_view name) {
    if (name == "vrp-4-2") {
        return ProblemInstance(4, 2,
                               {0.0,   36.84, 5.06,  30.63,   //
                                36.84, 0.0,   24.55, 63.22,   //
                                5.06,  24.55, 0.0,   15.50,   //
                                30.63, 63.22, 15.50, 0.0});
    }
    if (name == "vrp-5-2") {
        return ProblemInstance(5, 2,
                               {0.0,    6.794,  61.653, 24.557, 47.767,   //
                                6.794,  0.0,    87.312, 47.262, 39.477,   //
                                61.653, 87.312, 0.0,    9.711,  42.887,   //
                                24.557, 47.262, 9.711,  0.0,    40.98,    //
                                47.767, 39.477, 42.887, 40.98,  0.0});
    }
    if (name == "vrp-5-3") {
        return ProblemInstance(5, 3,
                               {0.0,    12.138, 0.32,   7.2,    2.626,    //
                                12.138, 0.0,    16.307, 5.3,    17.021,   //
                                0.32,   16.307, 0.0,    9.309,  2.98,     //
                                7.2,    5.3,    9.309,  0.0,    16.759,   //
                                2.626,  17.021, 2.98,   16.759, 0.0});
    }
    throw validation_error("unknown preset instance '" + std::string(name) + "'");
}

/// Preset name, else a path to an instance document.
inline ProblemInstance resolve_instance(const std::string& ref) {
    for (const auto& name : preset_names())
        if (ref == name) return preset_instance(ref);
    return load_instance_file(ref);
}

}  // namespace vrpqaoa
