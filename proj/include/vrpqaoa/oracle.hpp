#pragma once

// Classical ground truth, three ways:
//
//  * exhaustive_ground_state — exact minimum of a QUBO/Ising model over all
//    2^N assignments, visited in Gray-code order with O(N) incremental
//    energy updates per step,
//  * optimal_routes — exact route-cost optimum by enumerating every way to
//    split the locations into k nonempty vehicle sequences,
//  * degree_feasible_minimum — cheapest configuration satisfying all degree
//    equations, subtours allowed.
//
// The three answers differ in an instructive way: the encoding's ground
// state tracks degree feasibility, which can undercut the true route
// optimum when a detached subtour is cheaper than serving those stops from
// the depot.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "vrpqaoa/encoder.hpp"
#include "vrpqaoa/errors.hpp"
#include "vrpqaoa/instance.hpp"

namespace vrpqaoa {

struct GroundStateReport {
    double minimum = 0.0;
    std::vector<std::uint64_t> argmin;       // ascending
    std::vector<double> argmin_energies;     // parallel, direct re-evaluations
    std::vector<RouteClass> argmin_classes;  // parallel; filled when an instance is supplied
    std::vector<std::size_t> histogram;      // empty unless buckets were requested
    double histogram_low = 0.0;
    double histogram_high = 0.0;
};

namespace detail {

inline void check_sweep_width(int num_vars) {
    if (num_vars < 1) throw std::domain_error("sweep needs at least one variable");
    if (num_vars > 24)
        throw resource_error("exhaustive sweep limited to 24 variables, got " + std::to_string(num_vars) +
                             " (2^N states would not fit the time budget)");
}

// O(N) energy change for flipping one bit of a QUBO assignment.
struct QuboFlipDelta {
    int num_vars;
    std::vector<double> eff_linear;   // linear plus any stray diagonal
    std::vector<double> pair_totals;  // symmetric N*N, zero diagonal

    explicit QuboFlipDelta(const QuboModel& m) : num_vars(m.num_vars), eff_linear(m.linear) {
        pair_totals.assign(static_cast<std::size_t>(num_vars) * num_vars, 0.0);
        for (int t = 0; t < num_vars; ++t) {
            eff_linear[t] += m.quad(t, t);
            for (int u = 0; u < num_vars; ++u)
                if (u != t) pair_totals[static_cast<std::size_t>(t) * num_vars + u] = m.pair_coefficient(t, u);
        }
    }

    // energy(z with bit flipped) - energy(z)
    double operator()(std::uint64_t z, int bit) const {
        const double* row = pair_totals.data() + static_cast<std::size_t>(bit) * num_vars;
        double inner = eff_linear[bit];
        for (int u = 0; u < num_vars; ++u)
            if ((z >> u) & 1u) inner += row[u];
        return ((z >> bit) & 1u) ? -inner : inner;
    }
};

// O(N) energy change for flipping one spin of an Ising assignment.
struct IsingFlipDelta {
    int num_spins;
    std::vector<double> fields;
    std::vector<double> coupling_rows;  // symmetric N*N, zero diagonal

    explicit IsingFlipDelta(const IsingModel& m) : num_spins(m.num_spins), fields(m.fields) {
        coupling_rows.assign(static_cast<std::size_t>(num_spins) * num_spins, 0.0);
        for (const auto& c : m.couplings) {
            coupling_rows[static_cast<std::size_t>(c.i) * num_spins + c.j] += c.value;
            coupling_rows[static_cast<std::size_t>(c.j) * num_spins + c.i] += c.value;
        }
    }

    double operator()(std::uint64_t z, int bit) const {
        const double* row = coupling_rows.data() + static_cast<std::size_t>(bit) * num_spins;
        double inner = fields[bit];
        for (int u = 0; u < num_spins; ++u) inner += ((z >> u) & 1u) ? row[u] : -row[u];
        const double s_bit = ((z >> bit) & 1u) ? 1.0 : -1.0;
        return -2.0 * s_bit * inner;
    }
};

// Walk all 2^N assignments in Gray-code order, tracking the energy
// incrementally and re-deriving it from scratch every few hundred steps so
// rounding drift cannot accumulate.  Anything within a generous margin of
// the running minimum is kept as a candidate and re-evaluated directly at
// the end, so the reported minimum and 1e-9 ties are exact.
template <class DirectFn, class DeltaFn>
GroundStateReport gray_code_sweep(int num_vars, DirectFn&& direct, DeltaFn&& delta, int histogram_buckets) {
    check_sweep_width(num_vars);
    constexpr std::uint64_t resync_interval = 256;
    constexpr double candidate_margin = 1e-6;

    const std::uint64_t count = std::uint64_t{1} << num_vars;
    std::uint64_t z = 0;
    double energy = direct(z);
    double best = energy;
    std::vector<std::uint64_t> candidates{0};

    auto compact = [&] {
        std::erase_if(candidates, [&](std::uint64_t c) { return direct(c) > best + candidate_margin; });
    };

    for (std::uint64_t m = 1; m < count; ++m) {
        const int bit = std::countr_zero(m);
        energy += delta(z, bit);
        z ^= std::uint64_t{1} << bit;
        if ((m & (resync_interval - 1)) == 0) energy = direct(z);
        if (energy <= best + candidate_margin) {
            if (energy < best) best = energy;
            candidates.push_back(z);
            if (candidates.size() >= 4096 && (candidates.size() & (candidates.size() - 1)) == 0) compact();
        }
    }

    GroundStateReport report;
    double minimum = direct(candidates.front());
    for (std::uint64_t c : candidates) minimum = std::min(minimum, direct(c));
    report.minimum = minimum;
    std::sort(candidates.begin(), candidates.end());
    for (std::uint64_t c : candidates) {
        const double e = direct(c);
        if (e <= minimum + 1e-9) {
            report.argmin.push_back(c);
            report.argmin_energies.push_back(e);
        }
    }

    if (histogram_buckets > 0) {
        // second pass to find the range, third to fill the buckets
        z = 0;
        energy = direct(z);
        double lo = energy, hi = energy;
        for (std::uint64_t m = 1; m < count; ++m) {
            const int bit = std::countr_zero(m);
            energy += delta(z, bit);
            z ^= std::uint64_t{1} << bit;
            if ((m & (resync_interval - 1)) == 0) energy = direct(z);
            lo = std::min(lo, energy);
            hi = std::max(hi, energy);
        }
        report.histogram.assign(static_cast<std::size_t>(histogram_buckets), 0);
        report.histogram_low = std::min(lo, minimum);
        report.histogram_high = hi;
        const double span = report.histogram_high - report.histogram_low;
        z = 0;
        energy = direct(z);
        for (std::uint64_t m = 0; m < count; ++m) {
            if (m) {
                const int bit = std::countr_zero(m);
                energy += delta(z, bit);
                z ^= std::uint64_t{1} << bit;
                if ((m & (resync_interval - 1)) == 0) energy = direct(z);
            }
            int bucket = span > 0.0 ? static_cast<int>((energy - report.histogram_low) / span * histogram_buckets) : 0;
            bucket = std::clamp(bucket, 0, histogram_buckets - 1);
            ++report.histogram[static_cast<std::size_t>(bucket)];
        }
    }
    return report;
}

inline void attach_classes(GroundStateReport& report, const ProblemInstance& inst, int num_vars) {
    if (inst.num_vars() != num_vars)
        throw std::domain_error("instance has " + std::to_string(inst.num_vars()) + " variables, model has " +
                                std::to_string(num_vars));
    for (std::uint64_t z : report.argmin)
        report.argmin_classes.push_back(classify(Configuration(inst.nodes(), z), inst).cls);
}

}  // namespace detail

inline GroundStateReport exhaustive_ground_state(const QuboModel& model, int histogram_buckets = 0) {
    return detail::gray_code_sweep(
        model.num_vars, [&](std::uint64_t z) { return qubo_energy(model, z); }, detail::QuboFlipDelta(model),
        histogram_buckets);
}

inline GroundStateReport exhaustive_ground_state(const QuboModel& model, const ProblemInstance& inst,
                                                 int histogram_buckets = 0) {
    auto report = exhaustive_ground_state(model, histogram_buckets);
    detail::attach_classes(report, inst, model.num_vars);
    return report;
}

inline GroundStateReport exhaustive_ground_state(const IsingModel& model, int histogram_buckets = 0) {
    return detail::gray_code_sweep(
        model.num_spins, [&](std::uint64_t z) { return ising_energy(model, z); }, detail::IsingFlipDelta(model),
        histogram_buckets);
}

inline GroundStateReport exhaustive_ground_state(const IsingModel& model, const ProblemInstance& inst,
                                                 int histogram_buckets = 0) {
    auto report = exhaustive_ground_state(model, histogram_buckets);
    detail::attach_classes(report, inst, model.num_spins);
    return report;
}

// ---------------------------------------------------------------------------
// combinatorial route optimum

struct RouteSolution {
    double cost = 0.0;
    std::vector<std::vector<std::vector<int>>> route_sets;  // ties; each set sorted lexicographically
    std::vector<std::uint64_t> configurations;  // encoded indices, when the encoding fits 64 bits (n <= 8)
};

namespace detail {

inline double route_set_cost(const std::vector<std::vector<int>>& routes, const ProblemInstance& inst) {
    CompensatedSum cost;
    for (const auto& r : routes) {
        for (std::size_t q = 0; q + 1 < r.size(); ++q) cost.add(inst.weight(r[q], r[q + 1]));
        cost.add(inst.weight(r.back(), 0));
    }
    return cost.value();
}

}  // namespace detail

// Enumerates every ordered partition of the locations into k vehicle
// sequences: permutations of 1..n-1 crossed with the ways to cut the
// permutation into k nonempty segments.  Route sets that differ only in
// vehicle order are canonicalized by sorting, so ties are genuine.
inline RouteSolution optimal_routes(const ProblemInstance& inst) {
    const int n = inst.nodes();
    const int k = inst.vehicles();
    if (n > 9)
        throw resource_error("route enumeration limited to 9 nodes, got " + std::to_string(n) +
                             " ((n-1)! route orders would not fit the time budget)");

    std::vector<int> perm;
    for (int i = 1; i < n; ++i) perm.push_back(i);

    RouteSolution best;
    best.cost = std::numeric_limits<double>::infinity();
    std::set<std::vector<std::vector<int>>> ties;

    // cut positions: k-1 of the n-2 gaps between consecutive permutation slots
    std::vector<int> cuts(static_cast<std::size_t>(k) - 1);
    do {
        // first composition: cuts at 1, 2, ..., k-1
        for (int c = 0; c + 1 < k; ++c) cuts[static_cast<std::size_t>(c)] = c + 1;
        while (true) {
            std::vector<std::vector<int>> routes;
            int start = 0;
            for (int c = 0; c <= k - 1; ++c) {
                const int stop = c < k - 1 ? cuts[static_cast<std::size_t>(c)] : n - 1;
                std::vector<int> route{0};
                route.insert(route.end(), perm.begin() + start, perm.begin() + stop);
                routes.push_back(std::move(route));
                start = stop;
            }
            std::sort(routes.begin(), routes.end());
            const double cost = detail::route_set_cost(routes, inst);
            if (cost < best.cost - 1e-9) {
                best.cost = cost;
                ties.clear();
                ties.insert(routes);
            } else if (cost <= best.cost + 1e-9) {
                best.cost = std::min(best.cost, cost);
                ties.insert(routes);
            }

            // advance the cut combination; cuts[c] tops out where the
            // remaining cuts still leave every segment nonempty
            int c = k - 2;
            while (c >= 0 && cuts[static_cast<std::size_t>(c)] == n - 2 - (k - 2 - c)) --c;
            if (c < 0) break;
            ++cuts[static_cast<std::size_t>(c)];
            for (int d = c + 1; d < k - 1; ++d) cuts[static_cast<std::size_t>(d)] = cuts[static_cast<std::size_t>(d - 1)] + 1;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    for (const auto& routes : ties) {
        best.route_sets.push_back(routes);
        if (n <= 8) {
            std::vector<std::pair<int, int>> edges;
            for (const auto& r : routes) {
                for (std::size_t q = 0; q + 1 < r.size(); ++q) edges.emplace_back(r[q], r[q + 1]);
                edges.emplace_back(r.back(), 0);
            }
            best.configurations.push_back(Configuration::from_edges(n, edges).index());
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// degree-feasible minimum (subtours allowed)

struct CostMinimum {
    double cost = 0.0;
    std::vector<std::uint64_t> argmin;  // ascending
};

// Sweeps all 2^N configurations with incremental degree bookkeeping: each
// bit flip adjusts one out-degree, one in-degree, and the running route
// cost, so feasibility is an O(1) counter test per step.
inline CostMinimum degree_feasible_minimum(const ProblemInstance& inst) {
    const int n = inst.nodes();
    const int N = inst.num_vars();
    detail::check_sweep_width(N);

    std::vector<int> out(static_cast<std::size_t>(n), 0), in(static_cast<std::size_t>(n), 0);
    std::vector<int> target(static_cast<std::size_t>(n), 1);
    target[0] = inst.vehicles();
    std::vector<std::pair<int, int>> endpoints;
    std::vector<double> weights;
    for (int t = 0; t < N; ++t) {
        endpoints.push_back(var_pair(n, t));
        weights.push_back(inst.weight(endpoints.back().first, endpoints.back().second));
    }

    // number of degree equations currently violated; z = 0 violates all 2n
    int violated = 2 * n;
    auto adjust = [&](std::vector<int>& deg, int node, int dir) {
        if (deg[static_cast<std::size_t>(node)] == target[static_cast<std::size_t>(node)]) ++violated;
        deg[static_cast<std::size_t>(node)] += dir;
        if (deg[static_cast<std::size_t>(node)] == target[static_cast<std::size_t>(node)]) --violated;
    };

    const std::uint64_t count = std::uint64_t{1} << N;
    std::uint64_t z = 0;
    double cost = 0.0;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::uint64_t> candidates;

    for (std::uint64_t m = 1; m < count; ++m) {
        const int bit = std::countr_zero(m);
        const int dir = ((z >> bit) & 1u) ? -1 : 1;
        z ^= std::uint64_t{1} << bit;
        adjust(out, endpoints[static_cast<std::size_t>(bit)].first, dir);
        adjust(in, endpoints[static_cast<std::size_t>(bit)].second, dir);
        cost += dir * weights[static_cast<std::size_t>(bit)];
        if ((m & 255u) == 0) cost = route_cost(Configuration(n, z), inst);
        if (violated == 0 && cost <= best + 1e-6) {
            if (cost < best) best = cost;
            candidates.push_back(z);
            if (candidates.size() >= 4096 && (candidates.size() & (candidates.size() - 1)) == 0)
                std::erase_if(candidates,
                              [&](std::uint64_t c) { return route_cost(Configuration(n, c), inst) > best + 1e-6; });
        }
    }
    if (candidates.empty())
        throw validation_error("no degree-feasible configuration exists for n=" + std::to_string(n) +
                               ", k=" + std::to_string(inst.vehicles()));

    CostMinimum result;
    result.cost = std::numeric_limits<double>::infinity();
    for (std::uint64_t c : candidates) result.cost = std::min(result.cost, route_cost(Configuration(n, c), inst));
    std::sort(candidates.begin(), candidates.end());
    for (std::uint64_t c : candidates)
        if (route_cost(Configuration(n, c), inst) <= result.cost + 1e-9) result.argmin.push_back(c);
    return result;
}

// ---------------------------------------------------------------------------
// report rendering

inline void write_ground_state_report(std::ostream& out, const GroundStateReport& report) {
    out << "minimum " << detail::format_double(report.minimum) << "\n";
    out << "argmin " << report.argmin.size() << "\n";
    for (std::size_t a = 0; a < report.argmin.size(); ++a) {
        out << report.argmin[a] << " energy " << detail::format_double(report.argmin_energies[a]);
        if (a < report.argmin_classes.size()) out << " class " << to_string(report.argmin_classes[a]);
        out << "\n";
    }
    if (!report.histogram.empty()) {
        out << "histogram " << report.histogram.size() << " low " << detail::format_double(report.histogram_low)
            << " high " << detail::format_double(report.histogram_high) << "\n";
        for (std::size_t b = 0; b < report.histogram.size(); ++b) out << b << " " << report.histogram[b] << "\n";
    }
}

inline void write_ground_state_report(std::ostream& out, const GroundStateReport& report,
                                      const ProblemInstance& inst) {
    out << "minimum " << detail::format_double(report.minimum) << "\n";
    out << "argmin " << report.argmin.size() << "\n";
    for (std::size_t a = 0; a < report.argmin.size(); ++a) {
        Configuration config(inst.nodes(), report.argmin[a]);
        auto cls = classify(config, inst);
        out << report.argmin[a] << " energy " << detail::format_double(report.argmin_energies[a]) << " class "
            << to_string(cls.cls);
        for (const auto& r : cls.routes) {
            out << " route";
            for (int v : r) out << " " << v;
            out << " 0";
        }
        for (const auto& s : cls.subtours) {
            out << " subtour";
            for (int v : s) out << " " << v;
        }
        out << "\n";
    }
    if (!report.histogram.empty()) {
        out << "histogram " << report.histogram.size() << " low " << detail::format_double(report.histogram_low)
            << " high " << detail::format_double(report.histogram_high) << "\n";
        for (std::size_t b = 0; b < report.histogram.size(); ++b) out << b << " " << report.histogram[b] << "\n";
    }
}

}  // namespace vrpqaoa
