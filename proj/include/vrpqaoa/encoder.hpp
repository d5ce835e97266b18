#pragma once

// QUBO / Ising encoding of a routing instance.
//
// The binary energy functional is
//
//     E(x) = x^T Q x + g^T x + c,   x in {0,1}^N
//
// with the route-cost weights on the linear part and penalty A on every
// squared degree deviation.  Two independent builders produce it: one by
// symbolic expansion of the penalty squares, one from the closed-form
// block structure of Q.  The closed-form builder cross-checks itself
// against the expansion coefficient by coefficient and refuses to return
// a model that would disagree on any assignment.
//
// The Ising form is defined by the substitution x = (s+1)/2; its
// coefficients are fixed by the identity ising(2x-1) == qubo(x), which is
// the only convention-free statement of equivalence.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "vrpqaoa/errors.hpp"
#include "vrpqaoa/instance.hpp"
#include "vrpqaoa/numeric.hpp"

namespace vrpqaoa {

struct QuboModel {
    int num_vars = 0;
    double penalty = 0.0;  // A used by the builder; 0 for hand-assembled models
    double offset = 0.0;
    std::vector<double> linear;     // g; diagonal of Q is folded in here (x^2 = x)
    std::vector<double> quadratic;  // Q, dense row-major N*N

    // Rounding residuals of the folded coefficients.  Odd multiples of A
    // (3A, 6A, ...) are generally not representable, and folding them onto
    // weights orders of magnitude smaller rounds further; the residuals
    // keep the exact real coefficient recoverable, so sums in which the
    // penalty parts cancel (feasible configurations) come out exact.
    // Empty vector / zero mean no correction.
    std::vector<double> linear_correction;
    double offset_correction = 0.0;

    double quad(int t, int u) const { return quadratic[static_cast<std::size_t>(t) * num_vars + u]; }
    double& quad(int t, int u) { return quadratic[static_cast<std::size_t>(t) * num_vars + u]; }

    // total coefficient of the monomial x_t x_u, independent of whether the
    // matrix is stored symmetric or triangular
    double pair_coefficient(int t, int u) const { return quad(t, u) + quad(u, t); }
};

struct IsingCoupling {
    int i = 0;
    int j = 0;  // i < j
    double value = 0.0;
};

struct IsingModel {
    int num_spins = 0;
    double offset = 0.0;
    double offset_correction = 0.0;  // see QuboModel::linear_correction
    std::vector<double> fields;
    std::vector<double> fields_correction;  // empty means all-zero
    std::vector<IsingCoupling> couplings;   // sorted by (i, j), zero-valued entries dropped
};

namespace detail {

inline void check_penalty(double penalty) {
    if (!(penalty > 0.0) || !std::isfinite(penalty))
        throw std::domain_error("penalty A must be positive and finite, got " + std::to_string(penalty));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// builders

// Expand A*(m - sum_{t in S} x_t)^2 into offset/linear/quadratic
// contributions, using x^2 = x on the diagonal.  Each degree equation of the
// instance contributes one such square: out- and in-degree 1 for every
// location, out- and in-degree k for the depot.
inline QuboModel build_qubo(const ProblemInstance& inst, double penalty) {
    detail::check_penalty(penalty);
    const int n = inst.nodes();
    const int N = inst.num_vars();
    QuboModel m;
    m.num_vars = N;
    m.penalty = penalty;
    m.quadratic.assign(static_cast<std::size_t>(N) * N, 0.0);
    std::vector<detail::TwoFold> lin(static_cast<std::size_t>(N));
    detail::TwoFold off;
    for (int t = 0; t < N; ++t) {
        auto [i, j] = var_pair(n, t);
        lin[static_cast<std::size_t>(t)].add(inst.weight(i, j));
    }

    // A-multiples are accumulated in unit-A steps: each step is exact, so
    // the TwoFold residual captures the whole multiple
    auto add_square = [&](const std::vector<int>& vars, int target) {
        for (int r = 0; r < target * target; ++r) off.add(penalty);
        for (std::size_t a = 0; a < vars.size(); ++a) {
            for (int r = 0; r < 2 * target - 1; ++r) lin[static_cast<std::size_t>(vars[a])].add(-penalty);
            for (std::size_t b = a + 1; b < vars.size(); ++b) {
                // symmetric half-entries; the pair total is 2A
                m.quad(vars[a], vars[b]) += penalty;
                m.quad(vars[b], vars[a]) += penalty;
            }
        }
    };

    std::vector<int> vars;
    vars.reserve(n - 1);
    for (int node = 0; node < n; ++node) {
        const int target = node == 0 ? inst.vehicles() : 1;
        vars.clear();
        for (int j = 0; j < n; ++j)
            if (j != node) vars.push_back(var_index(n, node, j));
        add_square(vars, target);
        vars.clear();
        for (int i = 0; i < n; ++i)
            if (i != node) vars.push_back(var_index(n, i, node));
        add_square(vars, target);
    }

    m.linear.resize(N);
    m.linear_correction.resize(N);
    for (int t = 0; t < N; ++t) {
        lin[static_cast<std::size_t>(t)].normalize();
        m.linear[t] = lin[static_cast<std::size_t>(t)].value;
        m.linear_correction[t] = lin[static_cast<std::size_t>(t)].residual;
    }
    off.normalize();
    m.offset = off.value;
    m.offset_correction = off.residual;
    return m;
}

namespace detail {

// Coefficient-level comparison of two models built for the same instance.
// Agreement coefficient by coefficient is agreement on every assignment, so
// on mismatch we can name a single witnessing x.
inline void verify_same_polynomial(const QuboModel& a, const QuboModel& b) {
    const int N = a.num_vars;
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)}); };
    if (!close(a.offset, b.offset))
        throw formulation_mismatch("closed-form offset disagrees with the penalty expansion",
                                   std::vector<int>(N, 0));
    for (int t = 0; t < N; ++t) {
        if (!close(a.linear[t], b.linear[t])) {
            std::vector<int> x(N, 0);
            x[t] = 1;
            throw formulation_mismatch("closed-form linear coefficient " + std::to_string(t) +
                                           " disagrees with the penalty expansion",
                                       std::move(x));
        }
        for (int u = t + 1; u < N; ++u) {
            if (!close(a.pair_coefficient(t, u), b.pair_coefficient(t, u))) {
                std::vector<int> x(N, 0);
                x[t] = x[u] = 1;
                throw formulation_mismatch("closed-form quadratic coefficient (" + std::to_string(t) + "," +
                                               std::to_string(u) + ") disagrees with the penalty expansion",
                                           std::move(x));
            }
        }
    }
}

}  // namespace detail

// Assemble the same polynomial from its block structure instead of
// term-by-term expansion:
//
//   Q = A * ( sum_j zT[j] zT[j]^T  +  I_n (x) J_{n-1} )
//   g = W - 2A(k-1) * (source-depot + target-depot indicators) - 4A * ones
//   c = 2A(n-1) + 2A k^2
//
// where zT[j] marks the variables with target node j, and the Kronecker
// block I_n (x) J_{n-1} is the same-source indicator (the flattened order
// groups variables by source).  The 2A diagonal of Q is folded into g.
inline QuboModel build_qubo_closed_form(const ProblemInstance& inst, double penalty) {
    detail::check_penalty(penalty);
    const int n = inst.nodes();
    const int k = inst.vehicles();
    const int N = inst.num_vars();
    const double A = penalty;

    QuboModel m;
    m.num_vars = N;
    m.penalty = A;
    m.linear.assign(N, 0.0);
    m.quadratic.assign(static_cast<std::size_t>(N) * N, 0.0);

    // target-indicator outer products
    std::vector<int> zT;
    for (int node = 0; node < n; ++node) {
        zT.clear();
        for (int t = 0; t < N; ++t)
            if (var_pair(n, t).second == node) zT.push_back(t);
        for (int a : zT)
            for (int b : zT) m.quad(a, b) += A;
    }
    // I_n (x) J_{n-1}: all-ones blocks over the per-source groups
    for (int src = 0; src < n; ++src)
        for (int a = 0; a < n - 1; ++a)
            for (int b = 0; b < n - 1; ++b) m.quad(src * (n - 1) + a, src * (n - 1) + b) += A;

    m.linear.resize(N);
    m.linear_correction.resize(N);
    const double twoA = 2.0 * A;  // exact: power-of-two multiple
    for (int t = 0; t < N; ++t) {
        auto [i, j] = var_pair(n, t);
        detail::TwoFold g;
        g.add(inst.weight(i, j));
        g.add(-4.0 * A);
        for (int r = 0; r < k - 1; ++r) {
            if (i == 0) g.add(-twoA);
            if (j == 0) g.add(-twoA);
        }
        // fold the 2A diagonal of Q
        g.add(m.quad(t, t));
        m.quad(t, t) = 0.0;
        g.normalize();
        m.linear[t] = g.value;
        m.linear_correction[t] = g.residual;
    }
    detail::TwoFold off;
    for (int r = 0; r < n - 1 + k * k; ++r) off.add(twoA);
    off.normalize();
    m.offset = off.value;
    m.offset_correction = off.residual;

    detail::verify_same_polynomial(build_qubo(inst, penalty), m);
    return m;
}

// ---------------------------------------------------------------------------
// energy evaluation

inline double qubo_energy(const QuboModel& m, const std::vector<int>& x) {
    if (static_cast<int>(x.size()) != m.num_vars)
        throw std::domain_error("assignment length " + std::to_string(x.size()) + " does not match " +
                                std::to_string(m.num_vars) + " variables");
    for (int v : x)
        if (v != 0 && v != 1) throw std::domain_error("assignment entries must be 0 or 1, got " + std::to_string(v));
    detail::CompensatedSum e;
    e.add(m.offset);
    e.add(m.offset_correction);
    const bool corrected = !m.linear_correction.empty();
    for (int t = 0; t < m.num_vars; ++t) {
        if (!x[t]) continue;
        e.add(m.linear[t]);
        if (corrected) e.add(m.linear_correction[t]);
        const double* row = m.quadratic.data() + static_cast<std::size_t>(t) * m.num_vars;
        for (int u = 0; u < m.num_vars; ++u)
            if (x[u] && row[u] != 0.0) e.add(row[u]);
    }
    return e.value();
}

inline double qubo_energy(const QuboModel& m, std::uint64_t index) {
    detail::CompensatedSum e;
    e.add(m.offset);
    e.add(m.offset_correction);
    const bool corrected = !m.linear_correction.empty();
    for (int t = 0; t < m.num_vars; ++t) {
        if (!((index >> t) & 1u)) continue;
        e.add(m.linear[t]);
        if (corrected) e.add(m.linear_correction[t]);
        const double* row = m.quadratic.data() + static_cast<std::size_t>(t) * m.num_vars;
        for (int u = 0; u < m.num_vars; ++u)
            if (((index >> u) & 1u) && row[u] != 0.0) e.add(row[u]);
    }
    return e.value();
}

inline double qubo_energy(const QuboModel& m, const Configuration& config) {
    if (config.num_vars() != m.num_vars)
        throw std::domain_error("configuration has " + std::to_string(config.num_vars()) + " variables, model has " +
                                std::to_string(m.num_vars));
    return qubo_energy(m, config.index());
}

// ---------------------------------------------------------------------------
// Ising conversion

// Substituting x = (s+1)/2 into x^T Q x + g^T x + c and grouping:
//   J_tu = (Q_tu + Q_ut) / 4
//   h_t  = g_t / 2 + sum_{u != t} (Q_tu + Q_ut) / 4
//   d    = c + sum_t g_t / 2 + sum_{t<u} (Q_tu + Q_ut) / 4
// A leftover diagonal (for hand-made models) acts linearly and is folded
// into g first.
inline IsingModel qubo_to_ising(const QuboModel& m) {
    const int N = m.num_vars;
    IsingModel ising;
    ising.num_spins = N;
    std::vector<detail::TwoFold> h(static_cast<std::size_t>(N));
    detail::TwoFold d;
    d.add(m.offset);
    d.add(m.offset_correction);
    for (int t = 0; t < N; ++t) {
        // halving is exact, so the correction splits cleanly
        const double gt = (m.linear[t] + m.quad(t, t)) / 2.0;
        h[static_cast<std::size_t>(t)].add(gt);
        d.add(gt);
        if (!m.linear_correction.empty()) {
            h[static_cast<std::size_t>(t)].add(m.linear_correction[t] / 2.0);
            d.add(m.linear_correction[t] / 2.0);
        }
    }
    for (int t = 0; t < N; ++t) {
        for (int u = t + 1; u < N; ++u) {
            const double q = m.pair_coefficient(t, u);
            if (q == 0.0) continue;
            ising.couplings.push_back({t, u, q / 4.0});
            h[static_cast<std::size_t>(t)].add(q / 4.0);
            h[static_cast<std::size_t>(u)].add(q / 4.0);
            d.add(q / 4.0);
        }
    }
    ising.fields.resize(N);
    ising.fields_correction.resize(N);
    for (int t = 0; t < N; ++t) {
        h[static_cast<std::size_t>(t)].normalize();
        ising.fields[t] = h[static_cast<std::size_t>(t)].value;
        ising.fields_correction[t] = h[static_cast<std::size_t>(t)].residual;
    }
    d.normalize();
    ising.offset = d.value;
    ising.offset_correction = d.residual;
    return ising;
}

inline double ising_energy(const IsingModel& m, const std::vector<int>& spins) {
    if (static_cast<int>(spins.size()) != m.num_spins)
        throw std::domain_error("spin vector length " + std::to_string(spins.size()) + " does not match " +
                                std::to_string(m.num_spins) + " spins");
    for (int s : spins)
        if (s != 1 && s != -1) throw std::domain_error("spin entries must be -1 or +1, got " + std::to_string(s));
    detail::CompensatedSum e;
    e.add(m.offset);
    e.add(m.offset_correction);
    const bool corrected = !m.fields_correction.empty();
    for (int t = 0; t < m.num_spins; ++t) {
        e.add(m.fields[t] * spins[t]);
        if (corrected) e.add(m.fields_correction[t] * spins[t]);
    }
    for (const auto& c : m.couplings) e.add(c.value * spins[c.i] * spins[c.j]);
    return e.value();
}

// spin image of a configuration index: bit set -> +1, clear -> -1
inline double ising_energy(const IsingModel& m, std::uint64_t index) {
    detail::CompensatedSum e;
    e.add(m.offset);
    e.add(m.offset_correction);
    const bool corrected = !m.fields_correction.empty();
    for (int t = 0; t < m.num_spins; ++t) {
        const double sign = ((index >> t) & 1u) ? 1.0 : -1.0;
        e.add(sign * m.fields[t]);
        if (corrected) e.add(sign * m.fields_correction[t]);
    }
    for (const auto& c : m.couplings) {
        const bool same = (((index >> c.i) ^ (index >> c.j)) & 1u) == 0;
        e.add(same ? c.value : -c.value);
    }
    return e.value();
}

// ---------------------------------------------------------------------------
// serialization
//
// Both documents record the polynomial sparsely, one line per nonzero
// monomial.  Storage orientation of Q is not preserved: the parser places
// each pair coefficient in the upper triangle.

inline void write_qubo(std::ostream& out, const QuboModel& m) {
    out << "qubo\n";
    out << "vars " << m.num_vars << "\n";
    out << "penalty " << detail::format_double(m.penalty) << "\n";
    out << "offset " << detail::format_double(m.offset) << "\n";
    std::vector<int> lin;
    for (int t = 0; t < m.num_vars; ++t)
        if (m.linear[t] != 0.0) lin.push_back(t);
    out << "linear " << lin.size() << "\n";
    for (int t : lin) out << t << " " << detail::format_double(m.linear[t]) << "\n";
    std::vector<std::pair<int, int>> pairs;
    for (int t = 0; t < m.num_vars; ++t)
        for (int u = t + 1; u < m.num_vars; ++u)
            if (m.pair_coefficient(t, u) != 0.0) pairs.emplace_back(t, u);
    out << "pairs " << pairs.size() << "\n";
    for (auto [t, u] : pairs) out << t << " " << u << " " << detail::format_double(m.pair_coefficient(t, u)) << "\n";
}

inline QuboModel parse_qubo(std::istream& in) {
    auto tokens = detail::tokenize_document(in);
    std::size_t pos = 0;
    auto next = [&](const char* what) -> const std::string& {
        if (pos >= tokens.size()) throw parse_error(std::string("qubo document: missing ") + what);
        return tokens[pos++];
    };
    auto expect = [&](const char* keyword) {
        const auto& tok = next(keyword);
        if (tok != keyword) throw parse_error("qubo document: expected '" + std::string(keyword) + "', got '" + tok + "'");
    };
    expect("qubo");
    expect("vars");
    const int N = detail::parse_int(next("variable count"), "variable count");
    if (N <= 0) throw validation_error("qubo document: variable count must be positive, got " + std::to_string(N));
    QuboModel m;
    m.num_vars = N;
    m.linear.assign(N, 0.0);
    m.quadratic.assign(static_cast<std::size_t>(N) * N, 0.0);
    expect("penalty");
    m.penalty = detail::parse_real(next("penalty"), "penalty");
    expect("offset");
    m.offset = detail::parse_real(next("offset"), "offset");
    expect("linear");
    const int nlin = detail::parse_int(next("linear entry count"), "linear entry count");
    for (int e = 0; e < nlin; ++e) {
        const int t = detail::parse_int(next("linear index"), "linear index");
        if (t < 0 || t >= N) throw validation_error("qubo document: linear index out of range: " + std::to_string(t));
        m.linear[t] = detail::parse_real(next("linear value"), "linear value");
    }
    expect("pairs");
    const int npairs = detail::parse_int(next("pair count"), "pair count");
    for (int e = 0; e < npairs; ++e) {
        const int t = detail::parse_int(next("pair index"), "pair index");
        const int u = detail::parse_int(next("pair index"), "pair index");
        if (t < 0 || u < 0 || t >= N || u >= N || t == u)
            throw validation_error("qubo document: bad pair (" + std::to_string(t) + "," + std::to_string(u) + ")");
        m.quad(std::min(t, u), std::max(t, u)) = detail::parse_real(next("pair value"), "pair value");
    }
    if (pos != tokens.size()) throw parse_error("qubo document: trailing content after '" + tokens[pos] + "'");
    return m;
}

inline QuboModel parse_qubo(const std::string& text) {
    std::istringstream in(text);
    return parse_qubo(in);
}

inline void write_ising(std::ostream& out, const IsingModel& m) {
    out << "ising\n";
    out << "spins " << m.num_spins << "\n";
    out << "offset " << detail::format_double(m.offset) << "\n";
    std::vector<int> nz;
    for (int t = 0; t < m.num_spins; ++t)
        if (m.fields[t] != 0.0) nz.push_back(t);
    out << "fields " << nz.size() << "\n";
    for (int t : nz) out << t << " " << detail::format_double(m.fields[t]) << "\n";
    out << "couplings " << m.couplings.size() << "\n";
    for (const auto& c : m.couplings)
        out << c.i << " " << c.j << " " << detail::format_double(c.value) << "\n";
}

inline IsingModel parse_ising(std::istream& in) {
    auto tokens = detail::tokenize_document(in);
    std::size_t pos = 0;
    auto next = [&](const char* what) -> const std::string& {
        if (pos >= tokens.size()) throw parse_error(std::string("ising document: missing ") + what);
        return tokens[pos++];
    };
    auto expect = [&](const char* keyword) {
        const auto& tok = next(keyword);
        if (tok != keyword)
            throw parse_error("ising document: expected '" + std::string(keyword) + "', got '" + tok + "'");
    };
    expect("ising");
    expect("spins");
    const int N = detail::parse_int(next("spin count"), "spin count");
    if (N <= 0) throw validation_error("ising document: spin count must be positive, got " + std::to_string(N));
    IsingModel m;
    m.num_spins = N;
    m.fields.assign(N, 0.0);
    expect("offset");
    m.offset = detail::parse_real(next("offset"), "offset");
    expect("fields");
    const int nf = detail::parse_int(next("field entry count"), "field entry count");
    for (int e = 0; e < nf; ++e) {
        const int t = detail::parse_int(next("field index"), "field index");
        if (t < 0 || t >= N) throw validation_error("ising document: field index out of range: " + std::to_string(t));
        m.fields[t] = detail::parse_real(next("field value"), "field value");
    }
    expect("couplings");
    const int nc = detail::parse_int(next("coupling count"), "coupling count");
    for (int e = 0; e < nc; ++e) {
        const int i = detail::parse_int(next("coupling index"), "coupling index");
        const int j = detail::parse_int(next("coupling index"), "coupling index");
        if (i < 0 || j < 0 || i >= N || j >= N || i >= j)
            throw validation_error("ising document: bad coupling (" + std::to_string(i) + "," + std::to_string(j) +
                                   "), need i < j");
        m.couplings.push_back({i, j, detail::parse_real(next("coupling value"), "coupling value")});
    }
    if (pos != tokens.size()) throw parse_error("ising document: trailing content after '" + tokens[pos] + "'");
    std::sort(m.couplings.begin(), m.couplings.end(),
              [](const IsingCoupling& a, const IsingCoupling& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    return m;
}

inline IsingModel parse_ising(const std::string& text) {
    std::istringstream in(text);
    return parse_ising(in);
}

}  // namespace vrpqaoa
