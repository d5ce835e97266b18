#pragma once

// Derivative-free outer loop for the variational angles.  Nelder-Mead is
// the reference optimizer (standard reflect/expand/contract/shrink
// coefficients 1, 2, 0.5, 0.5), with a cyclic coordinate-descent fallback.
// Both report the best value over every point they evaluated, so the trace
// is monotone even when the simplex wanders.  Multi-start seeds one run on
// the annealing-style ramp and the rest on deterministic perturbations of
// it, then reduces by (value, start index).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vrpqaoa/errors.hpp"
#include "vrpqaoa/simulator.hpp"

namespace vrpqaoa {

struct OptimizationRun {
    std::function<double(const std::vector<double>&)> objective;
    std::vector<double> start;
    int budget = 0;             // max objective evaluations
    double tolerance = 1e-6;    // simplex value spread / step size
    std::uint64_t seed = 0;     // unused by the deterministic methods themselves
};

struct TracePoint {
    int evaluations = 0;  // total evaluations when this best was found
    double best = 0.0;
};

struct OptimizationResult {
    std::vector<double> point;  // best point over all evaluations
    double value = 0.0;
    int evaluations = 0;
    std::vector<TracePoint> trace;
};

// betas then gammas, so a depth-p schedule flattens to 2p coordinates
inline std::vector<double> schedule_point(const QaoaSchedule& schedule) {
    std::vector<double> point(schedule.betas);
    point.insert(point.end(), schedule.gammas.begin(), schedule.gammas.end());
    return point;
}

inline QaoaSchedule schedule_from_point(const std::vector<double>& point) {
    if (point.empty() || point.size() % 2 != 0)
        throw std::domain_error("angle point needs an even, positive number of coordinates");
    const std::size_t depth = point.size() / 2;
    QaoaSchedule schedule;
    schedule.betas.assign(point.begin(), point.begin() + static_cast<std::ptrdiff_t>(depth));
    schedule.gammas.assign(point.begin() + static_cast<std::ptrdiff_t>(depth), point.end());
    return schedule;
}

// Coarse trotterized annealing path: mixer fades out while the cost angle
// ramps up, gamma_l = gamma_max*(l+1)/p and beta_l = beta_max*(1 - l/p).
inline QaoaSchedule ramp_schedule(int depth, double beta_max, double gamma_max) {
    if (depth < 1) throw std::domain_error("schedule depth must be positive");
    QaoaSchedule schedule;
    for (int l = 0; l < depth; ++l) {
        schedule.betas.push_back(beta_max * (1.0 - static_cast<double>(l) / depth));
        schedule.gammas.push_back(gamma_max * static_cast<double>(l + 1) / depth);
    }
    return schedule;
}

namespace detail {

// Budget-capped evaluation that tracks the running best and the trace.
class ObjectiveProbe {
  public:
    ObjectiveProbe(const OptimizationRun& run, OptimizationResult& result) : run_(run), result_(result) {}

    std::optional<double> operator()(const std::vector<double>& x) {
        if (result_.evaluations >= run_.budget) return std::nullopt;
        const double value = run_.objective(x);
        ++result_.evaluations;
        if (!std::isfinite(value))
            throw nonfinite_objective("objective returned a non-finite value after " +
                                          std::to_string(result_.evaluations) + " evaluations",
                                      x);
        if (result_.point.empty() || value < result_.value) {
            result_.point = x;
            result_.value = value;
            result_.trace.push_back({result_.evaluations, value});
        }
        return value;
    }

  private:
    const OptimizationRun& run_;
    OptimizationResult& result_;
};

inline void check_run(const OptimizationRun& run, int min_budget) {
    if (!run.objective) throw std::domain_error("optimization needs an objective");
    if (run.start.empty()) throw std::domain_error("optimization needs a start point");
    if (run.budget < min_budget)
        throw std::domain_error("budget " + std::to_string(run.budget) + " below the minimum " +
                                std::to_string(min_budget) + " for this dimension");
    if (!(run.tolerance > 0.0)) throw std::domain_error("tolerance must be positive");
}

}  // namespace detail

inline OptimizationResult nelder_mead(const OptimizationRun& run) {
    const std::size_t dim = run.start.size();
    detail::check_run(run, static_cast<int>(dim) + 2);
    OptimizationResult result;
    detail::ObjectiveProbe probe(run, result);

    // scipy-style initial simplex: nudge each coordinate by 5%, or by a
    // small absolute step where the start coordinate is zero
    std::vector<std::vector<double>> simplex;
    std::vector<double> values;
    simplex.push_back(run.start);
    for (std::size_t i = 0; i < dim; ++i) {
        auto vertex = run.start;
        vertex[i] = vertex[i] != 0.0 ? vertex[i] * 1.05 : 0.00025;
        simplex.push_back(std::move(vertex));
    }
    for (const auto& vertex : simplex) {
        const auto value = probe(vertex);
        if (!value) return result;  // budget cannot cover the simplex; pre guards this
        values.push_back(*value);
    }

    std::vector<std::size_t> order(simplex.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto sort_order = [&] {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    };

    while (result.evaluations < run.budget) {
        sort_order();
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];
        if (values[worst] - values[best] < run.tolerance) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i : order)
            if (i != worst)
                for (std::size_t c = 0; c < dim; ++c) centroid[c] += simplex[i][c];
        for (double& c : centroid) c /= static_cast<double>(dim);

        const auto along = [&](double t) {
            std::vector<double> x(dim);
            for (std::size_t c = 0; c < dim; ++c) x[c] = centroid[c] + t * (centroid[c] - simplex[worst][c]);
            return x;
        };

        const auto reflected = along(1.0);
        const auto fr = probe(reflected);
        if (!fr) break;
        if (*fr < values[best]) {
            const auto expanded = along(2.0);
            const auto fe = probe(expanded);
            if (!fe) break;
            if (*fe < *fr) {
                simplex[worst] = expanded;
                values[worst] = *fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = *fr;
            }
            continue;
        }
        if (*fr < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = *fr;
            continue;
        }
        const bool outside = *fr < values[worst];
        const auto contracted = along(outside ? 0.5 : -0.5);
        const auto fc = probe(contracted);
        if (!fc) break;
        if (outside ? *fc <= *fr : *fc < values[worst]) {
            simplex[worst] = contracted;
            values[worst] = *fc;
            continue;
        }
        // shrink everything toward the best vertex
        bool spent = false;
        for (std::size_t i : order) {
            if (i == best) continue;
            for (std::size_t c = 0; c < dim; ++c)
                simplex[i][c] = simplex[best][c] + 0.5 * (simplex[i][c] - simplex[best][c]);
            const auto fs = probe(simplex[i]);
            if (!fs) {
                spent = true;
                break;
            }
            values[i] = *fs;
        }
        if (spent) break;
    }
    return result;
}

// Cyclic coordinate search with a halving step, the fallback when the
// simplex method is not wanted.  Stops once the step drops below the
// tolerance or the budget runs out.
inline OptimizationResult coordinate_descent(const OptimizationRun& run) {
    const std::size_t dim = run.start.size();
    detail::check_run(run, 2 * static_cast<int>(dim) + 1);
    OptimizationResult result;
    detail::ObjectiveProbe probe(run, result);

    std::vector<double> x = run.start;
    const auto fx = probe(x);
    if (!fx) return result;
    double current = *fx;
    double step = 0.0;
    for (double c : x) step = std::max(step, 0.1 * std::abs(c));
    if (step == 0.0) step = 0.1;

    while (step >= run.tolerance && result.evaluations < run.budget) {
        bool improved = false;
        for (std::size_t c = 0; c < dim; ++c) {
            for (const double direction : {+1.0, -1.0}) {
                auto candidate = x;
                candidate[c] += direction * step;
                const auto fc = probe(candidate);
                if (!fc) return result;
                if (*fc < current) {
                    x = candidate;
                    current = *fc;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return result;
}

struct MultiStartResult {
    OptimizationResult best;
    int best_start = 0;                // index of the winning start
    std::vector<double> start_values;  // final value of every start, in order
};

// Start 0 is the ramp itself; later starts perturb each ramp coordinate by
// up to 30% of its magnitude (floor 0.1 rad).  The uniforms come from raw
// generator words so the stream is identical across standard libraries.
inline std::vector<std::vector<double>> perturbed_starts(const QaoaSchedule& ramp, int starts,
                                                         std::uint64_t seed) {
    if (starts < 1) throw std::domain_error("need at least one start");
    const std::vector<double> center = schedule_point(ramp);
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> points;
    points.push_back(center);
    for (int s = 1; s < starts; ++s) {
        auto point = center;
        for (double& c : point) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            c += (2.0 * u - 1.0) * 0.3 * std::max(std::abs(c), 0.1);
        }
        points.push_back(std::move(point));
    }
    return points;
}

inline MultiStartResult multi_start(const OptimizationRun& base, const QaoaSchedule& ramp, int starts,
                                    std::uint64_t seed) {
    const auto points = perturbed_starts(ramp, starts, seed);
    MultiStartResult outcome;
    for (int s = 0; s < starts; ++s) {
        OptimizationRun run = base;
        run.start = points[static_cast<std::size_t>(s)];
        run.seed = seed + static_cast<std::uint64_t>(s);
        OptimizationResult result = nelder_mead(run);
        outcome.start_values.push_back(result.value);
        if (s == 0 || result.value < outcome.best.value) {
            outcome.best = std::move(result);
            outcome.best_start = s;
        }
    }
    return outcome;
}

}  // namespace vrpqaoa
