#pragma once

// Exact statevector engine for the layered variational circuit.  The cost
// Hamiltonian is diagonal in the computational basis, so a layer is one
// pointwise phase pass followed by one in-place butterfly pass per qubit
// for the transverse mixer.  Amplitudes live in a flat array indexed by
// configuration integer: bit t of the index is variable x_t, so simulator
// indices line up with instance decoding with no translation.
//
// evolve() additionally exploits that the diagonal is a quadratic form over
// +/-1 spins: the phase factor exp(-i*gamma*C(z)) then factorizes into a
// product of two-valued per-field and per-coupling terms, so a whole block
// of phases can be assembled from a handful of sincos evaluations by
// recursive doubling.  Combined with cache blocking (low qubits mixed while
// a block is resident, high qubits mixed across column panels) this keeps a
// deep wide circuit within the interactive time budget.  Diagonals that are
// not quadratic forms fall back to the plain per-amplitude path.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "vrpqaoa/encoder.hpp"
#include "vrpqaoa/errors.hpp"
#include "vrpqaoa/numeric.hpp"

namespace vrpqaoa {

struct Statevector {
    int num_qubits = 0;
    std::vector<std::complex<double>> amplitudes;  // 2^N entries

    double norm() const {
        detail::CompensatedSum s;
        for (const auto& a : amplitudes) s.add(std::norm(a));
        return std::sqrt(s.value());
    }
};

struct CostDiagonal {
    int num_qubits = 0;
    std::vector<double> values;  // 2^N entries, values[z] = energy of z
};

struct QaoaSchedule {
    std::vector<double> betas;
    std::vector<double> gammas;

    int depth() const { return static_cast<int>(betas.size()); }
};

namespace detail {

inline void check_qubit_count(int num_qubits) {
    if (num_qubits < 1) throw std::domain_error("need at least one qubit");
    if (num_qubits > 24)
        throw resource_error("statevector limited to 24 qubits, got " + std::to_string(num_qubits) +
                             " (2^N amplitudes would not fit the memory budget)");
}

inline void check_same_width(const Statevector& state, const CostDiagonal& diag) {
    if (state.num_qubits != diag.num_qubits)
        throw std::domain_error("state has " + std::to_string(state.num_qubits) + " qubits, diagonal has " +
                                std::to_string(diag.num_qubits));
}

inline void check_schedule(const QaoaSchedule& schedule) {
    if (schedule.betas.empty() || schedule.betas.size() != schedule.gammas.size())
        throw std::domain_error("schedule needs matching beta/gamma lists with at least one layer");
    for (double b : schedule.betas)
        if (!std::isfinite(b)) throw std::domain_error("mixer angles must be finite");
    for (double g : schedule.gammas)
        if (!std::isfinite(g)) throw std::domain_error("cost angles must be finite");
}

}  // namespace detail

inline Statevector init_plus(int num_qubits) {
    detail::check_qubit_count(num_qubits);
    Statevector state;
    state.num_qubits = num_qubits;
    const std::size_t size = std::size_t{1} << num_qubits;
    state.amplitudes.assign(size, std::complex<double>(std::pow(2.0, -0.5 * num_qubits), 0.0));
    return state;
}

inline CostDiagonal build_cost_diagonal(const IsingModel& model) {
    detail::check_qubit_count(model.num_spins);
    CostDiagonal diag;
    diag.num_qubits = model.num_spins;
    const std::size_t size = std::size_t{1} << model.num_spins;
    diag.values.resize(size);
    for (std::size_t z = 0; z < size; ++z) diag.values[z] = ising_energy(model, static_cast<std::uint64_t>(z));
    return diag;
}

// a_z *= exp(-i * gamma * C(z))
inline void apply_cost_phase(Statevector& state, double gamma, const CostDiagonal& diag) {
    detail::check_same_width(state, diag);
    if (gamma == 0.0) return;
    const std::size_t size = state.amplitudes.size();
    std::complex<double>* a = state.amplitudes.data();
    const double* c = diag.values.data();
    for (std::size_t z = 0; z < size; ++z) {
        const double phi = -gamma * c[z];
        const double cp = std::cos(phi);
        const double sp = std::sin(phi);
        const double re = a[z].real();
        const double im = a[z].imag();
        a[z] = {re * cp - im * sp, re * sp + im * cp};
    }
}

// Per qubit q, the 2x2 kernel [[cos b, i sin b], [i sin b, cos b]] over the
// amplitude pairs differing in bit q.
inline void apply_mixer(Statevector& state, double beta) {
    if (beta == 0.0) return;
    const double cb = std::cos(beta);
    const double sb = std::sin(beta);
    const std::size_t size = state.amplitudes.size();
    std::complex<double>* a = state.amplitudes.data();
    for (int q = 0; q < state.num_qubits; ++q) {
        const std::size_t step = std::size_t{1} << q;
        for (std::size_t base = 0; base < size; base += 2 * step) {
            for (std::size_t off = 0; off < step; ++off) {
                const std::size_t i0 = base + off;
                const std::size_t i1 = i0 + step;
                const double x0 = a[i0].real(), y0 = a[i0].imag();
                const double x1 = a[i1].real(), y1 = a[i1].imag();
                a[i0] = {cb * x0 - sb * y1, cb * y0 + sb * x1};
                a[i1] = {cb * x1 - sb * y0, cb * y1 + sb * x0};
            }
        }
    }
}

namespace detail {

// Multilinear structure recovered from a diagonal that is a quadratic form
// over +/-1 spins: C(z) = offset + sum_t h_t s_t + sum_{t<u} J_tu s_t s_u.
struct DiagonalQuadratic {
    bool valid = false;
    int num_spins = 0;
    double offset = 0.0;
    std::vector<double> fields;     // h_t
    std::vector<double> couplings;  // dense row-major, entry t*N+u for t<u

    double coupling(int t, int u) const { return couplings[static_cast<std::size_t>(t) * num_spins + u]; }

    double evaluate(std::uint64_t z) const {
        double e = offset;
        for (int t = 0; t < num_spins; ++t) {
            const double st = (z >> t & 1) ? 1.0 : -1.0;
            e += fields[static_cast<std::size_t>(t)] * st;
            for (int u = t + 1; u < num_spins; ++u)
                e += coupling(t, u) * st * ((z >> u & 1) ? 1.0 : -1.0);
        }
        return e;
    }
};

// Probe the diagonal at the all-down state, single flips and double flips to
// solve for the coefficients, then verify the reconstruction on a sample of
// entries.  A diagonal that is not a quadratic form fails verification.
inline DiagonalQuadratic extract_quadratic(const CostDiagonal& diag) {
    const int N = diag.num_qubits;
    const double* v = diag.values.data();
    DiagonalQuadratic q;
    q.num_spins = N;
    q.fields.assign(static_cast<std::size_t>(N), 0.0);
    q.couplings.assign(static_cast<std::size_t>(N) * N, 0.0);

    const double c0 = v[0];
    for (int t = 0; t < N; ++t)
        for (int u = t + 1; u < N; ++u) {
            const double p = v[(std::uint64_t{1} << t) | (std::uint64_t{1} << u)];
            q.couplings[static_cast<std::size_t>(t) * N + u] =
                (p - v[std::uint64_t{1} << t] - v[std::uint64_t{1} << u] + c0) / 4.0;
        }
    for (int t = 0; t < N; ++t) {
        double row = 0.0;
        for (int u = 0; u < N; ++u)
            if (u != t) row += q.coupling(std::min(t, u), std::max(t, u));
        q.fields[static_cast<std::size_t>(t)] = (v[std::uint64_t{1} << t] - c0) / 2.0 + row;
    }
    double d = c0;
    for (int t = 0; t < N; ++t) {
        d += q.fields[static_cast<std::size_t>(t)];
        for (int u = t + 1; u < N; ++u) d -= q.coupling(t, u);
    }
    q.offset = d;

    const std::size_t size = diag.values.size();
    double scale = 1.0;
    auto matches = [&](std::uint64_t z) { return std::abs(q.evaluate(z) - v[z]) <= 1e-6 * scale; };
    std::mt19937_64 rng(0x71ad5eedULL);
    const std::size_t samples = std::min<std::size_t>(size, 512);
    std::vector<std::uint64_t> probes;
    probes.reserve(samples + 1);
    probes.push_back(size - 1);  // all spins up
    if (size <= samples)
        for (std::uint64_t z = 0; z < size; ++z) probes.push_back(z);
    else
        for (std::size_t i = 0; i < samples; ++i) probes.push_back(rng() % size);
    for (std::uint64_t z : probes) scale = std::max(scale, std::abs(v[z]));
    q.valid = std::all_of(probes.begin(), probes.end(), matches);
    return q;
}

// explicit product: operator* on std::complex takes a NaN-recovery slow
// path (__muldc3) that dominates the phase kernels
inline std::complex<double> cmul(std::complex<double> a, std::complex<double> b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline void mix_pair(std::complex<double>& a0, std::complex<double>& a1, double cb, double sb) {
    const double x0 = a0.real(), y0 = a0.imag();
    const double x1 = a1.real(), y1 = a1.imag();
    a0 = {cb * x0 - sb * y1, cb * y0 + sb * x1};
    a1 = {cb * x1 - sb * y0, cb * y1 + sb * x0};
}

// One cost-phase-plus-mixer layer using the factorized phases.  Blocks of
// 2^b amplitudes get their phase vector built by doubling (b sincos per
// block instead of 2^b) and are mixed on the low qubits while cache
// resident; the high qubits are mixed afterwards over column panels so the
// whole state is streamed only twice per layer.
inline void fused_layer(Statevector& state, double gamma, double beta, const DiagonalQuadratic& quad,
                        int block_qubits, std::vector<std::complex<double>>& qlocal,
                        std::vector<std::complex<double>>& rblock, std::vector<std::complex<double>>& kscratch) {
    const int N = state.num_qubits;
    const int b = block_qubits;
    const int high = N - b;
    const std::size_t block = std::size_t{1} << b;
    const std::size_t blocks = std::size_t{1} << high;
    std::complex<double>* a = state.amplitudes.data();
    const double cb = std::cos(beta);
    const double sb = std::sin(beta);

    if (gamma != 0.0) {
        // phase tensor over the low qubits alone: fields plus low-low couplings
        qlocal[0] = 1.0;
        for (int m = 0; m < b; ++m) {
            const std::size_t half = std::size_t{1} << m;
            kscratch[0] = 1.0;
            for (int t = 0; t < m; ++t) {
                const std::size_t s = std::size_t{1} << t;
                const auto f = std::polar(1.0, -gamma * quad.coupling(t, m));
                const auto fc = std::conj(f);
                for (std::size_t z = 0; z < s; ++z) {
                    kscratch[s + z] = cmul(kscratch[z], f);
                    kscratch[z] = cmul(kscratch[z], fc);
                }
            }
            const auto g = std::polar(1.0, -gamma * quad.fields[static_cast<std::size_t>(m)]);
            const auto gc = std::conj(g);
            for (std::size_t z = 0; z < half; ++z) {
                qlocal[half + z] = cmul(qlocal[z], cmul(g, kscratch[z]));
                qlocal[z] = cmul(qlocal[z], cmul(gc, std::conj(kscratch[z])));
            }
        }
    }

    for (std::size_t zh = 0; zh < blocks; ++zh) {
        std::complex<double>* blk = a + zh * block;
        if (gamma != 0.0) {
            // seed with offset plus everything internal to the high bits
            double ehigh = quad.offset;
            for (int t = 0; t < high; ++t) {
                const double st = (zh >> t & 1) ? 1.0 : -1.0;
                ehigh += quad.fields[static_cast<std::size_t>(b + t)] * st;
                for (int u = t + 1; u < high; ++u)
                    ehigh += quad.coupling(b + t, b + u) * st * ((zh >> u & 1) ? 1.0 : -1.0);
            }
            rblock[0] = std::polar(1.0, -gamma * ehigh);
            // cross couplings act as effective fields on the low qubits
            for (int m = 0; m < b; ++m) {
                double geff = 0.0;
                for (int t = 0; t < high; ++t)
                    geff += quad.coupling(m, b + t) * ((zh >> t & 1) ? 1.0 : -1.0);
                const std::size_t half = std::size_t{1} << m;
                const auto f = std::polar(1.0, -gamma * geff);
                const auto fc = std::conj(f);
                for (std::size_t z = 0; z < half; ++z) {
                    rblock[half + z] = cmul(rblock[z], f);
                    rblock[z] = cmul(rblock[z], fc);
                }
            }
            for (std::size_t z = 0; z < block; ++z) blk[z] = cmul(blk[z], cmul(qlocal[z], rblock[z]));
        }
        if (beta != 0.0) {
            for (int qb = 0; qb < b; ++qb) {
                const std::size_t step = std::size_t{1} << qb;
                for (std::size_t base = 0; base < block; base += 2 * step)
                    for (std::size_t off = 0; off < step; ++off)
                        mix_pair(blk[base + off], blk[base + off + step], cb, sb);
            }
        }
    }

    if (beta != 0.0 && high > 0) {
        const std::size_t panel = std::min<std::size_t>(block, 64);
        for (std::size_t c0 = 0; c0 < block; c0 += panel) {
            for (int qb = 0; qb < high; ++qb) {
                const std::size_t step = std::size_t{1} << qb;
                for (std::size_t r0 = 0; r0 < blocks; r0 += 2 * step)
                    for (std::size_t r = r0; r < r0 + step; ++r) {
                        std::complex<double>* row0 = a + r * block + c0;
                        std::complex<double>* row1 = a + (r + step) * block + c0;
                        for (std::size_t c = 0; c < panel; ++c) mix_pair(row0[c], row1[c], cb, sb);
                    }
            }
        }
    }
}

}  // namespace detail

inline Statevector evolve(const QaoaSchedule& schedule, const CostDiagonal& diag) {
    detail::check_schedule(schedule);
    Statevector state = init_plus(diag.num_qubits);
    const auto quad = detail::extract_quadratic(diag);
    if (!quad.valid) {
        for (int layer = 0; layer < schedule.depth(); ++layer) {
            apply_cost_phase(state, schedule.gammas[static_cast<std::size_t>(layer)], diag);
            apply_mixer(state, schedule.betas[static_cast<std::size_t>(layer)]);
        }
        return state;
    }
    const int block_qubits = std::min(diag.num_qubits, 12);
    std::vector<std::complex<double>> qlocal(std::size_t{1} << block_qubits);
    std::vector<std::complex<double>> rblock(std::size_t{1} << block_qubits);
    std::vector<std::complex<double>> kscratch(std::size_t{1} << block_qubits);
    for (int layer = 0; layer < schedule.depth(); ++layer)
        detail::fused_layer(state, schedule.gammas[static_cast<std::size_t>(layer)],
                            schedule.betas[static_cast<std::size_t>(layer)], quad, block_qubits, qlocal, rblock,
                            kscratch);
    return state;
}

inline double expectation(const Statevector& state, const CostDiagonal& diag) {
    detail::check_same_width(state, diag);
    detail::CompensatedSum e;
    for (std::size_t z = 0; z < state.amplitudes.size(); ++z)
        e.add(std::norm(state.amplitudes[z]) * diag.values[z]);
    return e.value();
}

// Seeded inverse-CDF sampling over |a_z|^2.  The uniforms are derived from
// the raw generator words rather than a distribution object so that the
// stream is identical across standard libraries.
inline std::map<std::uint64_t, std::uint64_t> sample(const Statevector& state, std::uint64_t shots,
                                                     std::uint64_t seed) {
    if (shots < 1) throw std::domain_error("need at least one shot");
    const std::size_t size = state.amplitudes.size();
    std::vector<double> cumulative(size);
    detail::CompensatedSum total;
    for (std::size_t z = 0; z < size; ++z) {
        total.add(std::norm(state.amplitudes[z]));
        cumulative[z] = total.value();
    }
    const double full = cumulative.back();

    std::mt19937_64 rng(seed);
    std::map<std::uint64_t, std::uint64_t> histogram;
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * full;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t z = it == cumulative.end() ? size - 1 : static_cast<std::size_t>(it - cumulative.begin());
        ++histogram[static_cast<std::uint64_t>(z)];
    }
    return histogram;
}

// highest-probability entries, ties broken toward the smaller index
inline std::vector<std::pair<std::uint64_t, double>> top_probabilities(const Statevector& state, int count) {
    if (count < 1) throw std::domain_error("need at least one entry");
    std::vector<std::pair<std::uint64_t, double>> all;
    all.reserve(state.amplitudes.size());
    for (std::size_t z = 0; z < state.amplitudes.size(); ++z)
        all.emplace_back(static_cast<std::uint64_t>(z), std::norm(state.amplitudes[z]));
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(count), all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                      [](const auto& lhs, const auto& rhs) {
                          return lhs.second != rhs.second ? lhs.second > rhs.second : lhs.first < rhs.first;
                      });
    all.resize(keep);
    return all;
}

}  // namespace vrpqaoa
