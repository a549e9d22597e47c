// Copyright 2026 The spinsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Inter-injection dephasing on the static pseudospin pair: random Z phase
// kicks in each buffer window, collective with probability mu, independent
// with probability 1-mu, per-window flip probability p = (1 - exp(-Tb/Td))/2.
// Provided both as the exact CPTP channel and as a seeded Monte Carlo
// estimator interleaved with the conditioned scattering map.

#ifndef SPINSIM_NOISE_HPP
#define SPINSIM_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "spinsim/channel.hpp"
#include "spinsim/errors.hpp"
#include "spinsim/parallel.hpp"
#include "spinsim/spin_algebra.hpp"

namespace spinsim {

struct NoiseParams {
    double tb_over_td = 0.0; // buffer window over dephasing time, >= 0
    double mu = 1.0;         // probability of a collective (correlated) kick
    int trajectories = 1;    // Monte Carlo sample count
    std::uint64_t seed = 0;

    double kick_probability() const { return 0.5 * (1.0 - std::exp(-tb_over_td)); }

    void validate() const {
        if (tb_over_td < 0.0) throw DimensionError("NoiseParams: tb_over_td must be >= 0");
        if (mu < 0.0 || mu > 1.0) throw DimensionError("NoiseParams: mu must be in [0,1]");
        if (trajectories < 1) throw DimensionError("NoiseParams: trajectories must be >= 1");
    }
};

namespace detail {

// Z (x) I, I (x) Z and Z (x) Z on the pseudospin pair, index order down, up.
inline const Matrix& pair_z1() {
    static const Matrix m = [] {
        Matrix z = Matrix::Zero(4, 4);
        z.diagonal() << -1, -1, 1, 1;
        return z;
    }();
    return m;
}
inline const Matrix& pair_z2() {
    static const Matrix m = [] {
        Matrix z = Matrix::Zero(4, 4);
        z.diagonal() << -1, 1, -1, 1;
        return z;
    }();
    return m;
}
inline const Matrix& pair_zz() {
    static const Matrix m = (pair_z1() * pair_z2()).eval();
    return m;
}

// splitmix64; used to derive independent per-trajectory RNG streams so the
// estimate does not depend on evaluation order.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t j) {
    return mix64(mix64(seed) ^ (0x9e3779b97f4a7c15ULL * (j + 1)));
}

// Bit-reproducible uniform in [0,1); std distributions are not pinned by the
// standard, the engine output is.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace detail

// Exact dephasing channel on the pseudospin pair (s = 1/2): mu-weighted
// mixture of the collective phase-flip channel and the two independent
// single-spin phase-flip channels.
inline DensityMatrix dephasing_channel(const DensityMatrix& rho12, const NoiseParams& p) {
    p.validate();
    if (rho12.dim() != 4)
        throw DimensionError("dephasing_channel: defined for the pseudospin pair (dim 4)");
    const double pk = p.kick_probability();
    const Matrix& rho = rho12.matrix();
    const Matrix collective = (1.0 - pk) * rho + pk * (detail::pair_zz() * rho * detail::pair_zz());
    Matrix indep = (1.0 - pk) * rho + pk * (detail::pair_z1() * rho * detail::pair_z1());
    indep = (1.0 - pk) * indep + pk * (detail::pair_z2() * indep * detail::pair_z2());
    return DensityMatrix::from_matrix(p.mu * collective + (1.0 - p.mu) * indep);
}

// Conditioned iteration with one noise window before each injection (kicks
// happen in the buffer between scattering events).
inline std::vector<IterationRecord> noisy_iterate(const DensityMatrix& rho12,
                                                  const MediatorState& e, const KrausFamily& k,
                                                  int n, const NoiseParams& p) {
    if (n < 1) throw DimensionError("noisy_iterate: n must be >= 1");
    std::vector<IterationRecord> records;
    records.reserve(n);
    DensityMatrix rho = rho12;
    double joint = 1.0;
    for (int step = 1; step <= n; ++step) {
        rho = dephasing_channel(rho, p);
        TransmitResult tr = transmit_step(rho, e, k);
        if (tr.p1 <= 1e-14)
            throw VanishingProbabilityError("noisy_iterate: step probability underflow");
        joint *= tr.p1;
        rho = DensityMatrix::from_matrix(tr.unnormalized / tr.p1);
        records.push_back(IterationRecord{step, fidelity_with_singlet(rho, k.s), joint, rho});
    }
    return records;
}

struct MonteCarloRecord {
    int step;
    double fidelity;    // weighted mean over trajectories
    double probability; // mean trajectory weight
    double stderr_fidelity;
    double stderr_probability;
};

// Trajectory sampling of the kick realizations: per window, Bernoulli(mu)
// selects collective vs independent, then Bernoulli(p) selects each Z kick.
// Trajectories are weighted by their cumulative transmit probability instead
// of sampling detector clicks (lower variance, same expectation). Fixed seed
// gives bit-identical results; trajectory j uses the derived stream
// mix(seed, j) and the reduction runs in trajectory order.
inline std::vector<MonteCarloRecord> monte_carlo_iterate(const DensityMatrix& rho12,
                                                         const MediatorState& e,
                                                         const KrausFamily& k, int n,
                                                         const NoiseParams& p) {
    p.validate();
    if (n < 1) throw DimensionError("monte_carlo_iterate: n must be >= 1");
    if (rho12.dim() != 4)
        throw DimensionError("monte_carlo_iterate: defined for the pseudospin pair (dim 4)");
    const double pk = p.kick_probability();
    const int m = p.trajectories;
    const Vector sing = pair_singlet(k.s);

    std::vector<double> fid(static_cast<std::size_t>(m) * n);
    std::vector<double> wgt(static_cast<std::size_t>(m) * n);
    parallel_for(m, [&](int j) {
        std::mt19937_64 rng(detail::stream_seed(p.seed, static_cast<std::uint64_t>(j)));
        Matrix rho = rho12.matrix();
        double w = 1.0;
        for (int step = 0; step < n; ++step) {
            if (detail::uniform01(rng) < p.mu) {
                if (detail::uniform01(rng) < pk)
                    rho = detail::pair_zz() * rho * detail::pair_zz();
            } else {
                if (detail::uniform01(rng) < pk)
                    rho = detail::pair_z1() * rho * detail::pair_z1();
                if (detail::uniform01(rng) < pk)
                    rho = detail::pair_z2() * rho * detail::pair_z2();
            }
            Matrix out = detail::branch_apply(rho, e.rho_e.matrix(), k.T);
            out = 0.5 * (out + out.adjoint().eval());
            const double p1 = out.trace().real();
            if (p1 <= 1e-14) {
                w = 0.0;
                for (int rest = step; rest < n; ++rest) {
                    fid[static_cast<std::size_t>(j) * n + rest] = 0.0;
                    wgt[static_cast<std::size_t>(j) * n + rest] = 0.0;
                }
                break;
            }
            rho = out / p1;
            w *= p1;
            fid[static_cast<std::size_t>(j) * n + step] = (sing.adjoint() * rho * sing)(0).real();
            wgt[static_cast<std::size_t>(j) * n + step] = w;
        }
    });

    std::vector<MonteCarloRecord> records(n);
    for (int step = 0; step < n; ++step) {
        double wsum = 0.0, fsum = 0.0;
        for (int j = 0; j < m; ++j) {
            wsum += wgt[static_cast<std::size_t>(j) * n + step];
            fsum += wgt[static_cast<std::size_t>(j) * n + step] *
                    fid[static_cast<std::size_t>(j) * n + step];
        }
        const double fbar = wsum > 0.0 ? fsum / wsum : 0.0;
        const double pbar = wsum / m;
        // ratio-estimator stderr for the weighted mean; sample stderr for P
        double vf = 0.0, vp = 0.0;
        for (int j = 0; j < m; ++j) {
            const double w = wgt[static_cast<std::size_t>(j) * n + step];
            const double df = fid[static_cast<std::size_t>(j) * n + step] - fbar;
            vf += w * w * df * df;
            vp += (w - pbar) * (w - pbar);
        }
        const double se_f = wsum > 0.0 ? std::sqrt(vf) / wsum : 0.0;
        const double se_p = m > 1 ? std::sqrt(vp / (m - 1) / m) : 0.0;
        records[step] = MonteCarloRecord{step + 1, fbar, pbar, se_f, se_p};
    }
    return records;
}

} // namespace spinsim

#endif
