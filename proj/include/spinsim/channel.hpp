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

// Quantum maps on the static pair induced by one scattering event: Kraus
// families extracted from amplitude tables, the transmission-conditioned map
// (detector click), the unconditioned map, iteration over n injections, and
// the fixed-point analysis of the conditioned map.

#ifndef SPINSIM_CHANNEL_HPP
#define SPINSIM_CHANNEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "spinsim/errors.hpp"
#include "spinsim/scattering.hpp"
#include "spinsim/spin_algebra.hpp"

namespace spinsim {

// Pair-space operators T[m_e][m_e'] and R[m_e][m_e'] (d^2 x d^2): how a
// mediator entering with spin label m_e' and leaving transmitted (reflected)
// with label m_e transforms the static pair. Blocks of the amplitude tables
// in the fixed basis ordering.
struct KrausFamily {
    SpinQuantum s;
    std::array<std::array<Matrix, 2>, 2> T, R; // [outgoing][incoming]
};

inline KrausFamily extract_kraus(const AmplitudeTable& table, SpinQuantum s) {
    if (!(table.s == s) || table.t.rows() != s.total_dim())
        throw DimensionError("extract_kraus: table inconsistent with spin quantum number");
    const int p = s.pair_dim();
    KrausFamily k{s, {}, {}};
    for (int out = 0; out < 2; ++out) {
        for (int in = 0; in < 2; ++in) {
            k.T[out][in] = table.t.block(out * p, in * p, p, p);
            k.R[out][in] = table.r.block(out * p, in * p, p, p);
        }
    }
    return k;
}

// Mediator spin state. The polarization convention is the main-text one:
// rho_e = [(1-r)|down><down| + (1+r)|up><up|]/2, r in [0,1].
struct MediatorState {
    DensityMatrix rho_e;

    static MediatorState from_density(DensityMatrix rho) {
        if (rho.dim() != 2) throw DimensionError("MediatorState: must be 2x2");
        return MediatorState{std::move(rho)};
    }

    static MediatorState from_polarization(double r_pol) {
        if (r_pol < 0.0 || r_pol > 1.0)
            throw DimensionError("MediatorState: r_pol must be in [0,1]");
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = 0.5 * (1.0 - r_pol);
        m(1, 1) = 0.5 * (1.0 + r_pol);
        return MediatorState{DensityMatrix::from_matrix(std::move(m))};
    }

    static MediatorState unpolarized() { return from_polarization(0.0); }
};

namespace detail {

// sum_{m_e} sum_{a,b} (rho_e)_{ab} K[m_e][a] rho K[m_e][b]^dagger
inline Matrix branch_apply(const Matrix& rho, const Matrix& rho_e,
                           const std::array<std::array<Matrix, 2>, 2>& k) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (int me = 0; me < 2; ++me) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const Complex w = rho_e(a, b);
                if (std::abs(w) == 0.0) continue;
                out.noalias() += w * (k[me][a] * rho * k[me][b].adjoint());
            }
        }
    }
    return out;
}

} // namespace detail

// Map without the detector: transmitted plus reflected branches. Trace
// preserving by flux conservation.
inline DensityMatrix unconditioned_step(const DensityMatrix& rho12, const MediatorState& e,
                                        const KrausFamily& k) {
    if (rho12.dim() != k.s.pair_dim())
        throw DimensionError("unconditioned_step: pair dimension mismatch");
    Matrix out = detail::branch_apply(rho12.matrix(), e.rho_e.matrix(), k.T) +
                 detail::branch_apply(rho12.matrix(), e.rho_e.matrix(), k.R);
    out = 0.5 * (out + out.adjoint().eval());
    return DensityMatrix::from_matrix(std::move(out));
}

struct TransmitResult {
    Matrix unnormalized; // E~(rho12), trace = p1
    double p1;           // transmission (click) probability
};

// Transmission-conditioned map, unnormalized, generalized to mediator states
// with coherences through the double sum over (rho_e)_{ab}.
inline TransmitResult transmit_step(const DensityMatrix& rho12, const MediatorState& e,
                                    const KrausFamily& k) {
    if (rho12.dim() != k.s.pair_dim())
        throw DimensionError("transmit_step: pair dimension mismatch");
    Matrix out = detail::branch_apply(rho12.matrix(), e.rho_e.matrix(), k.T);
    out = 0.5 * (out + out.adjoint().eval());
    return TransmitResult{out, out.trace().real()};
}

struct IterationRecord {
    int step;           // n >= 1
    double fidelity;    // F(n) of the conditioned state with the pair singlet
    double probability; // joint probability P(n) that all n mediators clicked
    DensityMatrix rho12;
};

// n conditioned injection-collection steps. P(n) is the running product of
// per-step click probabilities, equal to Tr[E~^n(rho12)].
inline std::vector<IterationRecord> iterate(const DensityMatrix& rho12, const MediatorState& e,
                                            const KrausFamily& k, int n) {
    if (n < 1) throw DimensionError("iterate: n must be >= 1");
    std::vector<IterationRecord> records;
    records.reserve(n);
    DensityMatrix rho = rho12;
    double joint = 1.0;
    for (int step = 1; step <= n; ++step) {
        TransmitResult tr = transmit_step(rho, e, k);
        if (tr.p1 <= 1e-14)
            throw VanishingProbabilityError(
                "iterate: step probability underflow; state is orthogonal to every "
                "transmitting component");
        joint *= tr.p1;
        rho = DensityMatrix::from_matrix(tr.unnormalized / tr.p1);
        records.push_back(IterationRecord{step, fidelity_with_singlet(rho, k.s), joint, rho});
    }
    return records;
}

// Column-major superoperator of the unnormalized conditioned map:
// vec(E~(X)) = S vec(X), with vec(A X B^dagger) = conj(B) (x) A vec(X).
inline Matrix transmit_superoperator(const KrausFamily& k, const MediatorState& e) {
    const int p = k.s.pair_dim();
    Matrix s = Matrix::Zero(p * p, p * p);
    for (int me = 0; me < 2; ++me) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const Complex w = e.rho_e.matrix()(a, b);
                if (std::abs(w) == 0.0) continue;
                s.noalias() += w * kron(k.T[me][b].conjugate(), k.T[me][a]);
            }
        }
    }
    return s;
}

struct FixedPointResult {
    int subspace_dim; // complex dimension of the eigenvalue-1 subspace of E~
    std::vector<DensityMatrix> states;
};

// Density matrices with E~(rho) = rho (hence P1 = 1). Candidates come from the
// eigenvalue-1 eigenvectors of the superoperator plus the distinguished states
// (pair singlet, computational-basis projectors); each candidate is verified
// directly against the map at 1e-9, PSD-filtered, and deduplicated. States are
// sorted by descending singlet fidelity.
inline FixedPointResult fixed_points(const KrausFamily& k, const MediatorState& e) {
    const int p = k.s.pair_dim();
    const Matrix s = transmit_superoperator(k, e);
    Eigen::ComplexEigenSolver<Matrix> es(s);

    std::vector<Matrix> candidates;
    int dim = 0;
    for (int j = 0; j < s.rows(); ++j) {
        if (std::abs(es.eigenvalues()(j) - Complex(1, 0)) < 1e-9) {
            ++dim;
            Matrix m = Eigen::Map<const Matrix>(es.eigenvectors().col(j).data(), p, p);
            candidates.push_back(0.5 * (m + m.adjoint().eval()));
            candidates.push_back(Complex(0, 0.5) * (m - m.adjoint().eval()));
        }
    }
    candidates.push_back(pair_singlet(k.s) * pair_singlet(k.s).adjoint());
    for (int j = 0; j < p; ++j) {
        Matrix proj = Matrix::Zero(p, p);
        proj(j, j) = 1.0;
        candidates.push_back(proj);
    }

    std::vector<DensityMatrix> states;
    for (Matrix& c : candidates) {
        const double tr = c.trace().real();
        if (std::abs(tr) < 1e-8) continue;
        Matrix m = c / tr;
        Eigen::SelfAdjointEigenSolver<Matrix> psd(m, Eigen::EigenvaluesOnly);
        if (psd.eigenvalues().minCoeff() < -1e-10) continue;
        const Matrix mapped = detail::branch_apply(m, e.rho_e.matrix(), k.T);
        if ((mapped - m).norm() > 1e-9) continue;
        bool duplicate = false;
        for (const DensityMatrix& seen : states)
            if ((seen.matrix() - m).norm() < 1e-6) duplicate = true;
        if (!duplicate) states.push_back(DensityMatrix::from_matrix(std::move(m)));
    }
    std::sort(states.begin(), states.end(), [&](const DensityMatrix& x, const DensityMatrix& y) {
        return fidelity_with_singlet(x, k.s) > fidelity_with_singlet(y, k.s);
    });
    return FixedPointResult{dim, std::move(states)};
}

} // namespace spinsim

#endif
