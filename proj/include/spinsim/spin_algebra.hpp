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

// Spin operators, composite bases and density-matrix utilities for one flying
// spin-1/2 mediator plus two static spin-s particles (hbar = 1 throughout,
// all operators dimensionless).

#ifndef SPINSIM_SPIN_ALGEBRA_HPP
#define SPINSIM_SPIN_ALGEBRA_HPP

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "spinsim/errors.hpp"

namespace spinsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Spin quantum number s stored as the integer 2s (s=1/2 -> two_s=1).
struct SpinQuantum {
    int two_s;

    explicit SpinQuantum(int two_s_) : two_s(two_s_) {
        if (two_s < 1) throw DimensionError("SpinQuantum: two_s must be >= 1");
    }

    double s() const { return 0.5 * two_s; }
    int dim() const { return two_s + 1; }         // single-particle dimension d
    int pair_dim() const { return dim() * dim(); } // d^2
    int total_dim() const { return 2 * pair_dim(); } // N = 2 d^2 with the mediator

    friend bool operator==(SpinQuantum a, SpinQuantum b) { return a.two_s == b.two_s; }
};

// Composite basis label {m_e, m1, m2}. Mediator: 0 = down, 1 = up. Static
// labels are 0..d-1 with magnetic number m = index - s. Flat ordering is
// m_e*d^2 + m1*d + m2, the convention every amplitude table and Kraus
// operator in this library inherits.
struct BasisIndex {
    int m_e, m1, m2;

    int flat(SpinQuantum s) const {
        const int d = s.dim();
        return (m_e * d + m1) * d + m2;
    }

    static BasisIndex from_flat(int flat, SpinQuantum s) {
        const int d = s.dim();
        return BasisIndex{flat / (d * d), (flat / d) % d, flat % d};
    }
};

struct SpinMatrices {
    Matrix x, y, z; // d x d
};

// Standard ladder-operator construction; Sz = diag(s, s-1, ..., -s).
inline SpinMatrices spin_matrices(SpinQuantum sq) {
    const int d = sq.dim();
    const double s = sq.s();
    Matrix sp = Matrix::Zero(d, d);
    Matrix sz = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double m = s - i;
        sz(i, i) = m;
        // S+ |s,m> = sqrt(s(s+1) - m(m+1)) |s,m+1>, row index of m+1 is i-1
        if (i >= 1) sp(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
    }
    SpinMatrices out;
    out.x = 0.5 * (sp + sp.adjoint());
    out.y = Complex(0, -0.5) * (sp - sp.adjoint());
    out.z = sz;
    return out;
}

namespace detail {

// Same matrices reindexed to the BasisIndex convention m = index - s
// (ascending magnetic number), used for all composite-space embeddings.
inline SpinMatrices ascending_spin_matrices(SpinQuantum sq) {
    SpinMatrices m = spin_matrices(sq);
    const int d = sq.dim();
    Eigen::PermutationMatrix<Eigen::Dynamic> rev(d);
    for (int i = 0; i < d; ++i) rev.indices()[i] = d - 1 - i;
    m.x = rev * m.x * rev;
    m.y = rev * m.y * rev;
    m.z = rev * m.z * rev;
    return m;
}

} // namespace detail

inline Matrix kron(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

// Mediator and static-spin components embedded in the full N-dimensional
// space (mediator slowest index).
struct SpinOperatorSet {
    SpinQuantum s;
    std::array<Matrix, 3> sigma; // mediator spin-1/2
    std::array<Matrix, 3> s1, s2, s12;

    static SpinOperatorSet build(SpinQuantum sq) {
        const SpinMatrices me = detail::ascending_spin_matrices(SpinQuantum(1));
        const SpinMatrices st = detail::ascending_spin_matrices(sq);
        const int d = sq.dim();
        const Matrix i2 = Matrix::Identity(2, 2);
        const Matrix id = Matrix::Identity(d, d);
        SpinOperatorSet out{sq, {}, {}, {}, {}};
        const std::array<const Matrix*, 3> mec = {&me.x, &me.y, &me.z};
        const std::array<const Matrix*, 3> stc = {&st.x, &st.y, &st.z};
        for (int k = 0; k < 3; ++k) {
            out.sigma[k] = kron(*mec[k], kron(id, id));
            out.s1[k] = kron(i2, kron(*stc[k], id));
            out.s2[k] = kron(i2, kron(id, *stc[k]));
            out.s12[k] = out.s1[k] + out.s2[k];
        }
        return out;
    }
};

enum class Site { One, Two, Both };

// Heisenberg contact coupling sigma.S at one site, or sigma.S12 for the
// merged resonance-condition scatterer. Dimensionless; callers apply g.
inline Matrix exchange_coupling(const SpinOperatorSet& ops, Site which) {
    const std::array<Matrix, 3>* s = nullptr;
    switch (which) {
        case Site::One: s = &ops.s1; break;
        case Site::Two: s = &ops.s2; break;
        case Site::Both: s = &ops.s12; break;
    }
    Matrix out = ops.sigma[0] * (*s)[0];
    out += ops.sigma[1] * (*s)[1];
    out += ops.sigma[2] * (*s)[2];
    return out;
}

// Flip-flop (Raman) coupling sigma_- S_+ + sigma_+ S_- at one site or summed
// over both. Annihilates anything x pair-singlet.
inline Matrix flipflop_coupling(const SpinOperatorSet& ops, Site which = Site::Both) {
    const std::array<Matrix, 3>* s = nullptr;
    switch (which) {
        case Site::One: s = &ops.s1; break;
        case Site::Two: s = &ops.s2; break;
        case Site::Both: s = &ops.s12; break;
    }
    const Matrix sig_p = ops.sigma[0] + Complex(0, 1) * ops.sigma[1];
    const Matrix sig_m = ops.sigma[0] - Complex(0, 1) * ops.sigma[1];
    const Matrix s_p = (*s)[0] + Complex(0, 1) * (*s)[1];
    const Matrix s_m = (*s)[0] - Complex(0, 1) * (*s)[1];
    return sig_m * s_p + sig_p * s_m;
}

// The unique total-S12 = 0 pair state, sum_m (-1)^(s-m) |m,-m> / sqrt(d),
// with sign fixed positive on the (m1 = +s, m2 = -s) component.
inline Vector pair_singlet(SpinQuantum sq) {
    const int d = sq.dim();
    Vector v = Vector::Zero(d * d);
    const double c = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j) {
        // pair component (m1 index j, m2 index d-1-j)
        v(j * d + (d - 1 - j)) = ((sq.two_s - j) % 2 == 0) ? c : -c;
    }
    return v;
}

// Hermitian, positive-semidefinite, unit-trace complex matrix. Validated on
// construction: hermiticity and trace to 1e-12, smallest eigenvalue >= -1e-10.
class DensityMatrix {
  public:
    static DensityMatrix from_matrix(Matrix m) {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw DimensionError("DensityMatrix: matrix must be square");
        const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-12)
            throw DimensionError("DensityMatrix: not Hermitian (defect " + std::to_string(herm) + ")");
        const double tr_err = std::abs(m.trace() - Complex(1, 0));
        if (tr_err > 1e-12)
            throw DimensionError("DensityMatrix: trace != 1 (defect " + std::to_string(tr_err) + ")");
        m = 0.5 * (m + m.adjoint().eval());
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw DimensionError("DensityMatrix: negative eigenvalue " +
                                 std::to_string(es.eigenvalues().minCoeff()));
        return DensityMatrix(std::move(m));
    }

    static DensityMatrix pure(const Vector& v) {
        const double n2 = v.squaredNorm();
        if (n2 <= 0) throw DimensionError("DensityMatrix: zero state vector");
        return DensityMatrix((v * v.adjoint()) / n2);
    }

    static DensityMatrix maximally_mixed(int dim) {
        if (dim < 1) throw DimensionError("DensityMatrix: dim must be positive");
        return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    const Matrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

  private:
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

// Trace over the mediator (slowest tensor factor), 2d^2 -> d^2.
inline DensityMatrix partial_trace_mediator(const DensityMatrix& rho, SpinQuantum sq) {
    const int p = sq.pair_dim();
    if (rho.dim() != 2 * p)
        throw DimensionError("partial_trace_mediator: expected dim 2 d^2");
    Matrix out = rho.matrix().block(0, 0, p, p) + rho.matrix().block(p, p, p, p);
    return DensityMatrix::from_matrix(std::move(out));
}

// F = <Psi-| rho |Psi->.
inline double fidelity_with_singlet(const DensityMatrix& rho12, SpinQuantum sq) {
    if (rho12.dim() != sq.pair_dim())
        throw DimensionError("fidelity_with_singlet: expected pair-space dim d^2");
    const Vector v = pair_singlet(sq);
    const Complex f = v.adjoint() * rho12.matrix() * v;
    return f.real();
}

} // namespace spinsim

#endif
