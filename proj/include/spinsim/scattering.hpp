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

// Stationary multichannel scattering of one mediator off two point scatterers
// at x = 0 and x = x0. Everything is reduced to the two dimensionless
// combinations g = J/v and theta = k*x0; positions are measured in units of
// 1/k. Two dispersion models:
//
//   Exchange: quadratic dispersion, continuity at each site plus the
//     derivative jump Psi'(x+) - Psi'(x-) = 2 g (sigma.S_site) Psi(x_site).
//   Raman: linear dispersion with right/left movers, first-order matching
//     with the half-sum regularization Psi(x_site) = [Psi(x+) + Psi(x-)]/2;
//     site coupling g (sigma_- S_+,site + h.c.). The half-sum is the choice
//     that yields a flux-conserving S-matrix for point couplings.
//
// Under the resonance condition theta = q*pi the two sites act as a single
// merged scatterer; rc_oracle gives the closed-form eigenchannel amplitudes
// t = 1/(1 + i g kappa), r = -i g kappa/(1 + i g kappa).

#ifndef SPINSIM_SCATTERING_HPP
#define SPINSIM_SCATTERING_HPP

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "spinsim/errors.hpp"
#include "spinsim/spin_algebra.hpp"

namespace spinsim {

enum class Model { Exchange, Raman };

inline const char* model_name(Model m) {
    return m == Model::Exchange ? "exchange" : "raman";
}

struct ScatterParams {
    Model model;
    double g;     // dimensionless coupling J/v
    double theta; // dimensionless k*x0
    SpinQuantum s;

    // theta = q*pi for positive integer q, within 1e-9 relative.
    bool at_resonance() const {
        const double q = theta / std::numbers::pi;
        const double nearest = std::round(q);
        return nearest >= 1 && std::abs(q - nearest) <= 1e-9 * std::max(1.0, std::abs(q));
    }

    static ScatterParams resonant(Model model, double g, int q, SpinQuantum s) {
        return ScatterParams{model, g, q * std::numbers::pi, s};
    }
};

// Full amplitude table, N x N per coefficient with column = incoming channel:
// t(nu, mu') is the amplitude for incoming spin channel mu' to be transmitted
// into nu. a, b are the interior (region II) plane-wave coefficients. The
// transmitted phase is reported relative to free propagation, so g = 0 gives
// t = identity exactly.
struct AmplitudeTable {
    Model model;
    double g;
    double theta;
    SpinQuantum s;
    Matrix t, r, a, b;
};

namespace detail {

// Solve the assembled matching system for all incoming channels at once.
// Unknown ordering: [r; a; b; t], one N-column block per coefficient.
inline AmplitudeTable solve_matching(const ScatterParams& p, const Matrix& lhs,
                                     const Matrix& rhs) {
    const int n = p.s.total_dim();
    Eigen::PartialPivLU<Matrix> lu(lhs);
    if (lu.rcond() < 1e-12)
        throw SingularSystemError("scattering: matching matrix is numerically singular");
    const Matrix x = lu.solve(rhs);
    AmplitudeTable out{p.model, p.g, p.theta, p.s, Matrix(), Matrix(), Matrix(), Matrix()};
    out.r = x.block(0, 0, n, n);
    out.a = x.block(n, 0, n, n);
    out.b = x.block(2 * n, 0, n, n);
    out.t = x.block(3 * n, 0, n, n);
    return out;
}

} // namespace detail

// Quadratic-dispersion (exchange) model.
inline AmplitudeTable solve_exchange(const ScatterParams& p) {
    if (p.model != Model::Exchange)
        throw DimensionError("solve_exchange: params.model must be Exchange");
    if (!std::isfinite(p.g) || !std::isfinite(p.theta))
        throw DimensionError("solve_exchange: g and theta must be finite");
    const SpinOperatorSet ops = SpinOperatorSet::build(p.s);
    const Matrix k1 = exchange_coupling(ops, Site::One);
    const Matrix k2 = exchange_coupling(ops, Site::Two);
    const int n = p.s.total_dim();
    const Matrix id = Matrix::Identity(n, n);
    const Complex i(0, 1);
    const Complex e = std::exp(i * p.theta);
    const Complex em = std::exp(-i * p.theta);

    Matrix lhs = Matrix::Zero(4 * n, 4 * n);
    Matrix rhs = Matrix::Zero(4 * n, n);
    // continuity at 0:  a + b - r = chi
    lhs.block(0, 0, n, n) = -id;
    lhs.block(0, n, n, n) = id;
    lhs.block(0, 2 * n, n, n) = id;
    rhs.block(0, 0, n, n) = id;
    // jump at 0:  i(a - b) - i(chi - r) = 2 g K1 (a + b)
    lhs.block(n, 0, n, n) = i * id;
    lhs.block(n, n, n, n) = i * id - 2.0 * p.g * k1;
    lhs.block(n, 2 * n, n, n) = -i * id - 2.0 * p.g * k1;
    rhs.block(n, 0, n, n) = i * id;
    // continuity at theta:  a e + b em - t e = 0
    lhs.block(2 * n, n, n, n) = e * id;
    lhs.block(2 * n, 2 * n, n, n) = em * id;
    lhs.block(2 * n, 3 * n, n, n) = -e * id;
    // jump at theta:  i t e - i(a e - b em) = 2 g K2 t e
    lhs.block(3 * n, n, n, n) = -i * e * id;
    lhs.block(3 * n, 2 * n, n, n) = i * em * id;
    lhs.block(3 * n, 3 * n, n, n) = i * e * id - 2.0 * p.g * e * k2;
    return detail::solve_matching(p, lhs, rhs);
}

// Linear-dispersion (Raman) model with half-sum regularization at the sites.
inline AmplitudeTable solve_raman(const ScatterParams& p) {
    if (p.model != Model::Raman)
        throw DimensionError("solve_raman: params.model must be Raman");
    if (!std::isfinite(p.g) || !std::isfinite(p.theta))
        throw DimensionError("solve_raman: g and theta must be finite");
    const SpinOperatorSet ops = SpinOperatorSet::build(p.s);
    const Matrix q1 = flipflop_coupling(ops, Site::One);
    const Matrix q2 = flipflop_coupling(ops, Site::Two);
    const int n = p.s.total_dim();
    const Matrix id = Matrix::Identity(n, n);
    const Complex i(0, 1);
    const Complex e = std::exp(i * p.theta);
    const Complex em = std::exp(-i * p.theta);
    const Matrix g1 = (0.5 * i * p.g) * q1;
    const Matrix g2 = (0.5 * i * p.g) * q2;

    Matrix lhs = Matrix::Zero(4 * n, 4 * n);
    Matrix rhs = Matrix::Zero(4 * n, n);
    // right movers at 0:  a - chi = -i g Q1 (chi + a + r + b)/2
    lhs.block(0, 0, n, n) = g1;
    lhs.block(0, n, n, n) = id + g1;
    lhs.block(0, 2 * n, n, n) = g1;
    rhs.block(0, 0, n, n) = id - g1;
    // left movers at 0:  b - r = +i g Q1 (chi + a + r + b)/2
    lhs.block(n, 0, n, n) = -id - g1;
    lhs.block(n, n, n, n) = -g1;
    lhs.block(n, 2 * n, n, n) = id - g1;
    rhs.block(n, 0, n, n) = g1;
    // right movers at theta:  t e - a e = -i g Q2 (a e + t e + b em)/2
    lhs.block(2 * n, n, n, n) = -e * id + e * g2;
    lhs.block(2 * n, 2 * n, n, n) = em * g2;
    lhs.block(2 * n, 3 * n, n, n) = e * id + e * g2;
    // left movers at theta:  -b em = +i g Q2 (a e + t e + b em)/2
    lhs.block(3 * n, n, n, n) = -e * g2;
    lhs.block(3 * n, 2 * n, n, n) = -em * id - em * g2;
    lhs.block(3 * n, 3 * n, n, n) = -e * g2;
    return detail::solve_matching(p, lhs, rhs);
}

inline AmplitudeTable solve(const ScatterParams& p) {
    return p.model == Model::Exchange ? solve_exchange(p) : solve_raman(p);
}

// Closed-form merged-scatterer amplitudes from the eigenchannels of the given
// Hermitian coupling operator. This is the module's independent oracle; the
// full solvers must reproduce it at resonance. The interior coefficients are
// not meaningful for the merged problem (a = t, b = 0).
inline AmplitudeTable rc_oracle(const Matrix& coupling, double g,
                                Model model = Model::Exchange) {
    if (coupling.rows() != coupling.cols())
        throw DimensionError("rc_oracle: coupling must be square");
    if ((coupling - coupling.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw DimensionError("rc_oracle: coupling must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(coupling);
    const int n = static_cast<int>(coupling.rows());
    const int d = static_cast<int>(std::lround(std::sqrt(n / 2.0)));
    if (d < 2 || 2 * d * d != n)
        throw DimensionError("rc_oracle: coupling must act on the 2 d^2 composite space");
    Vector td(n), rd(n);
    const Complex i(0, 1);
    for (int k = 0; k < n; ++k) {
        const double kappa = es.eigenvalues()(k);
        td(k) = 1.0 / (1.0 + i * g * kappa);
        rd(k) = -i * g * kappa / (1.0 + i * g * kappa);
    }
    const Matrix u = es.eigenvectors();
    AmplitudeTable out{model, g, std::numbers::pi, SpinQuantum(d - 1),
                       Matrix(), Matrix(), Matrix(), Matrix()};
    out.t = u * td.asDiagonal() * u.adjoint();
    out.r = u * rd.asDiagonal() * u.adjoint();
    out.a = out.t;
    out.b = Matrix::Zero(n, n);
    return out;
}

// Piecewise plane-wave stationary state for incoming channel mu_in, evaluated
// at x (in units of 1/k). Exactly at a site the two one-sided limits are
// averaged; for the exchange model they coincide (continuity), for the Raman
// model this is the half-sum value entering the coupling.
inline Vector stationary_wavefunction(const AmplitudeTable& table, int mu_in, double x) {
    const int n = table.s.total_dim();
    if (mu_in < 0 || mu_in >= n)
        throw DimensionError("stationary_wavefunction: channel out of range");
    const Complex i(0, 1);
    const Complex ep = std::exp(i * x);
    const Complex em = std::exp(-i * x);
    Vector chi = Vector::Zero(n);
    chi(mu_in) = 1.0;
    auto region_1 = [&] { return Vector(ep * chi + em * table.r.col(mu_in)); };
    auto region_2 = [&] { return Vector(ep * table.a.col(mu_in) + em * table.b.col(mu_in)); };
    auto region_3 = [&] { return Vector(ep * table.t.col(mu_in)); };
    const double tol = 1e-12 * std::max(1.0, std::abs(table.theta));
    if (std::abs(x) <= tol) return 0.5 * (region_1() + region_2());
    if (std::abs(x - table.theta) <= tol) return 0.5 * (region_2() + region_3());
    if (x < 0) return region_1();
    if (x < table.theta) return region_2();
    return region_3();
}

// M(x)_{mu'', mu'} = sum_mu conj(Psi^{mu''}_mu(x)) Psi^{mu'}_mu(x), the matrix
// of the position delta operator in the stationary-state basis. At resonance
// M(0) = M(x0): the two scatterers have merged.
inline Matrix m_matrix(const AmplitudeTable& table, double x) {
    const int n = table.s.total_dim();
    Matrix psi(n, n);
    for (int mu = 0; mu < n; ++mu) psi.col(mu) = stationary_wavefunction(table, mu, x);
    return psi.adjoint() * psi;
}

} // namespace spinsim

#endif
