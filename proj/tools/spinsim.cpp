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

// spinsim command-line runner: scenario sweeps, bundled figure presets,
// fixed-point reports and a library self-test.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "spinsim/spinsim.hpp"

namespace {

using namespace spinsim;

void apply_overrides(ScenarioConfig& cfg, const std::string& out, int n_max, long long seed,
                     int trajectories) {
    if (!out.empty()) cfg.output_path = out;
    if (n_max > 0) cfg.n_max = n_max;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (trajectories >= 0 && cfg.noise) cfg.noise->trajectories = trajectories;
    cfg.validate();
}

int run_command(const std::string& config_path, const std::string& out, int n_max,
                long long seed, int trajectories) {
    ScenarioConfig cfg = load_config(config_path);
    apply_overrides(cfg, out, n_max, seed, trajectories);
    const std::vector<RunRecord> records = run_scenario(cfg);
    std::cout << "wrote " << records.size() << " rows to " << cfg.output_path << "\n";
    return 0;
}

void write_plot_script(const std::string& path, const std::string& id) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << "#!/usr/bin/env python3\n"
        << "# Renders the fig" << id << " pivot grids produced by `spinsim figure --id " << id
        << "`.\n"
        << "import csv, sys\n"
        << "import matplotlib\n"
        << "matplotlib.use('Agg')\n"
        << "import matplotlib.pyplot as plt\n"
        << "\n"
        << "def load(path):\n"
        << "    with open(path) as fh:\n"
        << "        rows = list(csv.reader(fh))\n"
        << "    cols = [float(c.split('=')[1]) for c in rows[0][1:]]\n"
        << "    axis = [float(r[0]) for r in rows[1:]]\n"
        << "    data = [[float(v) for v in r[1:]] for r in rows[1:]]\n"
        << "    return rows[0][0], axis, cols, data\n"
        << "\n"
        << "fig, axes = plt.subplots(1, 2, figsize=(11, 4))\n"
        << "for ax, kind in zip(axes, ('fidelity', 'probability')):\n"
        << "    name, axis, cols, data = load('fig" << id << "_%s.csv' % kind)\n"
        << "    for j, c in enumerate(cols):\n"
        << "        ax.plot(axis, [row[j] for row in data], label='%g' % c)\n"
        << "    ax.set_xlabel(name)\n"
        << "    ax.set_ylabel(kind)\n"
        << "    ax.legend(fontsize=7)\n"
        << "plt.tight_layout()\n"
        << "plt.savefig('fig" << id << ".png', dpi=160)\n"
        << "print('wrote fig" << id << ".png')\n";
    if (!out) throw IoError("write failed: " + path);
}

int figure_command(const std::string& id, const std::string& out_dir, long long seed,
                   int trajectories) {
    ScenarioConfig cfg = bundled_figure_config(id);
    std::filesystem::create_directories(out_dir.empty() ? "." : out_dir);
    const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
    cfg.output_path = (dir / ("fig" + id + ".csv")).string();
    apply_overrides(cfg, cfg.output_path, -1, seed, trajectories);
    const std::vector<RunRecord> records = run_scenario(cfg);
    const auto [fid, prob] = figure_pivots(cfg, records);
    const std::string f_path = (dir / ("fig" + id + "_fidelity.csv")).string();
    const std::string p_path = (dir / ("fig" + id + "_probability.csv")).string();
    write_pivot_csv(f_path, fid);
    write_pivot_csv(p_path, prob);
    write_plot_script((dir / ("fig" + id + "_plot.py")).string(), id);
    std::cout << "wrote " << cfg.output_path << ", " << f_path << ", " << p_path << "\n";
    return 0;
}

int fixedpoint_command(const std::string& model, double g, double r_pol, int q, int two_s) {
    ScenarioConfig cfg;
    cfg.scenario = ScenarioKind::FixedPoint;
    cfg.model = model_from_string(model);
    cfg.g_grid = {g};
    cfg.r_pol_grid = {r_pol};
    cfg.q = q;
    cfg.s = SpinQuantum(two_s);
    cfg.output_path = "fixedpoint.csv";
    cfg.validate();

    const KrausFamily k =
        extract_kraus(solve(ScatterParams::resonant(cfg.model, g, q, cfg.s)), cfg.s);
    const MediatorState e = MediatorState::from_polarization(r_pol);
    const FixedPointResult fp = fixed_points(k, e);
    std::printf("fixed subspace dimension: %d\n", fp.subspace_dim);
    std::printf("fixed states (F = singlet fidelity, P1 = click probability):\n");
    int index = 1;
    for (const DensityMatrix& state : fp.states) {
        std::printf("  state %d: F = %.12f, P1 = %.12f\n", index++,
                    fidelity_with_singlet(state, cfg.s), transmit_step(state, e, k).p1);
    }
    run_scenario(cfg);
    std::cout << "wrote " << cfg.output_path << "\n";
    return 0;
}

struct SelfTest {
    int failures = 0;

    void check(const std::string& name, bool ok, double detail) {
        std::printf("%s  %-58s %.3e\n", ok ? "PASS" : "FAIL", name.c_str(), detail);
        if (!ok) ++failures;
    }
};

// Quick library invariant suite over deterministic pseudo-random parameter
// points; exercises both models and the noise path.
int selftest_command() {
    SelfTest st;
    std::mt19937_64 rng(12345);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };

    {
        double worst = 0;
        for (int two_s : {1, 2, 3, 5}) {
            const SpinOperatorSet ops = SpinOperatorSet::build(SpinQuantum(two_s));
            const Matrix comm = ops.s1[0] * ops.s1[1] - ops.s1[1] * ops.s1[0];
            worst = std::max(worst, (comm - Complex(0, 1) * ops.s1[2]).cwiseAbs().maxCoeff());
        }
        st.check("commutators [Sx,Sy] = i Sz, s <= 5/2", worst < 1e-12, worst);
    }
    {
        double worst = 0;
        for (int two_s : {1, 2, 5}) {
            const SpinQuantum s(two_s);
            const SpinOperatorSet ops = SpinOperatorSet::build(s);
            const Matrix s12sq =
                ops.s12[0] * ops.s12[0] + ops.s12[1] * ops.s12[1] + ops.s12[2] * ops.s12[2];
            Vector full = Vector::Zero(s.total_dim());
            full.segment(0, s.pair_dim()) = pair_singlet(s);
            worst = std::max(worst, (s12sq * full).norm());
        }
        st.check("pair singlet annihilated by S12^2", worst < 1e-12, worst);
    }
    {
        double worst = 0;
        for (int i = 0; i < 4; ++i) {
            const double g = uniform(0.1, 8.0);
            const int q = 1 + (i % 3);
            const SpinQuantum s(1 + (i % 2));
            const SpinOperatorSet ops = SpinOperatorSet::build(s);
            const AmplitudeTable ex = solve_exchange(ScatterParams::resonant(Model::Exchange, g, q, s));
            const AmplitudeTable ora = rc_oracle(exchange_coupling(ops, Site::Both), g);
            worst = std::max(worst, (ex.t - ora.t).cwiseAbs().maxCoeff());
            const AmplitudeTable ra = solve_raman(ScatterParams::resonant(Model::Raman, g, q, s));
            const AmplitudeTable orr = rc_oracle(flipflop_coupling(ops), g);
            worst = std::max(worst, (ra.t - orr.t).cwiseAbs().maxCoeff());
        }
        st.check("solvers match eigenchannel oracle at resonance", worst < 1e-9, worst);
    }
    {
        double worst = 0;
        for (int i = 0; i < 6; ++i) {
            const ScatterParams p{i % 2 ? Model::Raman : Model::Exchange, uniform(0.0, 10.0),
                                  uniform(0.2, 12.0), SpinQuantum(1)};
            const AmplitudeTable tb = solve(p);
            const Eigen::VectorXd flux =
                (tb.t.cwiseAbs2().colwise().sum() + tb.r.cwiseAbs2().colwise().sum()).real();
            worst = std::max(worst, (flux.array() - 1.0).abs().maxCoeff());
        }
        st.check("flux conservation off resonance", worst < 1e-10, worst);
    }
    {
        const SpinQuantum s(1);
        const KrausFamily k =
            extract_kraus(solve(ScatterParams::resonant(Model::Exchange, 1.7, 1, s)), s);
        double worst = 0;
        for (int in = 0; in < 2; ++in) {
            Matrix sum = Matrix::Zero(s.pair_dim(), s.pair_dim());
            for (int out = 0; out < 2; ++out)
                sum += k.T[out][in].adjoint() * k.T[out][in] + k.R[out][in].adjoint() * k.R[out][in];
            worst = std::max(worst,
                             (sum - Matrix::Identity(s.pair_dim(), s.pair_dim())).cwiseAbs().maxCoeff());
        }
        st.check("Kraus completeness", worst < 1e-10, worst);
    }
    {
        double worst = 0;
        for (int i = 0; i < 4; ++i) {
            const Model m = i % 2 ? Model::Raman : Model::Exchange;
            const SpinQuantum s(1);
            const KrausFamily k =
                extract_kraus(solve(ScatterParams::resonant(m, uniform(0.2, 9.0), 1 + i % 3, s)), s);
            const DensityMatrix singlet = DensityMatrix::pure(pair_singlet(s));
            const TransmitResult tr =
                transmit_step(singlet, MediatorState::from_polarization(uniform(0, 1)), k);
            worst = std::max(worst, (tr.unnormalized - singlet.matrix()).norm());
            worst = std::max(worst, std::abs(tr.p1 - 1.0));
        }
        st.check("singlet fixed point, P1 = 1, both models", worst < 1e-12, worst);
    }
    {
        const SpinQuantum s(1);
        const AmplitudeTable rc = solve(ScatterParams{Model::Exchange, 1.0, std::numbers::pi, s});
        const AmplitudeTable off =
            solve(ScatterParams{Model::Exchange, 1.0, std::numbers::pi + 0.3, s});
        const double merged = (m_matrix(rc, 0.0) - m_matrix(rc, rc.theta)).norm();
        const double split = (m_matrix(off, 0.0) - m_matrix(off, off.theta)).norm();
        st.check("M(0) = M(x0) at resonance", merged < 1e-9, merged);
        st.check("M(0) != M(x0) off resonance", split > 1e-3, split);
    }
    {
        const SpinQuantum s(1);
        const KrausFamily k =
            extract_kraus(solve(ScatterParams::resonant(Model::Raman, 1.5, 1, s)), s);
        Vector ud = Vector::Zero(4);
        ud(2) = 1.0;
        const DensityMatrix rho0 = DensityMatrix::pure(ud);
        const MediatorState e = MediatorState::unpolarized();
        const auto clean = iterate(rho0, e, k, 5);
        double worst = 0;
        for (double tb : {0.3, 1.0}) {
            const auto noisy = noisy_iterate(rho0, e, k, 5, NoiseParams{tb, 1.0, 1, 0});
            for (int j = 0; j < 5; ++j)
                worst = std::max(worst, std::abs(noisy[j].fidelity - clean[j].fidelity));
        }
        st.check("mu = 1 dephasing immunity (fidelity)", worst < 1e-10, worst);

        const NoiseParams p{0.5, 0.5, 400, 7};
        const auto mc1 = monte_carlo_iterate(rho0, e, k, 5, p);
        const auto mc2 = monte_carlo_iterate(rho0, e, k, 5, p);
        double dev = 0;
        for (int j = 0; j < 5; ++j)
            dev = std::max(dev, std::abs(mc1[j].fidelity - mc2[j].fidelity) +
                                    std::abs(mc1[j].probability - mc2[j].probability));
        st.check("Monte Carlo determinism for a fixed seed", dev == 0.0, dev);

        double wdev = 0;
        for (const IterationRecord& rec : clean)
            wdev = std::max(wdev, std::abs(rec.fidelity * rec.probability - 0.5));
        st.check("conditioned singlet weight F*P conserved", wdev < 1e-12, wdev);
    }

    std::printf("%s (%d failure%s)\n", st.failures == 0 ? "selftest passed" : "selftest FAILED",
                st.failures, st.failures == 1 ? "" : "s");
    return st.failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spinsim: remote-spin entanglement distribution via scattered mediators"};
    app.require_subcommand(1);

    std::string config_path, out, figure_id, model = "exchange";
    int n_max = -1, trajectories = -1, q = 1, two_s = 1;
    long long seed = -1;
    double g = 1.6, r_pol = 0.0;

    CLI::App* run = app.add_subcommand("run", "run a scenario from a JSON config");
    run->add_option("--config", config_path, "config file path")->required();
    run->add_option("--out", out, "override output_path");
    run->add_option("--n-max", n_max, "override n_max");
    run->add_option("--seed", seed, "override seed");
    run->add_option("--trajectories", trajectories, "override Monte Carlo trajectories");

    CLI::App* figure = app.add_subcommand("figure", "run a bundled figure preset");
    figure->add_option("--id", figure_id, "figure id: 2, 3b, 4 or 5")->required();
    figure->add_option("--out", out, "output directory (default .)");
    figure->add_option("--seed", seed, "override seed");
    figure->add_option("--trajectories", trajectories, "override Monte Carlo trajectories");

    CLI::App* fixedpoint = app.add_subcommand("fixedpoint", "report fixed points of the map");
    fixedpoint->add_option("--model", model, "exchange or raman");
    fixedpoint->add_option("--g", g, "coupling J/v");
    fixedpoint->add_option("--rpol", r_pol, "mediator polarization in [0,1]");
    fixedpoint->add_option("--q", q, "resonance order");
    fixedpoint->add_option("--two-s", two_s, "static spin as 2s");

    CLI::App* selftest = app.add_subcommand("selftest", "run the library invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return run_command(config_path, out, n_max, seed, trajectories);
        if (figure->parsed()) return figure_command(figure_id, out, seed, trajectories);
        if (fixedpoint->parsed()) return fixedpoint_command(model, g, r_pol, q, two_s);
        if (selftest->parsed()) return selftest_command();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
