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

// Scenario runner: JSON configs, parameter sweeps behind the bundled figure
// presets, and byte-deterministic CSV output.

#ifndef SPINSIM_SCENARIO_HPP
#define SPINSIM_SCENARIO_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsim/channel.hpp"
#include "spinsim/errors.hpp"
#include "spinsim/noise.hpp"
#include "spinsim/parallel.hpp"
#include "spinsim/scattering.hpp"
#include "spinsim/spin_algebra.hpp"

namespace spinsim {

enum class ScenarioKind { Fig2, Fig3b, Fig4, Fig5, Sweep, FixedPoint };

inline const char* scenario_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::Fig2: return "fig2";
        case ScenarioKind::Fig3b: return "fig3b";
        case ScenarioKind::Fig4: return "fig4";
        case ScenarioKind::Fig5: return "fig5";
        case ScenarioKind::Sweep: return "sweep";
        case ScenarioKind::FixedPoint: return "fixedpoint";
    }
    return "?";
}

enum class InitialStateKind { UpDown, Singlet, Mixed, Custom };

struct InitialState {
    InitialStateKind kind = InitialStateKind::UpDown;
    std::string file; // custom density-matrix file

    // |up,down>: m1 = +s, m2 = -s.
    DensityMatrix realize(SpinQuantum s) const;
};

struct NoiseGridConfig {
    std::vector<double> tb_grid{0.0};
    std::vector<double> mu_grid{1.0};
    int trajectories = 0; // 0 = exact channel only
};

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::Sweep;
    Model model = Model::Exchange;
    std::vector<double> g_grid{1.0};
    int q = 1;
    int n_max = 10;
    std::vector<double> r_pol_grid{0.0};
    InitialState initial_state;
    SpinQuantum s{1};
    std::optional<NoiseGridConfig> noise;
    std::uint64_t seed = 0;
    std::string output_path;

    void validate() const;
};

// One CSV row. stderr_f is set only for Monte Carlo rows.
struct RunRecord {
    std::string scenario;
    Model model;
    double g = 0;
    int q = 1;
    double r_pol = 0;
    int n = 0;
    double fidelity = 0;
    double probability = 0;
    double mu = 0;
    double tb_over_td = 0;
    std::optional<double> stderr_f;
};

// ---------------------------------------------------------------------------
// CSV formatting: 17 significant digits, LF line endings, fixed column order.

inline std::string format_real(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

inline std::string csv_header() {
    return "scenario,model,g,q,r_pol,n,F,P,mu,tb_over_td,stderr_F\n";
}

inline std::string to_csv_row(const RunRecord& r) {
    for (double v : {r.g, r.r_pol, r.fidelity, r.probability, r.mu, r.tb_over_td})
        if (!std::isfinite(v)) throw Error("RunRecord: non-finite numeric field");
    std::ostringstream out;
    out << r.scenario << ',' << model_name(r.model) << ',' << format_real(r.g) << ',' << r.q
        << ',' << format_real(r.r_pol) << ',' << r.n << ',' << format_real(r.fidelity) << ','
        << format_real(r.probability) << ',' << format_real(r.mu) << ','
        << format_real(r.tb_over_td) << ','
        << (r.stderr_f ? format_real(*r.stderr_f) : std::string()) << '\n';
    return out.str();
}

inline void write_csv(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << csv_header();
    for (const RunRecord& r : records) out << to_csv_row(r);
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline std::vector<double> grid_from_json(const nlohmann::json& j, const std::string& scalar_key,
                                          const std::string& grid_key,
                                          const std::vector<double>& fallback) {
    if (j.contains(grid_key)) {
        std::vector<double> out = j.at(grid_key).get<std::vector<double>>();
        if (out.empty()) throw ConfigError(grid_key + " must be non-empty");
        return out;
    }
    if (j.contains(scalar_key)) return {j.at(scalar_key).get<double>()};
    return fallback;
}

inline std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = count == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(count - 1);
    return out;
}

inline std::vector<double> logspace(double lo, double hi, int count) {
    std::vector<double> out = linspace(std::log10(lo), std::log10(hi), count);
    for (double& v : out) v = std::pow(10.0, v);
    return out;
}

} // namespace detail

inline Model model_from_string(const std::string& name) {
    if (name == "exchange") return Model::Exchange;
    if (name == "raman") return Model::Raman;
    throw ConfigError("unknown model: " + name);
}

inline ScenarioKind scenario_from_string(const std::string& name) {
    for (ScenarioKind k : {ScenarioKind::Fig2, ScenarioKind::Fig3b, ScenarioKind::Fig4,
                           ScenarioKind::Fig5, ScenarioKind::Sweep, ScenarioKind::FixedPoint})
        if (name == scenario_name(k)) return k;
    throw ConfigError("unknown scenario: " + name);
}

// Custom initial states: {"re": [[...]], "im": [[...]]}, validated as a
// density matrix (Hermitian and unit trace to 1e-9); never silently fixed up.
inline DensityMatrix load_density_matrix_file(const std::string& path, int expected_dim) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open density-matrix file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError("unparseable density-matrix file " + path + ": " + ex.what());
    }
    try {
        const auto re = j.at("re").get<std::vector<std::vector<double>>>();
        std::vector<std::vector<double>> im;
        if (j.contains("im")) im = j.at("im").get<std::vector<std::vector<double>>>();
        const int dim = static_cast<int>(re.size());
        if (dim != expected_dim)
            throw ConfigError("density-matrix file " + path + ": expected dim " +
                              std::to_string(expected_dim));
        Matrix m(dim, dim);
        for (int i = 0; i < dim; ++i) {
            if (static_cast<int>(re[i].size()) != dim ||
                (!im.empty() && static_cast<int>(im[i].size()) != dim))
                throw ConfigError("density-matrix file " + path + ": ragged rows");
            for (int c = 0; c < dim; ++c)
                m(i, c) = Complex(re[i][c], im.empty() ? 0.0 : im[i][c]);
        }
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
            throw ConfigError("density-matrix file " + path + ": not Hermitian");
        if (std::abs(m.trace() - Complex(1, 0)) > 1e-9)
            throw ConfigError("density-matrix file " + path + ": trace != 1");
        m = 0.5 * (m + m.adjoint().eval());
        m *= 1.0 / m.trace().real();
        return DensityMatrix::from_matrix(std::move(m));
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError("density-matrix file " + path + ": " + ex.what());
    }
}

inline DensityMatrix InitialState::realize(SpinQuantum s) const {
    const int d = s.dim();
    switch (kind) {
        case InitialStateKind::UpDown: {
            Vector v = Vector::Zero(s.pair_dim());
            v((d - 1) * d + 0) = 1.0;
            return DensityMatrix::pure(v);
        }
        case InitialStateKind::Singlet:
            return DensityMatrix::pure(pair_singlet(s));
        case InitialStateKind::Mixed:
            return DensityMatrix::maximally_mixed(s.pair_dim());
        case InitialStateKind::Custom:
            return load_density_matrix_file(file, s.pair_dim());
    }
    throw ConfigError("invalid initial state");
}

inline ScenarioConfig parse_config(const nlohmann::json& j) {
    ScenarioConfig cfg;
    try {
        cfg.scenario = scenario_from_string(j.at("scenario").get<std::string>());
        if (j.contains("model")) cfg.model = model_from_string(j.at("model").get<std::string>());
        cfg.g_grid = detail::grid_from_json(j, "g", "g_grid", cfg.g_grid);
        if (j.contains("q")) cfg.q = j.at("q").get<int>();
        if (j.contains("n_max")) cfg.n_max = j.at("n_max").get<int>();
        cfg.r_pol_grid = detail::grid_from_json(j, "r_pol", "r_pol_grid", cfg.r_pol_grid);
        if (j.contains("two_s")) cfg.s = SpinQuantum(j.at("two_s").get<int>());
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("initial_state")) {
            const nlohmann::json& init = j.at("initial_state");
            if (init.is_string()) {
                const std::string name = init.get<std::string>();
                if (name == "up-down") cfg.initial_state.kind = InitialStateKind::UpDown;
                else if (name == "singlet") cfg.initial_state.kind = InitialStateKind::Singlet;
                else if (name == "mixed") cfg.initial_state.kind = InitialStateKind::Mixed;
                else throw ConfigError("unknown initial_state: " + name);
            } else if (init.is_object() && init.contains("file")) {
                cfg.initial_state.kind = InitialStateKind::Custom;
                cfg.initial_state.file = init.at("file").get<std::string>();
            } else {
                throw ConfigError("initial_state must be a name or {\"file\": path}");
            }
        }
        if (j.contains("noise") && !j.at("noise").is_null()) {
            const nlohmann::json& nz = j.at("noise");
            NoiseGridConfig n;
            n.tb_grid = detail::grid_from_json(nz, "tb_over_td", "tb_over_td_grid", n.tb_grid);
            n.mu_grid = detail::grid_from_json(nz, "mu", "mu_grid", n.mu_grid);
            if (nz.contains("trajectories")) n.trajectories = nz.at("trajectories").get<int>();
            cfg.noise = n;
        }
        if (j.contains("output_path")) cfg.output_path = j.at("output_path").get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("invalid config: ") + ex.what());
    }
    if (cfg.output_path.empty())
        cfg.output_path = std::string(scenario_name(cfg.scenario)) + ".csv";
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError("unparseable config " + path + ": " + ex.what());
    }
    return parse_config(j);
}

inline void ScenarioConfig::validate() const {
    if (g_grid.empty() || r_pol_grid.empty()) throw ConfigError("grids must be non-empty");
    if (n_max < 1) throw ConfigError("n_max must be >= 1");
    if (q < 1) throw ConfigError("q must be a positive integer");
    for (double g : g_grid)
        if (!std::isfinite(g) || g < 0) throw ConfigError("g values must be finite and >= 0");
    for (double r : r_pol_grid)
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("r_pol values must be in [0,1]");
    if (noise) {
        if (noise->tb_grid.empty() || noise->mu_grid.empty())
            throw ConfigError("noise grids must be non-empty");
        for (double tb : noise->tb_grid)
            if (!std::isfinite(tb) || tb < 0) throw ConfigError("tb_over_td must be >= 0");
        for (double mu : noise->mu_grid)
            if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("mu must be in [0,1]");
        if (noise->trajectories < 0) throw ConfigError("trajectories must be >= 0");
        if (s.two_s != 1) throw ConfigError("noise scenarios are defined for two_s = 1");
    }
    if (scenario == ScenarioKind::FixedPoint &&
        (g_grid.size() != 1 || r_pol_grid.size() != 1))
        throw ConfigError("fixedpoint expects a single g and a single r_pol");
    if (scenario == ScenarioKind::Fig5 && !noise)
        throw ConfigError("fig5 requires a noise block");
}

// ---------------------------------------------------------------------------
// Scenario execution

namespace detail {

inline KrausFamily kraus_for(Model model, double g, int q, SpinQuantum s) {
    const AmplitudeTable table = solve(ScatterParams::resonant(model, g, q, s));
    return extract_kraus(table, s);
}

// fig3b compares the models along the shared rescaled-coupling axis: the
// exchange model at g pairs with the Raman model at g/2 (the flip-flop part
// of sigma.S12 carries half the exchange coupling).
inline double raman_equivalent_coupling(double g) { return 0.5 * g; }

} // namespace detail

inline std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg);

namespace detail {

inline RunRecord base_record(const ScenarioConfig& cfg) {
    RunRecord r;
    r.scenario = scenario_name(cfg.scenario);
    r.model = cfg.model;
    r.q = cfg.q;
    return r;
}

inline std::vector<RunRecord> run_fig2_like(const ScenarioConfig& cfg) {
    const DensityMatrix rho0 = cfg.initial_state.realize(cfg.s);
    const double r_pol = cfg.r_pol_grid.front();
    const MediatorState e = MediatorState::from_polarization(r_pol);
    std::vector<std::vector<RunRecord>> per_g(cfg.g_grid.size());
    parallel_for(static_cast<int>(cfg.g_grid.size()), [&](int gi) {
        const KrausFamily k = kraus_for(cfg.model, cfg.g_grid[gi], cfg.q, cfg.s);
        const std::vector<IterationRecord> it = iterate(rho0, e, k, cfg.n_max);
        for (const IterationRecord& rec : it) {
            RunRecord row = base_record(cfg);
            row.g = cfg.g_grid[gi];
            row.r_pol = r_pol;
            row.n = rec.step;
            row.fidelity = rec.fidelity;
            row.probability = rec.probability;
            per_g[gi].push_back(row);
        }
    });
    std::vector<RunRecord> out;
    for (const auto& rows : per_g) out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

inline std::vector<RunRecord> run_fig3b(const ScenarioConfig& cfg) {
    const DensityMatrix rho0 = cfg.initial_state.realize(cfg.s);
    const MediatorState e = MediatorState::from_polarization(cfg.r_pol_grid.front());
    std::vector<int> steps;
    for (int n : {1, 3, 5})
        if (n <= cfg.n_max) steps.push_back(n);
    std::vector<std::vector<RunRecord>> per_g(cfg.g_grid.size());
    parallel_for(static_cast<int>(cfg.g_grid.size()), [&](int gi) {
        const double g = cfg.g_grid[gi];
        const KrausFamily ke = kraus_for(Model::Exchange, g, cfg.q, cfg.s);
        const KrausFamily kr = kraus_for(Model::Raman, raman_equivalent_coupling(g), cfg.q, cfg.s);
        const auto ite = iterate(rho0, e, ke, cfg.n_max);
        const auto itr = iterate(rho0, e, kr, cfg.n_max);
        for (int n : steps) {
            for (Model m : {Model::Exchange, Model::Raman}) {
                const auto& rec = (m == Model::Exchange ? ite : itr)[n - 1];
                RunRecord row = base_record(cfg);
                row.model = m;
                row.g = g;
                row.r_pol = cfg.r_pol_grid.front();
                row.n = n;
                row.fidelity = rec.fidelity;
                row.probability = rec.probability;
                per_g[gi].push_back(row);
            }
        }
    });
    std::vector<RunRecord> out;
    for (const auto& rows : per_g) out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

inline std::vector<RunRecord> run_fig4(const ScenarioConfig& cfg) {
    const DensityMatrix rho0 = cfg.initial_state.realize(cfg.s);
    const KrausFamily k = kraus_for(cfg.model, cfg.g_grid.front(), cfg.q, cfg.s);
    std::vector<std::vector<RunRecord>> per_r(cfg.r_pol_grid.size());
    parallel_for(static_cast<int>(cfg.r_pol_grid.size()), [&](int ri) {
        const double r_pol = cfg.r_pol_grid[ri];
        const auto it = iterate(rho0, MediatorState::from_polarization(r_pol), k, cfg.n_max);
        for (const IterationRecord& rec : it) {
            RunRecord row = base_record(cfg);
            row.g = cfg.g_grid.front();
            row.r_pol = r_pol;
            row.n = rec.step;
            row.fidelity = rec.fidelity;
            row.probability = rec.probability;
            per_r[ri].push_back(row);
        }
    });
    std::vector<RunRecord> out;
    for (const auto& rows : per_r) out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

// Noise grids: exact-channel rows for every (tb, mu, n), then Monte Carlo
// rows (stderr column set) when trajectories > 0. The Monte Carlo pass runs
// the grid sequentially; trajectories parallelize internally.
inline std::vector<RunRecord> run_noise_grid(const ScenarioConfig& cfg) {
    const NoiseGridConfig& nz = *cfg.noise;
    const DensityMatrix rho0 = cfg.initial_state.realize(cfg.s);
    const double r_pol = cfg.r_pol_grid.front();
    const MediatorState e = MediatorState::from_polarization(r_pol);
    const KrausFamily k = kraus_for(cfg.model, cfg.g_grid.front(), cfg.q, cfg.s);

    std::vector<RunRecord> out;
    auto fill = [&](RunRecord& row, double tb, double mu) {
        row.g = cfg.g_grid.front();
        row.r_pol = r_pol;
        row.mu = mu;
        row.tb_over_td = tb;
    };
    for (double tb : nz.tb_grid) {
        for (double mu : nz.mu_grid) {
            const NoiseParams p{tb, mu, 1, cfg.seed};
            const auto it = noisy_iterate(rho0, e, k, cfg.n_max, p);
            for (const IterationRecord& rec : it) {
                RunRecord row = base_record(cfg);
                fill(row, tb, mu);
                row.n = rec.step;
                row.fidelity = rec.fidelity;
                row.probability = rec.probability;
                out.push_back(row);
            }
        }
    }
    if (nz.trajectories > 0) {
        for (double tb : nz.tb_grid) {
            for (double mu : nz.mu_grid) {
                const NoiseParams p{tb, mu, nz.trajectories, cfg.seed};
                const auto mc = monte_carlo_iterate(rho0, e, k, cfg.n_max, p);
                for (const MonteCarloRecord& rec : mc) {
                    RunRecord row = base_record(cfg);
                    fill(row, tb, mu);
                    row.n = rec.step;
                    row.fidelity = rec.fidelity;
                    row.probability = rec.probability;
                    row.stderr_f = rec.stderr_fidelity;
                    out.push_back(row);
                }
            }
        }
    }
    return out;
}

inline std::vector<RunRecord> run_sweep(const ScenarioConfig& cfg) {
    if (cfg.noise) {
        if (cfg.g_grid.size() != 1 || cfg.r_pol_grid.size() != 1)
            throw ConfigError("sweep with noise expects a single g and r_pol");
        return run_noise_grid(cfg);
    }
    const DensityMatrix rho0 = cfg.initial_state.realize(cfg.s);
    struct Job {
        double g, r_pol;
    };
    std::vector<Job> jobs;
    for (double g : cfg.g_grid)
        for (double r : cfg.r_pol_grid) jobs.push_back(Job{g, r});
    std::vector<std::vector<RunRecord>> per_job(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), [&](int ji) {
        const KrausFamily k = kraus_for(cfg.model, jobs[ji].g, cfg.q, cfg.s);
        const auto it = iterate(rho0, MediatorState::from_polarization(jobs[ji].r_pol), k,
                                cfg.n_max);
        for (const IterationRecord& rec : it) {
            RunRecord row = base_record(cfg);
            row.g = jobs[ji].g;
            row.r_pol = jobs[ji].r_pol;
            row.n = rec.step;
            row.fidelity = rec.fidelity;
            row.probability = rec.probability;
            per_job[ji].push_back(row);
        }
    });
    std::vector<RunRecord> out;
    for (const auto& rows : per_job) out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

inline std::vector<RunRecord> run_fixedpoint(const ScenarioConfig& cfg) {
    const KrausFamily k = kraus_for(cfg.model, cfg.g_grid.front(), cfg.q, cfg.s);
    const MediatorState e = MediatorState::from_polarization(cfg.r_pol_grid.front());
    const FixedPointResult fp = fixed_points(k, e);
    std::vector<RunRecord> out;
    int index = 1;
    for (const DensityMatrix& state : fp.states) {
        RunRecord row = base_record(cfg);
        row.g = cfg.g_grid.front();
        row.r_pol = cfg.r_pol_grid.front();
        row.n = index++; // state index
        row.fidelity = fidelity_with_singlet(state, cfg.s);
        row.probability = transmit_step(state, e, k).p1;
        out.push_back(row);
    }
    return out;
}

} // namespace detail

// Runs the configured scenario and writes the canonical CSV to
// cfg.output_path. Record order is the deterministic grid order.
inline std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    std::vector<RunRecord> records;
    switch (cfg.scenario) {
        case ScenarioKind::Fig2: records = detail::run_fig2_like(cfg); break;
        case ScenarioKind::Fig3b: records = detail::run_fig3b(cfg); break;
        case ScenarioKind::Fig4: records = detail::run_fig4(cfg); break;
        case ScenarioKind::Fig5: records = detail::run_noise_grid(cfg); break;
        case ScenarioKind::Sweep: records = detail::run_sweep(cfg); break;
        case ScenarioKind::FixedPoint: records = detail::run_fixedpoint(cfg); break;
    }
    write_csv(cfg.output_path, records);
    return records;
}

// ---------------------------------------------------------------------------
// Bundled figure presets

inline ScenarioConfig bundled_figure_config(const std::string& id) {
    ScenarioConfig cfg;
    if (id == "2") {
        cfg.scenario = ScenarioKind::Fig2;
        cfg.model = Model::Exchange;
        cfg.g_grid = detail::logspace(0.1, 10.0, 40);
        cfg.n_max = 10;
    } else if (id == "3b") {
        cfg.scenario = ScenarioKind::Fig3b;
        cfg.model = Model::Exchange;
        cfg.g_grid = detail::logspace(0.1, 10.0, 40);
        cfg.n_max = 5;
    } else if (id == "4") {
        cfg.scenario = ScenarioKind::Fig4;
        cfg.model = Model::Raman;
        cfg.g_grid = {1.5};
        cfg.r_pol_grid = detail::linspace(0.0, 1.0, 11);
        cfg.n_max = 10;
    } else if (id == "5") {
        cfg.scenario = ScenarioKind::Fig5;
        cfg.model = Model::Raman;
        cfg.g_grid = {1.5};
        cfg.n_max = 5;
        NoiseGridConfig nz;
        nz.tb_grid = detail::linspace(0.0, 1.0, 11);
        nz.mu_grid = {0.0, 0.5, 1.0};
        nz.trajectories = 10000;
        cfg.noise = nz;
    } else {
        throw ConfigError("unknown figure id: " + id + " (expected 2, 3b, 4 or 5)");
    }
    cfg.output_path = "fig" + id + ".csv";
    return cfg;
}

// ---------------------------------------------------------------------------
// Per-figure pivot grids (one fidelity CSV, one probability CSV)

struct PivotTable {
    std::string row_name, col_name;
    std::vector<double> rows, cols;
    std::vector<std::vector<double>> values; // [row][col]
};

inline std::string format_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_pivot_csv(const std::string& path, const PivotTable& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << t.row_name;
    for (double c : t.cols) out << ',' << t.col_name << '=' << format_label(c);
    out << '\n';
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        out << format_label(t.rows[i]);
        for (double v : t.values[i]) out << ',' << format_real(v);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

// Fidelity/probability grids per figure. fig2: n x g; fig3b: n x g holding
// the percentage difference between the models; fig4: n x r_pol; fig5:
// tb_over_td x mu from the exact-channel rows at n = n_max.
inline std::pair<PivotTable, PivotTable> figure_pivots(const ScenarioConfig& cfg,
                                                       const std::vector<RunRecord>& records) {
    auto unique_sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    PivotTable f, pr;
    auto init = [&](const std::string& rn, const std::string& cn, std::vector<double> rows,
                    std::vector<double> cols) {
        for (PivotTable* t : {&f, &pr}) {
            t->row_name = rn;
            t->col_name = cn;
            t->rows = rows;
            t->cols = cols;
            t->values.assign(rows.size(), std::vector<double>(cols.size(), 0.0));
        }
    };
    auto row_of = [](const std::vector<double>& axis, double v) {
        for (std::size_t i = 0; i < axis.size(); ++i)
            if (std::abs(axis[i] - v) <= 1e-12 * std::max(1.0, std::abs(v))) return i;
        throw Error("pivot: axis value not found");
    };

    switch (cfg.scenario) {
        case ScenarioKind::Fig2:
        case ScenarioKind::Fig4: {
            const bool vs_g = cfg.scenario == ScenarioKind::Fig2;
            std::vector<double> ns;
            for (int n = 1; n <= cfg.n_max; ++n) ns.push_back(n);
            init("n", vs_g ? "g" : "r_pol", ns, vs_g ? cfg.g_grid : cfg.r_pol_grid);
            for (const RunRecord& r : records) {
                const std::size_t col = row_of(f.cols, vs_g ? r.g : r.r_pol);
                f.values[r.n - 1][col] = r.fidelity;
                pr.values[r.n - 1][col] = r.probability;
            }
            break;
        }
        case ScenarioKind::Fig3b: {
            std::vector<double> ns;
            for (int n : {1, 3, 5})
                if (n <= cfg.n_max) ns.push_back(n);
            init("n", "g", ns, cfg.g_grid);
            for (std::size_t i = 0; i + 1 < records.size(); i += 2) {
                const RunRecord& ex = records[i];
                const RunRecord& ra = records[i + 1];
                const std::size_t row = row_of(f.rows, ex.n);
                const std::size_t col = row_of(f.cols, ex.g);
                f.values[row][col] = 100.0 * std::abs(ex.fidelity - ra.fidelity) / ex.fidelity;
                pr.values[row][col] =
                    100.0 * std::abs(ex.probability - ra.probability) / ex.probability;
            }
            break;
        }
        case ScenarioKind::Fig5: {
            init("tb_over_td", "mu", cfg.noise->tb_grid, cfg.noise->mu_grid);
            for (const RunRecord& r : records) {
                if (r.stderr_f || r.n != cfg.n_max) continue; // exact rows at n_max
                f.values[row_of(f.rows, r.tb_over_td)][row_of(f.cols, r.mu)] = r.fidelity;
                pr.values[row_of(f.rows, r.tb_over_td)][row_of(f.cols, r.mu)] = r.probability;
            }
            break;
        }
        default: {
            // generic fallback: n x g
            std::vector<double> ns;
            for (int n = 1; n <= cfg.n_max; ++n) ns.push_back(n);
            init("n", "g", ns, unique_sorted(cfg.g_grid));
            for (const RunRecord& r : records) {
                if (r.stderr_f) continue;
                f.values[r.n - 1][row_of(f.cols, r.g)] = r.fidelity;
                pr.values[r.n - 1][row_of(f.cols, r.g)] = r.probability;
            }
            break;
        }
    }
    return {f, pr};
}

} // namespace spinsim

#endif
