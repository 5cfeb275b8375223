// SPDX-License-Identifier: Apache-2.0
//
// dmabeam: DMA analog receive beamforming for area-wide sensing and
// multi-user uplink communications
// Copyright (C) 2026 dmabeam contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "dmabeam/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmabeam/io.hpp"
#include "dmabeam/pipeline.hpp"
#include "dmabeam/reference.hpp"

namespace dmabeam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunContext {
    ExperimentSpec spec;
    ScenarioConfig scenario;
    fs::path out;
    json manifest;
    std::vector<std::string> artifacts;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void note_artifact(const std::string& name) { artifacts.push_back(name); }
    fs::path file(const std::string& name) {
        note_artifact(name);
        return out / name;
    }
};

std::vector<double> default_power_sweep() { return {-20, -15, -10, -5, 0, 5, 10}; }
std::vector<double> default_gamma_sweep() { return {10, 20, 30}; }

int tier_trials(const ExperimentSpec& spec) {
    if (spec.trials > 0) return spec.trials;
    return spec.tier == "full" ? 500 : 50;
}

GridSpec tier_grid(const ExperimentSpec& spec) {
    GridSpec grid;  // 120 x 140 over r in [1.5, 12] m, phi in [5, 85] deg
    if (spec.tier == "reduced") {
        grid.r_min = 0.4;
        grid.r_max = 2.0;
    }
    return grid;
}

DesignOptions design_options(const ExperimentSpec& spec) {
    DesignOptions opt;
    opt.strict_codebook = spec.strict_codebook;
    opt.uncorrected_lifting = spec.uncorrected_lifting;
    opt.sdp.verbose = spec.verbose;
    return opt;
}

DesignResult run_design(const ScenarioConfig& sc, const PropagationMatrix& p_rx,
                        const LiftedBlocks& lifted, DesignMethod method,
                        const DesignOptions& opt) {
    switch (method) {
        case DesignMethod::p1: return design_p1(sc, p_rx, lifted, opt);
        case DesignMethod::p2: return design_p2(sc, p_rx, lifted, opt);
        default: return design_cfs(sc, p_rx, lifted, opt);
    }
}

void write_manifest(RunContext& ctx) {
    ctx.manifest["experiment"] = ctx.spec.experiment;
    ctx.manifest["tier"] = ctx.spec.tier;
    ctx.manifest["seed"] = ctx.spec.seed;
    ctx.manifest["scenario_path"] =
        ctx.spec.scenario_path.empty() ? "<builtin>" : ctx.spec.scenario_path;
    ctx.manifest["scenario"] = scenario_to_json(ctx.scenario);
    json methods = json::array();
    for (auto m : ctx.spec.methods) methods.push_back(to_string(m));
    ctx.manifest["methods"] = methods;
    ctx.manifest["versions"] = {{"dmabeam", kProjectVersion}, {"compiler", __VERSION__}};
    ctx.manifest["artifacts"] = ctx.artifacts;
    ctx.manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.t0).count();
    std::ofstream out(ctx.out / "manifest.json");
    out << ctx.manifest.dump(2) << '\n';
}

int experiment_design(RunContext& ctx) {
    const auto p_rx = build_propagation_matrix(ctx.scenario.panel);
    const auto channels = build_channels(ctx.scenario);
    const auto opt = design_options(ctx.spec);
    const auto lifted = build_lifted_blocks(ctx.scenario, channels, p_rx, !opt.uncorrected_lifting);
    if (ctx.spec.dump_channels) write_channels_csv(ctx.file("channels.csv"), channels);

    json summary = json::array();
    for (DesignMethod method : ctx.spec.methods) {
        const DesignResult result = run_design(ctx.scenario, p_rx, lifted, method, opt);
        const std::string name = to_string(method);
        {
            std::ofstream out(ctx.file("design_" + name + ".json"));
            out << design_result_to_json(result).dump(2) << '\n';
        }
        if (result.feasible) {
            write_phases_csv(ctx.file("phases_" + name + ".csv"), result.weights);
            const auto q_rx = BlockDiagHermitian::from_combiner(
                result.weights.assembled(), ctx.scenario.panel.n_rf, ctx.scenario.panel.n_e);
            write_fim_csv(ctx.file("fim_aoi_" + name + ".csv"),
                          fim(ctx.scenario, aoi_params(ctx.scenario), q_rx, p_rx).matrix);
            std::cout << name << ": peb_aoi " << result.audit.peb_aoi << ", snr_db [";
            for (size_t u = 0; u < result.audit.achieved_snr_db.size(); ++u)
                std::cout << (u ? ", " : "") << result.audit.achieved_snr_db[u];
            std::cout << "], " << result.wall_time_s << " s\n";
        } else {
            std::cout << name << ": " << result.solver.message << '\n';
        }
        summary.push_back({{"method", name},
                           {"feasible", result.feasible},
                           {"peb_aoi", result.audit.peb_aoi},
                           {"wall_time_s", result.wall_time_s}});
    }
    ctx.manifest["designs"] = summary;
    return 0;
}

int experiment_rmse_sweep(RunContext& ctx) {
    const auto p_rx = build_propagation_matrix(ctx.scenario.panel);
    const auto channels = build_channels(ctx.scenario);
    const auto opt = design_options(ctx.spec);
    const auto lifted = build_lifted_blocks(ctx.scenario, channels, p_rx, !opt.uncorrected_lifting);
    const auto powers =
        ctx.spec.power_sweep_dbm.empty() ? default_power_sweep() : ctx.spec.power_sweep_dbm;
    const int trials = tier_trials(ctx.spec);
    const GridSpec grid = tier_grid(ctx.spec);

    // Localization validation runs with every target transmitting: a passive
    // scatterer only re-radiates the UE signals coherently, so it spans no
    // subspace dimension of its own and blind one-block MUSIC cannot separate
    // it. The audited beamformer is still the dual-functional design above.
    ScenarioConfig mc_scenario = ctx.scenario;
    mc_scenario.num_ues = mc_scenario.num_targets();
    mc_scenario.snr_thresholds.resize(mc_scenario.num_ues,
                                      mc_scenario.snr_thresholds.empty()
                                          ? 1.0
                                          : mc_scenario.snr_thresholds.back());
    mc_scenario.reflection_model = ReflectionModel::attenuated;
    populate_reflection_coeffs(mc_scenario);
    ctx.manifest["rmse_all_targets_active"] = true;

    json floors;
    for (DesignMethod method : ctx.spec.methods) {
        const DesignResult design = run_design(ctx.scenario, p_rx, lifted, method, opt);
        const std::string name = to_string(method);
        if (!design.feasible) {
            std::cout << name << ": skipped (" << design.solver.message << ")\n";
            continue;
        }
        const RmseTable table = monte_carlo_rmse(mc_scenario, design.weights, powers, trials,
                                                 ctx.spec.seed, grid);
        write_rmse_csv(ctx.file("rmse_sweep_" + name + ".csv"), table);
        floors[name] = {{"grid_floor_m", table.grid_floor_m}, {"trials", table.trials}};
        std::cout << name << ": rmse " << table.rows.front().rmse_m << " m @ "
                  << table.rows.front().power_dbm << " dBm -> " << table.rows.back().rmse_m
                  << " m @ " << table.rows.back().power_dbm << " dBm\n";
    }
    ctx.manifest["rmse"] = floors;
    return 0;
}

int experiment_snr_sweep(RunContext& ctx) {
    const auto gammas =
        ctx.spec.gamma_sweep_db.empty() ? default_gamma_sweep() : ctx.spec.gamma_sweep_db;
    const auto tables =
        snr_tradeoff_sweep(ctx.scenario, ctx.spec.methods, gammas, design_options(ctx.spec));
    for (const auto& table : tables) {
        const std::string name = to_string(table.method);
        write_snr_sweep_csv(ctx.file("snr_sweep_" + name + ".csv"), table);
        std::cout << name << ":";
        for (const auto& row : table.rows)
            std::cout << " " << row.gamma_db << "dB->" << row.peb;
        std::cout << '\n';
    }
    return 0;
}

int experiment_beampattern(RunContext& ctx) {
    const auto p_rx = build_propagation_matrix(ctx.scenario.panel);
    const auto channels = build_channels(ctx.scenario);
    const auto opt = design_options(ctx.spec);
    const auto lifted = build_lifted_blocks(ctx.scenario, channels, p_rx, !opt.uncorrected_lifting);
    const GridSpec grid = tier_grid(ctx.spec);
    for (DesignMethod method : ctx.spec.methods) {
        const DesignResult design = run_design(ctx.scenario, p_rx, lifted, method, opt);
        const std::string name = to_string(method);
        if (!design.feasible) {
            std::cout << name << ": skipped (" << design.solver.message << ")\n";
            continue;
        }
        const MapResult map = beampattern_map(ctx.scenario, design.weights, grid);
        ctx.note_artifact("beampattern_" + name + "_axes.csv");
        write_map_csv((ctx.out / ("beampattern_" + name)).string(), map);
        ctx.note_artifact("beampattern_" + name + ".csv");
        std::cout << name << ": beampattern written\n";
    }
    return 0;
}

int experiment_peb_map(RunContext& ctx) {
    const auto p_rx = build_propagation_matrix(ctx.scenario.panel);
    const auto channels = build_channels(ctx.scenario);
    const auto opt = design_options(ctx.spec);
    const auto lifted = build_lifted_blocks(ctx.scenario, channels, p_rx, !opt.uncorrected_lifting);
    const GridSpec grid = tier_grid(ctx.spec);
    for (DesignMethod method : ctx.spec.methods) {
        const DesignResult design = run_design(ctx.scenario, p_rx, lifted, method, opt);
        const std::string name = to_string(method);
        if (!design.feasible) {
            std::cout << name << ": skipped (" << design.solver.message << ")\n";
            continue;
        }
        const MapResult map = peb_map(ctx.scenario, design.weights, grid);
        write_map_csv((ctx.out / ("peb_map_" + name)).string(), map);
        ctx.note_artifact("peb_map_" + name + ".csv");
        ctx.note_artifact("peb_map_" + name + "_axes.csv");
        std::cout << name << ": peb map written\n";
    }
    return 0;
}

int experiment_solver_selftest(RunContext& ctx) {
    int failures = 0;
    auto report = [&](const char* name, bool pass) {
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << '\n';
        if (!pass) ++failures;
    };

    {
        SdpProblem p;
        p.block_sizes = {2};
        RMatrix c = RMatrix::Zero(2, 2);
        c(0, 0) = 1.0;
        c(1, 1) = 2.0;
        p.objective.push_back(SdpTerm::from_dense(0, c));
        SdpConstraint con;
        con.terms.push_back(SdpTerm::from_entries(0, {{0, 0, 1.0}, {1, 1, 1.0}}));
        con.rhs = 1.0;
        p.constraints.push_back(con);
        const auto sol = solve(p);
        report("minimum-eigenvalue program -> 1",
               sol.status == SdpStatus::optimal && std::abs(sol.objective_value - 1.0) < 1e-6);
    }
    {
        SdpProblem p;
        p.block_sizes = {2};
        RMatrix c = RMatrix::Zero(2, 2);
        c(0, 0) = 0.5;
        c(1, 1) = 0.5;
        p.objective.push_back(SdpTerm::from_dense(0, c));
        SdpConstraint offdiag;
        offdiag.terms.push_back(SdpTerm::from_entries(0, {{0, 1, 0.5}}));
        offdiag.rhs = 1.0;
        p.constraints.push_back(offdiag);
        SdpConstraint tie;
        tie.terms.push_back(SdpTerm::from_entries(0, {{0, 0, 1.0}, {1, 1, -1.0}}));
        tie.rhs = 0.0;
        p.constraints.push_back(tie);
        auto sol = solve(p);
        bool pass =
            sol.status == SdpStatus::optimal && std::abs(sol.objective_value - 1.0) < 1e-6;
        for (const auto& [primal, dual] : sol.objective_history)
            pass = pass && dual <= primal + 1e-9 * (1.0 + std::abs(primal));
        report("bordered PSD program -> 1 with weak duality", pass);

        std::stringstream ss;
        dump_problem(p, ss);
        const auto reloaded = solve(load_problem(ss));
        report("dump/load round-trip solves identically",
               reloaded.status == SdpStatus::optimal &&
                   std::abs(reloaded.objective_value - sol.objective_value) < 1e-12);
    }
    {
        SdpProblem p;
        p.block_sizes = {3, 3};
        p.objective.push_back(SdpTerm::from_dense(0, -RMatrix::Identity(3, 3)));
        for (int r = 0; r < 3; ++r)
            for (int c2 = r; c2 < 3; ++c2) {
                SdpConstraint con;
                con.terms.push_back(SdpTerm::from_entries(0, {{r, c2, 1.0}}));
                con.terms.push_back(SdpTerm::from_entries(1, {{r, c2, 1.0}}));
                con.rhs = (r == c2) ? 1.0 : 0.0;
                p.constraints.push_back(con);
            }
        const auto sol = solve(p);
        report("identity-capped trace -> 3",
               sol.status == SdpStatus::optimal && std::abs(-sol.objective_value - 3.0) < 1e-6);
    }
    ctx.manifest["selftest_failures"] = failures;
    return failures == 0 ? 0 : 1;
}

int experiment_complexity_report(RunContext& ctx) {
    const ComplexityReport rep = complexity_report(ctx.scenario);
    const json j = complexity_report_to_json(rep);
    {
        std::ofstream out(ctx.file("complexity_report.json"));
        out << j.dump(2) << '\n';
    }
    std::cout << "n_p1 " << rep.n_p1 << " (C = " << rep.c_p1 << ")\n"
              << "n_p2 " << rep.n_p2 << " (C = " << rep.c_p2 << ")\n"
              << "cfs svd count " << rep.cfs_svd_count << '\n';
    return 0;
}

}  // namespace

int run(const ExperimentSpec& spec) {
    try {
        RunContext ctx;
        ctx.spec = spec;

        if (spec.scenario_path.empty()) {
            ctx.scenario = spec.tier == "full" ? default_scenario() : reduced_scenario();
        } else {
            const ConfigResult cfg = validate_config(spec.scenario_path);
            if (!cfg.ok()) {
                json err = {{"error", "invalid scenario config"},
                            {"path", spec.scenario_path},
                            {"details", cfg.errors}};
                std::cerr << err.dump() << '\n';
                return 2;
            }
            ctx.scenario = *cfg.config;
        }
        ctx.scenario.validate();

        fs::path out_root = spec.out_dir;
        if (const char* env_root = std::getenv(kOutRootEnv))
            out_root = fs::path(env_root) / spec.out_dir;
        fs::create_directories(out_root);
        ctx.out = out_root;

        int status = 0;
        if (spec.experiment == "design")
            status = experiment_design(ctx);
        else if (spec.experiment == "rmse-sweep")
            status = experiment_rmse_sweep(ctx);
        else if (spec.experiment == "snr-sweep")
            status = experiment_snr_sweep(ctx);
        else if (spec.experiment == "beampattern")
            status = experiment_beampattern(ctx);
        else if (spec.experiment == "peb-map")
            status = experiment_peb_map(ctx);
        else if (spec.experiment == "solver-selftest")
            status = experiment_solver_selftest(ctx);
        else if (spec.experiment == "complexity-report")
            status = experiment_complexity_report(ctx);
        else {
            json err = {{"error", "unknown experiment"}, {"experiment", spec.experiment}};
            std::cerr << err.dump() << '\n';
            return 2;
        }
        write_manifest(ctx);
        return status;
    } catch (const std::exception& e) {
        json err = {{"error", e.what()}, {"experiment", spec.experiment}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"DMA receive beamforming designs for joint area sensing and uplink"};
    app.require_subcommand(1);

    ExperimentSpec spec;
    std::vector<std::string> method_names;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", spec.scenario_path, "scenario JSON file");
        cmd->add_option("--method", method_names, "p1 | p2 | cfs (repeatable)");
        cmd->add_option("--tier", spec.tier, "reduced | full")
            ->check(CLI::IsMember({"reduced", "full"}));
        cmd->add_option("--seed", spec.seed, "random seed");
        cmd->add_option("--out", spec.out_dir, "output directory");
        cmd->add_flag("--strict-codebook", spec.strict_codebook,
                      "clamp phases to [-pi/2, pi/2]");
        cmd->add_flag("--uncorrected-lifting", spec.uncorrected_lifting,
                      "zero lift constants, bare-gamma SNR threshold");
        cmd->add_flag("--verbose", spec.verbose, "solver iteration log");
    };

    CLI::App* design = app.add_subcommand("design", "optimize weights and audit them");
    add_common(design);
    design->add_flag("--dump-channels", spec.dump_channels, "write channels.csv");

    CLI::App* rmse = app.add_subcommand("rmse-sweep", "Monte-Carlo RMSE/PEB vs power");
    add_common(rmse);
    rmse->add_option("--trials", spec.trials, "Monte-Carlo trials per power");
    rmse->add_option("--power-dbm", spec.power_sweep_dbm, "power sweep points [dBm]");

    CLI::App* snr = app.add_subcommand("snr-sweep", "audited PEB vs SNR threshold");
    add_common(snr);
    snr->add_option("--gamma-db", spec.gamma_sweep_db, "threshold sweep points [dB]");

    CLI::App* beam = app.add_subcommand("beampattern", "normalized gain map");
    add_common(beam);

    CLI::App* pmap = app.add_subcommand("peb-map", "PEB map over the region");
    add_common(pmap);

    CLI::App* selftest = app.add_subcommand("solver-selftest", "analytic SDP oracles");
    add_common(selftest);

    CLI::App* complexity = app.add_subcommand("complexity-report", "size formulas");
    add_common(complexity);

    CLI11_PARSE(app, argc, argv);

    for (CLI::App* cmd : {design, rmse, snr, beam, pmap, selftest, complexity})
        if (cmd->parsed()) spec.experiment = cmd->get_name();

    if (!method_names.empty()) {
        spec.methods.clear();
        for (const auto& name : method_names) {
            if (name == "p1")
                spec.methods.push_back(DesignMethod::p1);
            else if (name == "p2")
                spec.methods.push_back(DesignMethod::p2);
            else if (name == "cfs")
                spec.methods.push_back(DesignMethod::cfs);
            else {
                std::cerr << nlohmann::json({{"error", "unknown method " + name}}).dump()
                          << '\n';
                return 2;
            }
        }
    }
    return run(spec);
}

}  // namespace dmabeam
