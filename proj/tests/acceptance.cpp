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

// End-to-end acceptance checks for the reduced instance. Each criterion prints
// one PASS/FAIL line; the exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "dmabeam/cli.hpp"
#include "dmabeam/io.hpp"
#include "dmabeam/pipeline.hpp"
#include "dmabeam/reference.hpp"

using namespace dmabeam;

namespace {

struct Shared {
    ScenarioConfig scenario;
    PropagationMatrix p_rx;
    ChannelSet channels;
    LiftedBlocks lifted;
    DesignResult p1, p2, cfs;
    double design_seconds = 0.0;
};

Shared& shared() {
    static Shared s = [] {
        Shared sh;
        sh.scenario = reduced_scenario();
        sh.p_rx = build_propagation_matrix(sh.scenario.panel);
        sh.channels = build_channels(sh.scenario);
        sh.lifted = build_lifted_blocks(sh.scenario, sh.channels, sh.p_rx, true);
        const auto t0 = std::chrono::steady_clock::now();
        sh.p1 = design_p1(sh.scenario, sh.p_rx, sh.lifted);
        sh.p2 = design_p2(sh.scenario, sh.p_rx, sh.lifted);
        sh.cfs = design_cfs(sh.scenario, sh.p_rx, sh.lifted);
        sh.design_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return sh;
    }();
    return s;
}

GridSpec reduced_grid() {
    GridSpec grid;
    grid.r_min = 0.4;
    grid.r_max = 2.0;
    return grid;
}

bool check_lorentzian(const DesignResult& design, const ScenarioConfig& sc, std::string& why) {
    if (!design.feasible) {
        why = std::string(to_string(design.method)) + " design infeasible";
        return false;
    }
    const CMatrix w = design.weights.assembled();
    const int n_e = sc.panel.n_e;
    for (int i = 0; i < sc.panel.n_rf; ++i) {
        int nonzero = 0;
        for (int r = 0; r < w.rows(); ++r) {
            const Complex value = w(r, i);
            const bool in_block = r >= i * n_e && r < (i + 1) * n_e;
            if (!in_block) {
                if (std::abs(value) != 0.0) {
                    why = "support leak outside microstrip block";
                    return false;
                }
                continue;
            }
            ++nonzero;
            if (std::abs(std::abs(value - Complex{0.0, 0.5}) - 0.5) > 1e-9) {
                why = "weight off the Lorentzian circle";
                return false;
            }
        }
        if (nonzero != n_e) {
            why = "wrong per-column support count";
            return false;
        }
    }
    return true;
}

// ---- criteria -------------------------------------------------------------

bool criterion_1(std::string& detail) {
    auto& sh = shared();
    std::string why;
    for (const DesignResult* d : {&sh.p1, &sh.p2, &sh.cfs})
        if (!check_lorentzian(*d, sh.scenario, why)) {
            detail = why;
            return false;
        }
    std::ostringstream os;
    os << "all weights on the codebook circle, block support exact; designs took "
       << sh.design_seconds << " s";
    detail = os.str();
    return sh.design_seconds < 60.0;
}

bool criterion_2(std::string& detail) {
    const PanelConfig panel = reduced_scenario().panel;
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> ur(0.5, 50.0), ut(0.3, kPi - 0.3), up(-2.5, 2.5);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const SphericalPoint p{ur(rng), ut(rng), up(rng)};
        const auto jac = steering_jacobian(panel, p, 0.0);
        const CVector* cols[3] = {&jac.d_r, &jac.d_theta, &jac.d_phi};
        for (int coord = 0; coord < 3; ++coord) {
            const double step = 1e-6 * std::max(p.r, 1.0);
            SphericalPoint lo = p, hi = p;
            switch (coord) {
                case 0: lo.r -= step; hi.r += step; break;
                case 1: lo.theta -= step; hi.theta += step; break;
                default: lo.phi -= step; hi.phi += step; break;
            }
            const CVector fd =
                (steering_vector(panel, hi, 0.0).value - steering_vector(panel, lo, 0.0).value) /
                (2.0 * step);
            worst = std::max(worst,
                             (*cols[coord] - fd).norm() / std::max(fd.norm(), 1e-30));
        }
    }
    std::ostringstream os;
    os << "worst relative error " << worst;
    detail = os.str();
    return worst <= 1e-4;
}

bool criterion_3(std::string& detail) {
    ScenarioConfig sc;
    sc.panel.carrier_freq = 20e9;
    sc.panel.wavelength = kSpeedOfLight / sc.panel.carrier_freq;
    sc.panel.n_rf = 2;
    sc.panel.n_e = 3;
    sc.panel.d_rf = sc.panel.wavelength / 2.0;
    sc.panel.d_e = sc.panel.wavelength / 5.0;
    sc.panel.waveguide_beta = 2.0 * kPi / sc.panel.wavelength;
    const double th = deg_to_rad(35.0);
    sc.targets = {{2.0, th, deg_to_rad(20.0)}, {3.5, th, deg_to_rad(55.0)}};
    sc.num_ues = 1;
    sc.reflection_model = ReflectionModel::explicit_list;
    sc.reflection_coeffs = {Complex{1.0, 0.0}, Complex{0.03, 0.02}};
    sc.aoi = {{2.5, th, deg_to_rad(30.0)}};
    sc.noise_var = 1e-9;
    sc.p_max = 1e-3;
    sc.snr_thresholds = {10.0};
    sc.num_symbols = 4;

    const auto p_rx = build_propagation_matrix(sc.panel);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uphi(-kPi, kPi);
    CMatrix w = CMatrix::Zero(sc.panel.total_elements(), sc.panel.n_rf);
    for (int i = 0; i < sc.panel.n_rf; ++i)
        for (int n = 0; n < sc.panel.n_e; ++n)
            w(i * sc.panel.n_e + n, i) = 0.5 * (kImag + std::polar(1.0, uphi(rng)));
    const CMatrix symbols = qpsk_symbols(sc.num_ues, sc.num_symbols, 5);

    auto mean_vector = [&](const ScenarioConfig& s) {
        const auto cs = build_channels(s);
        CMatrix y = CMatrix::Zero(s.panel.n_rf, s.num_symbols);
        for (int u = 0; u < s.num_ues; ++u)
            y += std::sqrt(s.p_max) * (w.adjoint() * p_rx.apply_hermitian(cs.h_total[u])) *
                 symbols.row(u);
        return CVector(Eigen::Map<const CVector>(y.data(), y.size()));
    };

    const ParamVector params = target_params(sc);
    const int dim = params.dim();
    std::vector<CVector> dmu(dim);
    for (int p = 0; p < dim; ++p) {
        const int k = params.point_of(p);
        const double step = 1e-6 * std::max(sc.targets[k].r, 1.0);
        ScenarioConfig lo = sc, hi = sc;
        auto bump = [&](ScenarioConfig& s, double d) {
            switch (params.coord_of(p)) {
                case 0: s.targets[k].r += d; break;
                case 1: s.targets[k].theta += d; break;
                default: s.targets[k].phi += d; break;
            }
        };
        bump(lo, -step);
        bump(hi, step);
        dmu[p] = (mean_vector(hi) - mean_vector(lo)) / (2.0 * step);
    }
    RMatrix oracle(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            oracle(i, j) = 2.0 / sc.noise_var * dmu[i].dot(dmu[j]).real();

    const auto q = BlockDiagHermitian::from_combiner(w, sc.panel.n_rf, sc.panel.n_e);
    const FimBundle bundle = fim(sc, params, q, p_rx);
    const double rel = (bundle.matrix - oracle).norm() / oracle.norm();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(bundle.matrix, Eigen::EigenvaluesOnly);
    const bool psd = es.eigenvalues().minCoeff() >= -1e-8 * es.eigenvalues().maxCoeff();
    std::ostringstream os;
    os << "relative error " << rel << ", min eig " << es.eigenvalues().minCoeff();
    detail = os.str();
    return rel <= 1e-4 && psd;
}

bool criterion_4(std::string& detail) {
    auto& sh = shared();
    const ScenarioConfig& sc = sh.scenario;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uphi(-kPi, kPi);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        CMatrix w = CMatrix::Zero(sc.panel.total_elements(), sc.panel.n_rf);
        double lifted_sum = 0.0;
        for (int i = 0; i < sc.panel.n_rf; ++i) {
            CVector q(sc.panel.n_e);
            for (int n = 0; n < sc.panel.n_e; ++n) q(n) = std::polar(1.0, uphi(rng));
            for (int n = 0; n < sc.panel.n_e; ++n)
                w(i * sc.panel.n_e + n, i) = 0.5 * (kImag + q(n));
            CVector qe(sc.panel.n_e + 1);
            qe << q, Complex{1.0, 0.0};
            lifted_sum += 0.25 * (qe.adjoint() * sh.lifted.h_blocks[0][i] * qe)(0, 0).real();
        }
        const double direct =
            (w.adjoint() * sh.p_rx.apply_hermitian(sh.channels.h_total[0])).squaredNorm();
        worst = std::max(worst, std::abs(lifted_sum - direct) / direct);
    }
    std::ostringstream os;
    os << "worst relative mismatch " << worst;
    detail = os.str();
    return worst <= 1e-10;
}

bool criterion_5(std::string& detail) {
    int failures = 0;
    double worst_obj_err = 0.0;
    bool duality_ok = true;

    auto run_oracle = [&](SdpProblem p, double expected) {
        const auto sol = solve(p);
        if (sol.status != SdpStatus::optimal) ++failures;
        worst_obj_err = std::max(worst_obj_err, std::abs(sol.objective_value - expected));
        for (const auto& [primal, dual] : sol.objective_history)
            duality_ok = duality_ok && dual <= primal + 1e-9 * (1.0 + std::abs(primal));
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
        run_oracle(p, 1.0);
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
        run_oracle(p, 1.0);
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
        run_oracle(p, -3.0);
    }
    std::ostringstream os;
    os << "worst objective error " << worst_obj_err << ", weak duality "
       << (duality_ok ? "held" : "VIOLATED");
    detail = os.str();
    return failures == 0 && worst_obj_err <= 1e-6 && duality_ok;
}

bool criterion_6(std::string& detail) {
    auto& sh = shared();
    if (!sh.p1.feasible || !sh.p2.feasible) {
        detail = "p1/p2 infeasible";
        return false;
    }
    const double peb_p1 = sh.p1.audit.peb_aoi;
    const double peb_p2 = sh.p2.audit.peb_aoi;
    const double cfs_objective = sh.cfs.solver.relaxed_objective;
    const double p2_objective = sh.p2.solver.relaxed_objective;
    std::ostringstream os;
    os << "PEB(P1) " << peb_p1 << " vs PEB(P2) " << peb_p2 << "; P2 objective "
       << p2_objective << " vs CFS " << cfs_objective;
    detail = os.str();
    return peb_p1 <= peb_p2 * 1.05 && p2_objective >= cfs_objective * (1.0 - 1e-9);
}

bool criterion_7(std::string& detail) {
    auto& sh = shared();
    std::ostringstream os;
    bool pass = true;
    for (const DesignResult* d : {&sh.p1, &sh.p2}) {
        double worst_ratio = 0.0;
        for (double r : d->solver.rank_one_ratios) worst_ratio = std::max(worst_ratio, r);
        if (worst_ratio < 1e-6) {
            for (size_t u = 0; u < d->audit.shortfall_db.size(); ++u)
                if (d->audit.shortfall_db[u] > 0.5) {
                    pass = false;
                    os << to_string(d->method) << " UE" << u << " shortfall "
                       << d->audit.shortfall_db[u] << " dB; ";
                }
            os << to_string(d->method) << " rank-one (" << worst_ratio << "), snr ok; ";
        } else {
            bool flagged = false;
            for (const auto& f : d->audit.flags)
                flagged = flagged || f.find("rank-one gap") != std::string::npos;
            if (!flagged) {
                pass = false;
                os << to_string(d->method) << " rank-one gap not reported; ";
            } else {
                os << to_string(d->method) << " flagged rank-one gap " << worst_ratio << "; ";
            }
        }
    }
    detail = os.str();
    return pass;
}

bool criterion_8(std::string& detail) {
    auto& sh = shared();
    const auto tables = snr_tradeoff_sweep(
        sh.scenario, {DesignMethod::p1, DesignMethod::p2, DesignMethod::cfs},
        {10.0, 20.0, 30.0});
    bool pass = true;
    std::ostringstream os;
    for (const auto& table : tables) {
        for (const auto& row : table.rows)
            if (std::isinf(row.peb)) {
                pass = false;
                os << to_string(table.method) << " infeasible at " << row.gamma_db << " dB; ";
            }
        for (size_t k = 0; k + 1 < table.rows.size(); ++k)
            if (table.rows[k + 1].peb < table.rows[k].peb * (1.0 - 1e-6)) {
                pass = false;
                os << to_string(table.method) << " bound decreased at "
                   << table.rows[k + 1].gamma_db << " dB; ";
            }
        if (table.method == DesignMethod::cfs) {
            const double base = table.rows[0].peb;
            for (const auto& row : table.rows)
                if (std::abs(row.peb - base) > 1e-9 * std::max(1.0, base)) {
                    pass = false;
                    os << "cfs bound varies across gamma; ";
                }
        }
        os << to_string(table.method) << ":";
        for (const auto& row : table.rows) os << " " << row.peb;
        os << "; ";
    }
    detail = os.str();
    return pass;
}

bool criterion_9(std::string& detail) {
    auto& sh = shared();
    if (!sh.p1.feasible) {
        detail = "p1 infeasible";
        return false;
    }
    ScenarioConfig mc = sh.scenario;
    mc.num_ues = mc.num_targets();
    mc.snr_thresholds.assign(mc.num_ues, 1.0);
    mc.reflection_model = ReflectionModel::attenuated;
    populate_reflection_coeffs(mc);
    const std::vector<double> powers = {-20, -15, -10, -5, 0, 5, 10};
    const RmseTable table =
        monte_carlo_rmse(mc, sh.p1.weights, powers, 50, 7, reduced_grid());
    bool pass = true;
    std::ostringstream os;
    os << "floor " << table.grid_floor_m << ";";
    for (size_t k = 0; k < table.rows.size(); ++k) {
        const auto& row = table.rows[k];
        os << " (" << row.power_dbm << " dBm: rmse " << row.rmse_m << ", peb " << row.peb_m
           << ")";
        if (k > 0 && row.rmse_m > table.rows[k - 1].rmse_m + table.grid_floor_m) {
            pass = false;
            os << " INCREASED;";
        }
        if (row.rmse_m > table.grid_floor_m && row.rmse_m < row.peb_m) {
            pass = false;
            os << " BELOW BOUND;";
        }
    }
    detail = os.str();
    return pass;
}

bool criterion_10(std::string& detail) {
    ScenarioConfig sc = reduced_scenario();
    sc.targets.clear();
    sc.num_ues = 0;
    sc.snr_thresholds.clear();
    sc.reflection_coeffs.clear();
    sc.aoi = {{0.9, deg_to_rad(30.0), deg_to_rad(40.0)}};
    const auto p_rx = build_propagation_matrix(sc.panel);
    const auto channels = build_channels(sc);
    const auto lifted = build_lifted_blocks(sc, channels, p_rx, true);
    const auto design = design_cfs(sc, p_rx, lifted);
    const GridSpec grid = reduced_grid();
    const MapResult map = beampattern_map(sc, design.weights, grid);
    int ir, ip;
    map.values.maxCoeff(&ir, &ip);
    const double dr = (grid.r_max - grid.r_min) / (grid.n_r - 1);
    const double dp = (grid.phi_max - grid.phi_min) / (grid.n_phi - 1);
    const double cells_r = std::abs(map.r_axis(ir) - 0.9) / dr;
    const double cells_p = std::abs(map.phi_axis(ip) - deg_to_rad(40.0)) / dp;
    std::ostringstream os;
    os << "argmax offset (" << cells_r << ", " << cells_p << ") cells";
    detail = os.str();
    return cells_r <= 2.0 && cells_p <= 2.0;
}

bool criterion_11(std::string& detail) {
    const ComplexityReport rep = complexity_report(default_scenario());
    std::ostringstream os;
    os << "n_p1 " << rep.n_p1 << ", n_p2 " << rep.n_p2 << ", cfs " << rep.cfs_svd_count;
    detail = os.str();
    return rep.n_p1 == 33824 && rep.n_p2 == 33800 && rep.cfs_svd_count == 2197000;
}

bool criterion_12(std::string& detail) {
    namespace fs = std::filesystem;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const fs::path root = fs::temp_directory_path() / "dmabeam_determinism";
    fs::remove_all(root);

    auto run_once = [&](const std::string& tag) {
        ExperimentSpec spec;
        spec.experiment = "rmse-sweep";
        spec.methods = {DesignMethod::cfs};
        spec.tier = "reduced";
        spec.seed = 42;
        spec.trials = 6;
        spec.power_sweep_dbm = {-10.0, 0.0, 10.0};
        spec.out_dir = (root / tag).string();
        if (run(spec) != 0) return false;
        ExperimentSpec design_spec;
        design_spec.experiment = "design";
        design_spec.methods = {DesignMethod::cfs, DesignMethod::p2};
        design_spec.tier = "reduced";
        design_spec.seed = 42;
        design_spec.out_dir = (root / (tag + "_design")).string();
        return run(design_spec) == 0;
    };
    if (!run_once("a") || !run_once("b")) {
        detail = "experiment run failed";
        return false;
    }
    bool identical = true;
    std::ostringstream os;
    for (const char* name :
         {"rmse_sweep_cfs.csv"}) {
        const std::string a = slurp(root / "a" / name);
        const std::string b = slurp(root / "b" / name);
        if (a.empty() || a != b) {
            identical = false;
            os << name << " differs; ";
        }
    }
    for (const char* name : {"phases_cfs.csv", "phases_p2.csv", "fim_aoi_p2.csv"}) {
        const std::string a = slurp(root / "a_design" / name);
        const std::string b = slurp(root / "b_design" / name);
        if (a.empty() || a != b) {
            identical = false;
            os << name << " differs; ";
        }
    }
    os << (identical ? "all CSV artifacts byte-identical" : "");
    detail = os.str();
    fs::remove_all(root);
    return identical;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

    struct Entry {
        int id;
        const char* name;
        std::function<bool(std::string&)> fn;
    };
    const std::vector<Entry> criteria = {
        {1, "lorentzian feasibility and block support", criterion_1},
        {2, "steering jacobian finite-difference oracle", criterion_2},
        {3, "fim brute-force mean-vector oracle", criterion_3},
        {4, "snr lifting identity", criterion_4},
        {5, "analytic sdp oracles with weak duality", criterion_5},
        {6, "design dominance p1 <= p2, p2 objective >= cfs", criterion_6},
        {7, "snr compliance or flagged rank-one gap", criterion_7},
        {8, "snr trade-off trends over gamma", criterion_8},
        {9, "rmse non-increasing and above the bound", criterion_9},
        {10, "cfs beam focusing on a near-field point", criterion_10},
        {11, "complexity report formula values", criterion_11},
        {12, "byte-identical artifacts for equal seeds", criterion_12},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.name
                  << " (" << secs << " s)\n";
        if (!detail.empty()) std::cout << "       " << detail << "\n";
        if (!ok) ++failures;
    }
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: ") << (failures == 0 ? "" : std::to_string(failures)) << "\n";
    return failures;
}
