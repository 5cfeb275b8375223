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

#include "dmabeam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace dmabeam {

namespace {
constexpr double kSpectrumFloor = 1e-18;
}

double GridSpec::r_at(int ir) const {
    return (n_r == 1) ? r_min : r_min + ir * (r_max - r_min) / (n_r - 1);
}

double GridSpec::phi_at(int ip) const {
    return (n_phi == 1) ? phi_min : phi_min + ip * (phi_max - phi_min) / (n_phi - 1);
}

double GridSpec::cell_floor(double r) const {
    const double dr = (n_r > 1) ? (r_max - r_min) / (n_r - 1) : 0.0;
    const double dphi = (n_phi > 1) ? (phi_max - phi_min) / (n_phi - 1) : 0.0;
    return 0.5 * std::sqrt(dr * dr + (r * dphi) * (r * dphi));
}

MusicContext build_music_context(const PanelConfig& panel, double radiation_exponent,
                                 const CMatrix& w_rx, const PropagationMatrix& p_rx,
                                 const GridSpec& spec) {
    MusicContext ctx;
    ctx.spec = spec;
    const int cells = spec.n_r * spec.n_phi;
    ctx.effective.resize(w_rx.cols(), cells);
    // Effective combined response per cell, unit-normalized.
#pragma omp parallel for schedule(static)
    for (int cell = 0; cell < cells; ++cell) {
        const int ir = cell / spec.n_phi;
        const int ip = cell % spec.n_phi;
        const SphericalPoint p{spec.r_at(ir), spec.theta, spec.phi_at(ip)};
        const CVector a = steering_vector(panel, p, radiation_exponent).value;
        CVector eff = w_rx.adjoint() * p_rx.apply_hermitian(a);
        const double norm = eff.norm();
        if (norm > 0.0) eff /= norm;
        ctx.effective.col(cell) = eff;
    }
    return ctx;
}

MusicGrid music_spectrum(const CMatrix& y, const MusicContext& ctx, int k_hat) {
    const int n_rf = static_cast<int>(y.rows());
    if (n_rf <= k_hat)
        throw StructureError("music_spectrum: noise subspace empty (N_RF <= K)");
    const GridSpec& spec = ctx.spec;

    const CMatrix r_cov = y * y.adjoint() / static_cast<double>(y.cols());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r_cov);
    // Eigenvalues ascend: the first N_RF - k_hat eigenvectors span the noise subspace.
    const CMatrix noise = es.eigenvectors().leftCols(n_rf - k_hat);

    MusicGrid grid;
    grid.theta = spec.theta;
    grid.r_axis.resize(spec.n_r);
    for (int ir = 0; ir < spec.n_r; ++ir) grid.r_axis(ir) = spec.r_at(ir);
    grid.phi_axis.resize(spec.n_phi);
    for (int ip = 0; ip < spec.n_phi; ++ip) grid.phi_axis(ip) = spec.phi_at(ip);
    grid.spectrum.resize(spec.n_r, spec.n_phi);

    const int cells = spec.n_r * spec.n_phi;
#pragma omp parallel for schedule(static)
    for (int cell = 0; cell < cells; ++cell) {
        const double denom = (noise.adjoint() * ctx.effective.col(cell)).squaredNorm();
        grid.spectrum(cell / spec.n_phi, cell % spec.n_phi) =
            1.0 / std::max(denom, kSpectrumFloor);
    }
    return grid;
}

PeakList pick_peaks(const MusicGrid& grid, int k_hat) {
    const int n_r = static_cast<int>(grid.spectrum.rows());
    const int n_phi = static_cast<int>(grid.spectrum.cols());

    struct Candidate {
        double value;
        int ir, ip;
    };
    std::vector<Candidate> maxima;
    for (int ir = 0; ir < n_r; ++ir) {
        for (int ip = 0; ip < n_phi; ++ip) {
            const double v = grid.spectrum(ir, ip);
            bool strict = true;
            for (int dr = -1; dr <= 1 && strict; ++dr)
                for (int dp = -1; dp <= 1 && strict; ++dp) {
                    if (dr == 0 && dp == 0) continue;
                    const int jr = ir + dr, jp = ip + dp;
                    if (jr < 0 || jr >= n_r || jp < 0 || jp >= n_phi) continue;
                    if (grid.spectrum(jr, jp) >= v) strict = false;
                }
            if (strict) maxima.push_back({v, ir, ip});
        }
    }
    std::sort(maxima.begin(), maxima.end(), [](const Candidate& a, const Candidate& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.ir != b.ir) return a.ir < b.ir;
        return a.ip < b.ip;
    });

    PeakList peaks;
    for (const auto& c : maxima) {
        if (static_cast<int>(peaks.points.size()) == k_hat) break;
        bool separated = true;
        for (const auto& [pr, pp] : peaks.cells)
            if (std::max(std::abs(pr - c.ir), std::abs(pp - c.ip)) < 2) separated = false;
        if (!separated) continue;
        peaks.cells.emplace_back(c.ir, c.ip);
        peaks.points.push_back({grid.r_axis(c.ir), grid.theta, grid.phi_axis(c.ip)});
    }
    while (static_cast<int>(peaks.points.size()) < k_hat) {
        peaks.padded = true;
        peaks.points.push_back(
            {std::numeric_limits<double>::quiet_NaN(), grid.theta,
             std::numeric_limits<double>::quiet_NaN()});
        peaks.cells.emplace_back(-1, -1);
    }
    return peaks;
}

PeakList localize_targets(const CMatrix& y, const MusicContext& ctx, const PanelConfig& panel,
                          double radiation_exponent, const CMatrix& w_rx,
                          const PropagationMatrix& p_rx, int k_hat) {
    const int n_rf = static_cast<int>(y.rows());
    if (n_rf <= k_hat) throw StructureError("localize_targets: noise subspace empty");
    const GridSpec& spec = ctx.spec;

    const CMatrix r_cov = y * y.adjoint() / static_cast<double>(y.cols());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r_cov);
    // Sequential subspace matching: the candidate response is orthogonalized
    // against the already-found responses and scored by how much of what is
    // left lies inside the signal span. At every remaining true target the
    // metric is exactly one in the noiseless limit; the span itself is never
    // deflated, so correlated responses do not mask each other.
    const CMatrix subspace = es.eigenvectors().rightCols(k_hat);

    const double dr0 = (spec.n_r > 1) ? (spec.r_max - spec.r_min) / (spec.n_r - 1) : 0.1;
    const double dp0 = (spec.n_phi > 1) ? (spec.phi_max - spec.phi_min) / (spec.n_phi - 1) : 0.01;
    constexpr double kResidualFloor = 2.5e-3;  // ||b||^2 below this is "already found"

    CMatrix found(n_rf, 0);
    auto score_response = [&](const CVector& eff_normalized) {
        CVector b = eff_normalized;
        if (found.cols() > 0) b -= found * (found.adjoint() * eff_normalized);
        const double nb2 = b.squaredNorm();
        if (nb2 < kResidualFloor) return -1.0;
        return (subspace.adjoint() * b).squaredNorm() / nb2;
    };
    auto in_box = [&](double r, double phi) {
        return r >= spec.r_min && r <= spec.r_max && phi >= spec.phi_min && phi <= spec.phi_max;
    };

    // Weighted-subspace-fitting objective over a candidate position set:
    // Tr{P_A E W E^H} with WSF weights (lambda - sigma^2)^2 / lambda.
    const RVector& eig = es.eigenvalues();
    const double sigma2 = eig.head(n_rf - k_hat).sum() / std::max(1, n_rf - k_hat);
    RVector wsf_weights(k_hat);
    for (int k = 0; k < k_hat; ++k) {
        const double lambda = eig(n_rf - k_hat + k);
        const double centered = std::max(lambda - sigma2, 0.0);
        wsf_weights(k) = lambda > 0.0 ? centered * centered / lambda : 0.0;
    }
    auto response_at = [&](double r, double phi) -> CVector {
        const CVector a = steering_vector(panel, {r, spec.theta, phi}, radiation_exponent).value;
        CVector eff = w_rx.adjoint() * p_rx.apply_hermitian(a);
        const double norm = eff.norm();
        if (norm > 0.0) eff /= norm;
        return eff;
    };
    auto coverage = [&](const std::vector<CVector>& responses, const RVector& weights) {
        CMatrix a_mat(n_rf, static_cast<Eigen::Index>(responses.size()));
        for (size_t k = 0; k < responses.size(); ++k) a_mat.col(k) = responses[k];
        Eigen::JacobiSVD<CMatrix> svd(a_mat, Eigen::ComputeThinU);
        int rank = 0;
        for (int k = 0; k < svd.singularValues().size(); ++k)
            if (svd.singularValues()(k) > 1e-9 * svd.singularValues()(0)) ++rank;
        const CMatrix q = svd.matrixU().leftCols(rank);
        double acc = 0.0;
        for (int k = 0; k < k_hat; ++k)
            acc += weights(k) * (q.adjoint() * subspace.col(k)).squaredNorm();
        return acc;
    };
    // Weighted fit for the final polish; unweighted coverage for discovery, so a
    // dominant source's residual misfit cannot outbid a weak true component.
    const RVector flat_weights = RVector::Ones(k_hat);
    auto wsf_objective = [&](const std::vector<CVector>& responses) {
        return coverage(responses, wsf_weights);
    };
    auto discovery_objective = [&](const std::vector<CVector>& responses) {
        return coverage(responses, flat_weights);
    };

    const int cells = spec.n_r * spec.n_phi;
    std::vector<double> scores(cells);
    auto top_seeds = [&](int count) {
        std::vector<std::pair<int, int>> seeds;  // (ir, ip)
        std::vector<char> taken(cells, 0);
        for (int s = 0; s < count; ++s) {
            double best = -1.0;
            int best_cell = -1;
            for (int cell = 0; cell < cells; ++cell) {
                if (taken[cell] || scores[cell] <= best) continue;
                best = scores[cell];
                best_cell = cell;
            }
            if (best_cell < 0) break;
            const int ir = best_cell / spec.n_phi, ip = best_cell % spec.n_phi;
            seeds.emplace_back(ir, ip);
            for (int jr = std::max(0, ir - 3); jr <= std::min(spec.n_r - 1, ir + 3); ++jr)
                for (int jp = std::max(0, ip - 3); jp <= std::min(spec.n_phi - 1, ip + 3); ++jp)
                    taken[jr * spec.n_phi + jp] = 1;
        }
        return seeds;
    };

    constexpr int kSeeds = 8;
    // Round-0 metric peaks near every true component; keep its seeds in every
    // later pool because residual plateaus can crowd the per-round maps.
    for (int cell = 0; cell < cells; ++cell)
        scores[cell] = score_response(ctx.effective.col(cell));
    const auto base_seeds = top_seeds(kSeeds);

    PeakList peaks;
    std::vector<CVector> responses;

    // Cyclic per-position refinement of a joint objective over the found set.
    auto joint_polish = [&](int sweeps, auto&& objective) {
        const int count = static_cast<int>(peaks.points.size());
        for (int sweep = 0; sweep < sweeps && count > 0; ++sweep) {
            for (int k = 0; k < count; ++k) {
                double dr = dr0, dp = dp0;
                double value = objective(responses);
                for (int it = 0; it < 24; ++it) {
                    bool improved = false;
                    const double r0 = peaks.points[k].r;
                    const double p0 = peaks.points[k].phi;
                    for (const auto& [cr, cp] : {std::pair{r0 + dr, p0}, std::pair{r0 - dr, p0},
                                                 std::pair{r0, p0 + dp}, std::pair{r0, p0 - dp}}) {
                        if (!in_box(cr, cp)) continue;
                        const CVector saved = responses[k];
                        const SphericalPoint saved_pt = peaks.points[k];
                        responses[k] = response_at(cr, cp);
                        peaks.points[k].r = cr;
                        peaks.points[k].phi = cp;
                        const double v = objective(responses);
                        if (v > value + 1e-15 * std::abs(value)) {
                            value = v;
                            improved = true;
                        } else {
                            responses[k] = saved;
                            peaks.points[k] = saved_pt;
                        }
                    }
                    if (!improved) {
                        dr *= 0.5;
                        dp *= 0.5;
                        if (dr < 1e-6 * dr0) break;
                    }
                }
            }
        }
    };

    for (int round = 0; round < k_hat; ++round) {
        std::vector<std::pair<int, int>> pool = base_seeds;
        if (round > 0) {
            // Re-polish what is already found so no patchable misfit remains,
            // then rescan the residual metric for fresh seeds.
            joint_polish(1, discovery_objective);
            found.resize(n_rf, 0);
            for (const auto& resp : responses) {
                CVector eff = resp;
                if (found.cols() > 0) eff -= found * (found.adjoint() * eff).eval();
                if (eff.norm() > 1e-6) {
                    eff.normalize();
                    found.conservativeResize(Eigen::NoChange, found.cols() + 1);
                    found.col(found.cols() - 1) = eff;
                }
            }
            for (int cell = 0; cell < cells; ++cell)
                scores[cell] = score_response(ctx.effective.col(cell));
            const auto fresh = top_seeds(kSeeds);
            pool.insert(pool.end(), fresh.begin(), fresh.end());
        }
        // Polish every candidate directly on the joint fit with the already
        // accepted positions; flat residual near-tangencies fool the cos^2
        // metric but not the weighted subspace objective.
        double best_wsf = -1.0;
        double r = 0.0, phi = 0.0;
        std::pair<int, int> best_cell{-1, -1};
        for (const auto& [ir, ip] : pool) {
            double cr = spec.r_at(ir);
            double cp = spec.phi_at(ip);
            responses.push_back(response_at(cr, cp));
            double cv = discovery_objective(responses);
            double dr = dr0, dp = dp0;
            for (int it = 0; it < 24; ++it) {
                bool improved = false;
                for (const auto& [nr, np] : {std::pair{cr + dr, cp}, std::pair{cr - dr, cp},
                                             std::pair{cr, cp + dp}, std::pair{cr, cp - dp}}) {
                    if (!in_box(nr, np)) continue;
                    responses.back() = response_at(nr, np);
                    const double v = discovery_objective(responses);
                    if (v > cv + 1e-15 * std::abs(cv)) {
                        cv = v;
                        cr = nr;
                        cp = np;
                        improved = true;
                    }
                }
                responses.back() = response_at(cr, cp);
                if (!improved) {
                    dr *= 0.5;
                    dp *= 0.5;
                    if (dr < 1e-5 * dr0) break;
                }
            }
            responses.pop_back();
            bool duplicate = false;
            for (const auto& p : peaks.points)
                if (std::abs(p.r - cr) < 2.0 * dr0 && std::abs(p.phi - cp) < 2.0 * dp0)
                    duplicate = true;
            if (duplicate) continue;
            if (cv > best_wsf) {
                best_wsf = cv;
                r = cr;
                phi = cp;
                best_cell = {ir, ip};
            }
        }
        if (best_cell.first < 0) break;
        peaks.points.push_back({r, spec.theta, phi});
        peaks.cells.push_back(best_cell);
        responses.push_back(response_at(r, phi));

        // Extend the found-response basis with the new direction.
        CVector eff = responses.back();
        if (found.cols() > 0) eff -= found * (found.adjoint() * eff).eval();
        if (eff.norm() > 1e-6) {
            eff.normalize();
            found.conservativeResize(Eigen::NoChange, found.cols() + 1);
            found.col(found.cols() - 1) = eff;
        }
    }

    // Final joint refinement under the efficiency-weighted fit.
    joint_polish(3, wsf_objective);

    while (static_cast<int>(peaks.points.size()) < k_hat) {
        peaks.padded = true;
        peaks.points.push_back({std::numeric_limits<double>::quiet_NaN(), spec.theta,
                                std::numeric_limits<double>::quiet_NaN()});
        peaks.cells.emplace_back(-1, -1);
    }
    return peaks;
}

std::vector<int> nearest_pair_assignment(const std::vector<Vec3>& estimates,
                                         const std::vector<Vec3>& truths) {
    const int n_est = static_cast<int>(estimates.size());
    const int n_tru = static_cast<int>(truths.size());
    std::vector<int> match(n_est, -1);
    std::vector<bool> est_used(n_est, false), tru_used(n_tru, false);
    const int pairs = std::min(n_est, n_tru);
    for (int round = 0; round < pairs; ++round) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (int i = 0; i < n_est; ++i) {
            if (est_used[i] || !estimates[i].allFinite()) continue;
            for (int j = 0; j < n_tru; ++j) {
                if (tru_used[j]) continue;
                const double d = (estimates[i] - truths[j]).norm();
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0) break;  // only NaN estimates remain
        match[bi] = bj;
        est_used[bi] = true;
        tru_used[bj] = true;
    }
    return match;
}

RmseTable monte_carlo_rmse(const ScenarioConfig& scenario, const LorentzianWeights& weights,
                           const std::vector<double>& power_sweep_dbm, int trials,
                           unsigned long long seed, const GridSpec& spec) {
    const CMatrix w = weights.assembled();
    const auto p_rx = build_propagation_matrix(scenario.panel);
    const MusicContext ctx =
        build_music_context(scenario.panel, scenario.radiation_exponent, w, p_rx, spec);
    const int k_total = scenario.num_targets();

    std::vector<Vec3> truths;
    double r_ref = 0.0;
    for (const auto& t : scenario.targets) {
        truths.push_back(spherical_to_cartesian(t));
        r_ref = std::max(r_ref, t.r);
    }

    RmseTable table;
    table.trials = trials;
    table.grid_floor_m = spec.cell_floor(r_ref);

    for (size_t pi = 0; pi < power_sweep_dbm.size(); ++pi) {
        ScenarioConfig sc = scenario;
        sc.p_max = dbm_to_watt(power_sweep_dbm[pi]);
        const auto channels = build_channels(sc);

        std::vector<double> sq_err(trials, 0.0);
        std::vector<int> err_count(trials, 0), missing(trials, 0);
        // Each trial owns a derived stream and its own output slots.
#pragma omp parallel for schedule(static)
        for (int trial = 0; trial < trials; ++trial) {
            const unsigned long long trial_seed =
                (seed * 1000003ull + static_cast<unsigned long long>(pi)) * 1000003ull +
                static_cast<unsigned long long>(trial);
            const CMatrix y = synthesize_rx_signal(sc, w, p_rx, channels, {}, trial_seed);
            const PeakList peaks = localize_targets(y, ctx, sc.panel, sc.radiation_exponent, w,
                                                    p_rx, k_total);
            std::vector<Vec3> est;
            for (const auto& p : peaks.points) {
                if (std::isnan(p.r)) {
                    est.push_back(Vec3::Constant(std::numeric_limits<double>::quiet_NaN()));
                    ++missing[trial];
                } else {
                    est.push_back(spherical_to_cartesian(p));
                }
            }
            const auto match = nearest_pair_assignment(est, truths);
            for (int i = 0; i < k_total; ++i) {
                if (match[i] < 0) continue;
                sq_err[trial] += (est[i] - truths[match[i]]).squaredNorm();
                ++err_count[trial];
            }
        }

        RmseRow row;
        row.power_dbm = power_sweep_dbm[pi];
        double total_sq = 0.0;
        long total_count = 0;
        for (int t = 0; t < trials; ++t) {
            total_sq += sq_err[t];
            total_count += err_count[t];
            row.missing_peaks += missing[t];
        }
        row.rmse_m = total_count > 0 ? std::sqrt(total_sq / total_count)
                                     : std::numeric_limits<double>::quiet_NaN();
        const auto q_rx =
            BlockDiagHermitian::from_combiner(w, sc.panel.n_rf, sc.panel.n_e);
        try {
            row.peb_m = peb_cartesian(fim(sc, target_params(sc), q_rx, p_rx));
        } catch (const SingularityError&) {
            row.peb_m = std::numeric_limits<double>::infinity();
        }
        table.rows.push_back(row);
    }
    return table;
}

std::vector<SnrSweepTable> snr_tradeoff_sweep(const ScenarioConfig& scenario,
                                              const std::vector<DesignMethod>& methods,
                                              const std::vector<double>& gamma_sweep_db,
                                              const DesignOptions& options) {
    const auto p_rx = build_propagation_matrix(scenario.panel);
    std::vector<SnrSweepTable> tables;
    for (DesignMethod method : methods) {
        SnrSweepTable table;
        table.method = method;
        for (double gamma_db : gamma_sweep_db) {
            ScenarioConfig sc = scenario;
            sc.snr_thresholds.assign(sc.num_ues, db_to_linear(gamma_db));
            const auto channels = build_channels(sc);
            const auto lifted = build_lifted_blocks(sc, channels, p_rx, !options.uncorrected_lifting);
            DesignResult res;
            switch (method) {
                case DesignMethod::p1: res = design_p1(sc, p_rx, lifted, options); break;
                case DesignMethod::p2: res = design_p2(sc, p_rx, lifted, options); break;
                default: res = design_cfs(sc, p_rx, lifted, options); break;
            }
            SnrSweepRow row;
            row.gamma_db = gamma_db;
            row.status = to_string(res.solver.status);
            if (res.feasible) {
                row.peb_audited = res.audit.peb_aoi;
                if (method == DesignMethod::p1) {
                    row.peb = std::sqrt(std::max(res.solver.relaxed_objective, 0.0));
                } else {
                    // Tr{I} recovered from the lifted trace objective.
                    const double fim_trace = 0.25 * 2.0 * sc.num_symbols / sc.noise_var *
                                             illumination_power(sc) *
                                             res.solver.relaxed_objective;
                    row.peb = fim_trace > 0.0 ? std::sqrt(1.0 / fim_trace)
                                              : std::numeric_limits<double>::infinity();
                }
            } else {
                row.peb = std::numeric_limits<double>::infinity();
                row.peb_audited = row.peb;
            }
            table.rows.push_back(row);
        }
        tables.push_back(std::move(table));
    }
    return tables;
}

MapResult beampattern_map(const ScenarioConfig& scenario, const LorentzianWeights& weights,
                          const GridSpec& spec) {
    const CMatrix w = weights.assembled();
    const auto p_rx = build_propagation_matrix(scenario.panel);
    MapResult map;
    map.theta = spec.theta;
    map.r_axis.resize(spec.n_r);
    for (int ir = 0; ir < spec.n_r; ++ir) map.r_axis(ir) = spec.r_at(ir);
    map.phi_axis.resize(spec.n_phi);
    for (int ip = 0; ip < spec.n_phi; ++ip) map.phi_axis(ip) = spec.phi_at(ip);
    map.values.resize(spec.n_r, spec.n_phi);

    const int cells = spec.n_r * spec.n_phi;
#pragma omp parallel for schedule(static)
    for (int cell = 0; cell < cells; ++cell) {
        const int ir = cell / spec.n_phi;
        const int ip = cell % spec.n_phi;
        const SphericalPoint p{spec.r_at(ir), spec.theta, spec.phi_at(ip)};
        CVector a = steering_vector(scenario.panel, p, scenario.radiation_exponent).value;
        // Unit-norm response: the raw vector would fold 1/r^2 path loss into the
        // map and pin the maximum to the closest cells regardless of the weights.
        const double norm = a.norm();
        if (norm > 0.0) a /= norm;
        map.values(ir, ip) = (w.adjoint() * p_rx.apply_hermitian(a)).squaredNorm();
    }
    const double peak = map.values.maxCoeff();
    if (peak > 0.0) map.values /= peak;
    return map;
}

MapResult peb_map(const ScenarioConfig& scenario, const LorentzianWeights& weights,
                  const GridSpec& spec) {
    const CMatrix w = weights.assembled();
    const auto p_rx = build_propagation_matrix(scenario.panel);
    const auto q_rx = BlockDiagHermitian::from_combiner(w, scenario.panel.n_rf,
                                                        scenario.panel.n_e);
    MapResult map;
    map.theta = spec.theta;
    map.r_axis.resize(spec.n_r);
    for (int ir = 0; ir < spec.n_r; ++ir) map.r_axis(ir) = spec.r_at(ir);
    map.phi_axis.resize(spec.n_phi);
    for (int ip = 0; ip < spec.n_phi; ++ip) map.phi_axis(ip) = spec.phi_at(ip);
    map.values.resize(spec.n_r, spec.n_phi);

    const double scale =
        2.0 * scenario.num_symbols / scenario.noise_var * illumination_power(scenario);
    const int n_rf = scenario.panel.n_rf;
    const int n_e = scenario.panel.n_e;
    const int cells = spec.n_r * spec.n_phi;
#pragma omp parallel for schedule(static)
    for (int cell = 0; cell < cells; ++cell) {
        const int ir = cell / spec.n_phi;
        const int ip = cell % spec.n_phi;
        const SphericalPoint p{spec.r_at(ir), spec.theta, spec.phi_at(ip)};
        const auto jac = steering_jacobian(scenario.panel, p, scenario.radiation_exponent);
        const CVector g[3] = {p_rx.apply_hermitian(jac.d_r),
                              p_rx.apply_hermitian(jac.d_theta),
                              p_rx.apply_hermitian(jac.d_phi)};
        FimBundle bundle;
        bundle.params.points = {p};
        bundle.params.mode = ParamMode::aoi;
        bundle.matrix.resize(3, 3);
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
                Complex quad = 0.0;
                for (int i = 0; i < n_rf; ++i)
                    quad += g[a].segment(i * n_e, n_e)
                                .dot(q_rx.blocks[i] * g[b].segment(i * n_e, n_e));
                bundle.matrix(a, b) = scale * quad.real();
                bundle.matrix(b, a) = bundle.matrix(a, b);
            }
        try {
            map.values(ir, ip) = peb(bundle);
        } catch (const SingularityError&) {
            map.values(ir, ip) = std::numeric_limits<double>::infinity();
        }
    }
    return map;
}

}  // namespace dmabeam
