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

#include "dmabeam/design.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace dmabeam {

const char* to_string(DesignMethod m) {
    switch (m) {
        case DesignMethod::p1: return "p1";
        case DesignMethod::p2: return "p2";
        default: return "cfs";
    }
}

CMatrix LorentzianWeights::assembled() const {
    CMatrix w = CMatrix::Zero(static_cast<Eigen::Index>(n_rf()) * n_e(), n_rf());
    for (int i = 0; i < n_rf(); ++i)
        for (int n = 0; n < n_e(); ++n) w(i * n_e() + n, i) = weight(i, n);
    return w;
}

RVector lorentzian_project(const CVector& q, bool strict) {
    RVector phases(q.size());
    for (int n = 0; n < q.size(); ++n) {
        double phi = std::arg(q(n));
        if (q(n) == Complex{0.0, 0.0}) phi = 0.0;
        if (strict) {
            // Nearest codebook endpoint for phases outside [-pi/2, pi/2].
            if (phi > kPi / 2.0) phi = (phi <= kPi) ? kPi / 2.0 : -kPi / 2.0;
            if (phi < -kPi / 2.0) phi = (phi >= -kPi) ? -kPi / 2.0 : kPi / 2.0;
            phi = std::clamp(phi, -kPi / 2.0, kPi / 2.0);
        }
        phases(n) = phi;
    }
    return phases;
}

AuditReport audit(const ScenarioConfig& scenario, const PropagationMatrix& p_rx,
                  const LorentzianWeights& weights) {
    AuditReport report;
    const CMatrix w = weights.assembled();
    const auto channels = build_channels(scenario);
    for (int u = 0; u < scenario.num_ues; ++u) {
        const double snr = received_snr(w, p_rx, channels.h_total[u], scenario.p_max,
                                        scenario.noise_var);
        const double snr_db = snr > 0.0 ? linear_to_db(snr)
                                        : -std::numeric_limits<double>::infinity();
        report.achieved_snr_db.push_back(snr_db);
        const double target_db = linear_to_db(scenario.snr_thresholds[u]);
        const double shortfall = std::max(0.0, target_db - snr_db);
        report.shortfall_db.push_back(shortfall);
        if (shortfall > 0.5) {
            std::ostringstream msg;
            msg << "snr shortfall " << shortfall << " dB for UE " << u;
            report.flags.push_back(msg.str());
        }
    }
    const auto q_rx =
        BlockDiagHermitian::from_combiner(w, scenario.panel.n_rf, scenario.panel.n_e);
    try {
        report.peb_aoi = area_peb_pointwise(scenario, scenario.aoi, q_rx, p_rx, false);
        report.peb_aoi_m = area_peb_pointwise(scenario, scenario.aoi, q_rx, p_rx, true);
    } catch (const SingularityError& e) {
        report.peb_aoi = std::numeric_limits<double>::infinity();
        report.peb_aoi_m = report.peb_aoi;
        report.flags.push_back(std::string("aoi point fim singular: ") + e.what());
    }
    try {
        PebDiagnostics diag;
        report.peb_aoi_joint = peb(fim(scenario, aoi_params(scenario), q_rx, p_rx), &diag);
        if (diag.regularization > 0.0)
            report.flags.push_back("joint aoi fim regularized (rank <= 2 N_RF)");
    } catch (const SingularityError& e) {
        report.fim_singular = true;
        report.peb_aoi_joint = std::numeric_limits<double>::infinity();
        report.flags.push_back(std::string("joint aoi fim singular: ") + e.what());
    }
    return report;
}

namespace {

struct RecoveredStrip {
    CVector q;
    double rank_ratio = 0.0;
};

// Rank-one recovery from a relaxed lifted block: phases of the principal
// eigenvector, anchored on the (real nonnegative) last entry.
RecoveredStrip recover_strip(const CMatrix& q_lifted) {
    RecoveredStrip out;
    const int n = static_cast<int>(q_lifted.rows()) - 1;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(q_lifted);
    const RVector& ev = es.eigenvalues();
    const double top = ev(n);
    const double second = n >= 1 ? std::abs(ev(n - 1)) : 0.0;
    out.rank_ratio = top > 0.0 ? second / top : 1.0;
    auto [lambda, u] = principal_eigvec(q_lifted);
    (void)lambda;
    out.q.resize(n);
    for (int k = 0; k < n; ++k)
        out.q(k) = std::abs(u(k)) > 0.0 ? u(k) / std::abs(u(k)) : Complex{1.0, 0.0};
    return out;
}

LorentzianWeights project_strips(const std::vector<CVector>& qs, bool strict) {
    const int n_rf = static_cast<int>(qs.size());
    const int n_e = static_cast<int>(qs[0].size());
    LorentzianWeights w;
    w.phases.resize(n_rf, n_e);
    for (int i = 0; i < n_rf; ++i) w.phases.row(i) = lorentzian_project(qs[i], strict).transpose();
    return w;
}

// SNR right-hand side per UE: 4 sigma^2 gamma_u / P_u under the quarter lifting
// factor, or the bare gamma in uncorrected mode.
std::vector<double> snr_rhs(const ScenarioConfig& scenario, bool uncorrected_lifting) {
    std::vector<double> rhs(scenario.num_ues);
    for (int u = 0; u < scenario.num_ues; ++u)
        rhs[u] = uncorrected_lifting
                     ? scenario.snr_thresholds[u]
                     : 4.0 * scenario.noise_var * scenario.snr_thresholds[u] / scenario.p_max;
    return rhs;
}

// Shared constraint scaffolding: per-strip embedded PSD blocks with unit diagonal
// (pair sums of the real embedding) and the SNR trace inequalities.
void append_strip_constraints(SdpProblem& prob, const ScenarioConfig& scenario,
                              const LiftedBlocks& lifted, bool uncorrected_lifting) {
    const int n_rf = scenario.panel.n_rf;
    const int dim = scenario.panel.n_e + 1;
    for (int i = 0; i < n_rf; ++i) {
        for (int n = 0; n < dim; ++n) {
            SdpConstraint con;
            con.terms.push_back(SdpTerm::from_entries(i, {{n, n, 1.0}, {n + dim, n + dim, 1.0}}));
            con.rhs = 2.0;
            prob.constraints.push_back(con);
        }
    }
    const auto rhs = snr_rhs(scenario, uncorrected_lifting);
    for (int u = 0; u < scenario.num_ues; ++u) {
        SdpConstraint con;
        for (int i = 0; i < n_rf; ++i)
            con.terms.push_back(
                SdpTerm::from_dense(i, 0.5 * hermitian_embed(lifted.h_blocks[u][i])));
        con.rhs = rhs[u];
        con.sense = SdpSense::ge;
        prob.constraints.push_back(con);
    }
}

// Names the SNR constraints whose trace falls short at the final iterate.
std::string binding_snr_report(const ScenarioConfig& scenario, const LiftedBlocks& lifted,
                               const std::vector<RMatrix>& x, bool uncorrected_lifting) {
    const auto rhs = snr_rhs(scenario, uncorrected_lifting);
    std::ostringstream msg;
    msg << "infeasible; unsatisfied SNR constraints:";
    bool any = false;
    for (int u = 0; u < scenario.num_ues; ++u) {
        double lhs = 0.0;
        for (int i = 0; i < scenario.panel.n_rf; ++i)
            lhs += 0.5 * (hermitian_embed(lifted.h_blocks[u][i]).cwiseProduct(x[i])).sum();
        if (lhs < rhs[u] * (1.0 - 1e-6)) {
            msg << " UE" << u << " (needs " << rhs[u] << ", reached " << lhs << ")";
            any = true;
        }
    }
    if (!any) msg << " none at the last iterate (solver certificate)";
    return msg.str();
}

// Joint rounding candidate: per-strip unit-modulus vectors.
using StripSet = std::vector<CVector>;

std::vector<double> snr_traces(const LiftedBlocks& lifted, const StripSet& qs) {
    std::vector<double> traces(lifted.h_blocks.size(), 0.0);
    for (size_t u = 0; u < lifted.h_blocks.size(); ++u)
        for (size_t i = 0; i < qs.size(); ++i) {
            CVector qe(qs[i].size() + 1);
            qe << qs[i], Complex{1.0, 0.0};
            traces[u] += (qe.adjoint() * lifted.h_blocks[u][i] * qe)(0, 0).real();
        }
    return traces;
}

// Pointwise area CRB from the coefficient tensor: sum over the AoI points of
// Tr of the inverse 3x3 diagonal block (matches the audit metric).
double crb_of(const LiftedBlocks& lifted, const StripSet& qs) {
    std::vector<CVector> qe(qs.size());
    for (size_t i = 0; i < qs.size(); ++i) {
        qe[i].resize(qs[i].size() + 1);
        qe[i] << qs[i], Complex{1.0, 0.0};
    }
    auto entry_value = [&](int j, int k) {
        const auto& entry = lifted.fim_entry(j, k);
        double v = entry.affine;
        for (size_t i = 0; i < qs.size(); ++i)
            v += (qe[i].adjoint() * entry.coeff[i] * qe[i])(0, 0).real();
        return v;
    };
    double total = 0.0;
    for (int a = 0; a < lifted.fim_dim / 3; ++a) {
        Eigen::Matrix3d block;
        for (int j = 0; j < 3; ++j)
            for (int k = j; k < 3; ++k) {
                block(j, k) = entry_value(3 * a + j, 3 * a + k);
                block(k, j) = block(j, k);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(block, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() <= 0.0)
            return std::numeric_limits<double>::infinity();
        total += es.eigenvalues().cwiseInverse().sum();
    }
    return total;
}

double p2_objective_of(const LiftedBlocks& lifted, const StripSet& qs) {
    double total = 0.0;
    for (size_t i = 0; i < qs.size(); ++i) {
        CVector qe(qs[i].size() + 1);
        qe << qs[i], Complex{1.0, 0.0};
        total += (qe.adjoint() * lifted.b_blocks[i] * qe)(0, 0).real();
    }
    return total;
}

// Gaussian randomization over the relaxed covariances: the usual recovery when
// the SDR optimum is not rank one. The eigenvector rounding stays in the pool;
// candidates that hold every SNR constraint (0.5 dB grace) win on the method
// objective, otherwise the closest-to-feasible candidate is kept.
StripSet randomized_rounding(const ScenarioConfig& scenario, const LiftedBlocks& lifted,
                             const std::vector<CMatrix>& relaxed, const StripSet& eig_candidate,
                             DesignMethod method, bool uncorrected_lifting) {
    const auto rhs = snr_rhs(scenario, uncorrected_lifting);
    constexpr int kSamples = 64;
    const double grace = std::pow(10.0, -0.05);  // -0.5 dB

    std::vector<CMatrix> chol(relaxed.size());
    for (size_t i = 0; i < relaxed.size(); ++i) {
        CMatrix m = relaxed[i];
        const double ridge0 = 1e-10 * std::max(1.0, m.real().trace() / m.rows());
        for (double ridge = ridge0;; ridge *= 100.0) {
            Eigen::LLT<CMatrix> llt(m + ridge * CMatrix::Identity(m.rows(), m.cols()));
            if (llt.info() == Eigen::Success) {
                chol[i] = llt.matrixL();
                break;
            }
            if (ridge > 1e6 * ridge0) {
                chol[i] = CMatrix::Identity(m.rows(), m.cols());
                break;
            }
        }
    }

    auto evaluate = [&](const StripSet& qs) {
        const auto traces = snr_traces(lifted, qs);
        double margin = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (size_t u = 0; u < rhs.size(); ++u) {
            margin = std::min(margin, traces[u] - rhs[u]);
            ok = ok && traces[u] >= rhs[u] * grace;
        }
        const double objective =
            method == DesignMethod::p1 ? crb_of(lifted, qs) : -p2_objective_of(lifted, qs);
        return std::tuple<bool, double, double>(ok, objective, margin);
    };

    StripSet best = eig_candidate;
    auto [best_ok, best_obj, best_margin] = evaluate(eig_candidate);

    GaussianStream stream(0x5eed0f0full);
    const int n_e = static_cast<int>(eig_candidate[0].size());
    for (int s = 0; s < kSamples; ++s) {
        StripSet cand(relaxed.size());
        for (size_t i = 0; i < relaxed.size(); ++i) {
            CVector xi(n_e + 1);
            for (int k = 0; k <= n_e; ++k) xi(k) = stream.next_complex(1.0);
            const CVector z = chol[i] * xi;
            const Complex anchor =
                std::abs(z(n_e)) > 0.0 ? std::conj(z(n_e)) / std::abs(z(n_e)) : Complex{1.0, 0.0};
            cand[i].resize(n_e);
            for (int k = 0; k < n_e; ++k) {
                const Complex rotated = z(k) * anchor;
                cand[i](k) =
                    std::abs(rotated) > 0.0 ? rotated / std::abs(rotated) : Complex{1.0, 0.0};
            }
        }
        const auto [ok, obj, margin] = evaluate(cand);
        const bool better = (ok && !best_ok) || (ok == best_ok && ok && obj < best_obj) ||
                            (!ok && !best_ok && margin > best_margin);
        if (better) {
            best = cand;
            best_ok = ok;
            best_obj = obj;
            best_margin = margin;
        }
    }
    return best;
}

DesignResult finalize_sdr_design(const ScenarioConfig& scenario, const PropagationMatrix& p_rx,
                                 const LiftedBlocks& lifted, const DesignOptions& options,
                                 DesignMethod method, const SdpSolution& sol,
                                 double relaxed_objective,
                                 std::chrono::steady_clock::time_point t0) {
    DesignResult result;
    result.method = method;
    result.solver.status = sol.status;
    result.solver.iterations = sol.iterations;
    result.solver.primal_residual = sol.primal_residual;
    result.solver.dual_residual = sol.dual_residual;
    result.solver.duality_gap = sol.duality_gap;
    result.solver.relaxed_objective = relaxed_objective;

    if (sol.status == SdpStatus::infeasible) {
        result.feasible = false;
        result.solver.message =
            binding_snr_report(scenario, lifted, sol.block_values, options.uncorrected_lifting);
    } else if (sol.status != SdpStatus::optimal) {
        result.feasible = false;
        result.solver.message = std::string("solver stopped: ") + to_string(sol.status);
    }

    const int n_rf = scenario.panel.n_rf;
    std::vector<CVector> qs;
    if (result.feasible) {
        for (int i = 0; i < n_rf; ++i) {
            const CMatrix q_lifted = hermitian_unembed(sol.block_values[i]);
            result.solver.relaxed_q.push_back(q_lifted);
            RecoveredStrip strip = recover_strip(q_lifted);
            result.solver.rank_one_ratios.push_back(strip.rank_ratio);
            // How well the rank-one lift reproduces the relaxed SNR terms.
            CVector qe(q_lifted.rows());
            qe << strip.q, Complex{1.0, 0.0};
            const CMatrix rank_one = qe * qe.adjoint();
            double err = 0.0;
            for (int u = 0; u < scenario.num_ues; ++u) {
                const double relaxed = (lifted.h_blocks[u][i] * q_lifted).trace().real();
                const double projected = (lifted.h_blocks[u][i] * rank_one).trace().real();
                if (std::abs(relaxed) > 1e-300)
                    err = std::max(err, std::abs(projected - relaxed) / std::abs(relaxed));
            }
            result.solver.lift_reproduction_error.push_back(err);
            qs.push_back(strip.q);
        }
        const double worst_ratio = *std::max_element(result.solver.rank_one_ratios.begin(),
                                                     result.solver.rank_one_ratios.end());
        if (worst_ratio >= 1e-6)
            qs = randomized_rounding(scenario, lifted, result.solver.relaxed_q, qs, method,
                                     options.uncorrected_lifting);
        result.weights = project_strips(qs, options.strict_codebook);
        result.audit = audit(scenario, p_rx, result.weights);
        for (double ratio : result.solver.rank_one_ratios)
            if (ratio >= 1e-6) {
                result.audit.flags.push_back("rank-one gap: sigma2/sigma1 = " +
                                             std::to_string(ratio));
                break;
            }
    }
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace

DesignResult design_p2(const ScenarioConfig& scenario, const PropagationMatrix& p_rx,
                       const LiftedBlocks& lifted, const DesignOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n_rf = scenario.panel.n_rf;
    const int dim = scenario.panel.n_e + 1;

    SdpProblem prob;
    prob.block_sizes.assign(n_rf, 2 * dim);
    for (int i = 0; i < n_rf; ++i)
        prob.objective.push_back(SdpTerm::from_dense(i, -0.5 * hermitian_embed(lifted.b_blocks[i])));
    append_strip_constraints(prob, scenario, lifted, options.uncorrected_lifting);

    const SdpSolution sol = solve(prob, options.sdp);
    double relaxed = 0.0;
    if (sol.status == SdpStatus::optimal)
        for (int i = 0; i < n_rf; ++i)
            relaxed +=
                (lifted.b_blocks[i] * hermitian_unembed(sol.block_values[i])).trace().real();
    return finalize_sdr_design(scenario, p_rx, lifted, options, DesignMethod::p2, sol, relaxed,
                               t0);
}

DesignResult design_p1(const ScenarioConfig& scenario, const PropagationMatrix& p_rx,
                       const LiftedBlocks& lifted, const DesignOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n_rf = scenario.panel.n_rf;
    const int dim = scenario.panel.n_e + 1;
    const int fim_dim = lifted.fim_dim;

    // FIM magnitude at Q_i = I for the congruence scaling that keeps every block O(1).
    double mean_diag = 0.0;
    for (int j = 0; j < fim_dim; ++j) {
        const auto& entry = lifted.fim_entry(j, j);
        double v = entry.affine;
        for (const auto& coeff : entry.coeff) v += coeff.real().trace();
        mean_diag += v;
    }
    mean_diag = std::abs(mean_diag) / fim_dim;
    const double fim_scale = mean_diag > 1e-300 ? 1.0 / mean_diag : 1.0;

    SdpProblem prob;
    prob.block_sizes.assign(n_rf, 2 * dim);

    // FIM ties against the scaled Schur corner, shared by both encodings. The
    // corner lives in the block right after the strips.
    auto append_fim_ties = [&](int block) {
        for (int j = 0; j < fim_dim; ++j) {
            for (int k = j; k < fim_dim; ++k) {
                const auto& entry = lifted.fim_entry(j, k);
                SdpConstraint con;
                con.terms.push_back(
                    SdpTerm::from_entries(block, {{j, k, (j == k) ? 1.0 : 0.5}}));
                for (int i = 0; i < n_rf; ++i)
                    con.terms.push_back(SdpTerm::from_dense(
                        i, -0.5 * fim_scale * hermitian_embed(entry.coeff[i])));
                con.rhs = fim_scale * entry.affine;
                prob.constraints.push_back(con);
            }
        }
    };

    if (options.bordered_schur) {
        // One bordered block [[I', e_a],[e_a^T, b'_a]] per AoI parameter.
        for (int a = 0; a < fim_dim; ++a) prob.block_sizes.push_back(fim_dim + 1);
        for (int a = 0; a < fim_dim; ++a)
            prob.objective.push_back(
                SdpTerm::from_entries(n_rf + a, {{fim_dim, fim_dim, 1.0}}));
        append_strip_constraints(prob, scenario, lifted, options.uncorrected_lifting);
        append_fim_ties(n_rf);
        for (int a = 1; a < fim_dim; ++a) {
            for (int j = 0; j < fim_dim; ++j) {
                for (int k = j; k < fim_dim; ++k) {
                    const double wgt = (j == k) ? 1.0 : 0.5;
                    SdpConstraint con;
                    con.terms.push_back(SdpTerm::from_entries(n_rf + a, {{j, k, wgt}}));
                    con.terms.push_back(SdpTerm::from_entries(n_rf, {{j, k, -wgt}}));
                    con.rhs = 0.0;
                    prob.constraints.push_back(con);
                }
            }
        }
        for (int a = 0; a < fim_dim; ++a) {
            for (int j = 0; j < fim_dim; ++j) {
                SdpConstraint con;
                con.terms.push_back(SdpTerm::from_entries(n_rf + a, {{j, fim_dim, 0.5}}));
                con.rhs = (j == a) ? 1.0 : 0.0;
                prob.constraints.push_back(con);
            }
        }
    } else {
        // Single block [[I', Id],[Id, B']] with B' free: at the optimum
        // B' = I'^-1 and Tr{B'} is the scaled CRB.
        prob.block_sizes.push_back(2 * fim_dim);
        for (int a = 0; a < fim_dim; ++a)
            prob.objective.push_back(SdpTerm::from_entries(
                n_rf, {{fim_dim + a, fim_dim + a, 1.0}}));
        append_strip_constraints(prob, scenario, lifted, options.uncorrected_lifting);
        append_fim_ties(n_rf);
        for (int j = 0; j < fim_dim; ++j) {
            for (int k = 0; k < fim_dim; ++k) {
                SdpConstraint con;
                con.terms.push_back(SdpTerm::from_entries(n_rf, {{j, fim_dim + k, 0.5}}));
                con.rhs = (j == k) ? 1.0 : 0.0;
                prob.constraints.push_back(con);
            }
        }
    }

    const SdpSolution sol = solve(prob, options.sdp);
    // 1^T b in true units undoes the corner scaling: b_a = fim_scale * b'_a.
    const double relaxed_crb = sol.objective_value * fim_scale;
    return finalize_sdr_design(scenario, p_rx, lifted, options, DesignMethod::p1, sol,
                               relaxed_crb, t0);
}

DesignResult design_cfs(const ScenarioConfig& scenario, const PropagationMatrix& p_rx,
                        const LiftedBlocks& lifted, const DesignOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    DesignResult result;
    result.method = DesignMethod::cfs;
    std::vector<CVector> qs;
    double objective = 0.0;
    for (int i = 0; i < scenario.panel.n_rf; ++i) {
        auto [lambda, u] = principal_eigvec(lifted.b_blocks[i]);
        (void)lambda;
        const int n_e = scenario.panel.n_e;
        CVector q(n_e);
        for (int n = 0; n < n_e; ++n)
            q(n) = std::abs(u(n)) > 0.0 ? u(n) / std::abs(u(n)) : Complex{1.0, 0.0};
        qs.push_back(q);
        CVector qe(n_e + 1);
        qe << q, Complex{1.0, 0.0};
        objective += (lifted.b_blocks[i] * (qe * qe.adjoint())).trace().real();
    }
    result.solver.relaxed_objective = objective;  // value attained at the projected weights
    result.solver.message = "closed form (no solver)";
    result.weights = project_strips(qs, options.strict_codebook);
    result.audit = audit(scenario, p_rx, result.weights);
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

ComplexityReport complexity_report(const ScenarioConfig& scenario) {
    ComplexityReport rep;
    const long long a3 = 3LL * static_cast<long long>(scenario.aoi.size());
    const long long n_rf = scenario.panel.n_rf;
    const long long m_strip = scenario.panel.n_e + 1;
    rep.n_p1 = a3 + n_rf * m_strip * m_strip;
    rep.c_p1 = a3 + n_rf;
    rep.n_p2 = n_rf * m_strip * m_strip;
    rep.c_p2 = n_rf;
    rep.cfs_svd_count = n_rf * m_strip * m_strip * m_strip;

    auto flops = [](long long n, const std::vector<std::pair<long long, long long>>& lmi) {
        double sum_m2 = 0.0, sum_m3 = 0.0;
        for (auto [count, m] : lmi) {
            sum_m2 += static_cast<double>(count) * m * m;
            sum_m3 += static_cast<double>(count) * m * m * m;
        }
        return static_cast<double>(n) * n * sum_m2 + static_cast<double>(n) * sum_m3;
    };
    rep.p1_flop_proxy = flops(rep.n_p1, {{n_rf, m_strip}, {a3, a3 + 1}});
    rep.p2_flop_proxy = flops(rep.n_p2, {{n_rf, m_strip}});
    return rep;
}

}  // namespace dmabeam
