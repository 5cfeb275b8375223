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

#ifndef DMABEAM_FISHER_HPP
#define DMABEAM_FISHER_HPP

#include <optional>
#include <vector>

#include "dmabeam/channel.hpp"
#include "dmabeam/scenario.hpp"
#include "dmabeam/types.hpp"

namespace dmabeam {

enum class ParamMode {
    targets,  // parameters of the K physical targets
    aoi,      // parameters of the AoI discretization points (virtual unit targets)
};

/// Ordered position-parameter vector: (r_1, theta_1, phi_1, r_2, ...).
struct ParamVector {
    std::vector<SphericalPoint> points;
    ParamMode mode = ParamMode::targets;

    int dim() const { return 3 * static_cast<int>(points.size()); }
    int point_of(int param) const { return param / 3; }
    int coord_of(int param) const { return param % 3; }  // 0=r, 1=theta, 2=phi
};

/// Block-diagonal Hermitian N x N matrix with N_E x N_E blocks, one per microstrip.
struct BlockDiagHermitian {
    std::vector<CMatrix> blocks;

    int block_size() const { return blocks.empty() ? 0 : static_cast<int>(blocks[0].rows()); }
    int dim() const { return block_size() * static_cast<int>(blocks.size()); }
    /// Per-strip rank-one blocks w_i w_i^H from an assembled N x N_RF combiner.
    static BlockDiagHermitian from_combiner(const CMatrix& w_rx, int n_rf, int n_e);
    /// Identity blocks.
    static BlockDiagHermitian identity(int n_rf, int n_e);
    /// Hermiticity/PSD/shape check; throws StructureError.
    void validate(double psd_tol = 1e-8) const;
};

struct FimBundle {
    RMatrix matrix;  // 3M x 3M, real symmetric PSD
    ParamVector params;
    int num_symbols = 0;
    double noise_var = 0.0;
    std::vector<double> ue_powers;
};

struct PebDiagnostics {
    double min_eigenvalue = 0.0;
    double condition = 0.0;
    double regularization = 0.0;  // epsilon added to the diagonal (0 if none)
};

/// Per-UE, per-parameter channel derivatives d h_u / d xi_p, rotated convention:
/// result[u][p] is a length-N complex vector.
/// targets mode: parameter of target k != u contributes beta_k * steering jacobian at k;
/// parameters of UE u itself differentiate the LoS term.
/// aoi mode: every AoI point acts as a virtual unit-reflectivity target present in every
/// UE's scattered channel, so the derivative is the bare steering jacobian column
/// (identical across UEs).
std::vector<std::vector<CVector>> channel_derivatives(const ScenarioConfig& scenario,
                                                      const ParamVector& params);

/// Fisher information over the given parameters for combiner covariance Q_rx:
/// [I]_{ij} = (2T/sigma^2) sum_u P_u Re{ (P^H d_i)^H Q_rx (P^H d_j) }.
/// With zero UEs in aoi mode, a single virtual illuminator at p_max is assumed.
/// Runs the entry loop in parallel; see reference::fim_naive for the serial oracle.
FimBundle fim(const ScenarioConfig& scenario, const ParamVector& params,
              const BlockDiagHermitian& q_rx, const PropagationMatrix& p_rx);

/// sqrt(Tr{I^-1}). Ill-conditioned bundles (cond > 1e12) get a diagonal bump
/// eps = 1e-12 Tr/dim recorded in diagnostics; hopeless ones throw SingularityError.
double peb(const FimBundle& fim, PebDiagnostics* diag = nullptr);

/// Meters-only position bound: spherical errors mapped through the Jacobian of
/// spherical_to_cartesian, sqrt(sum of Cartesian error variances).
double peb_cartesian(const FimBundle& fim, PebDiagnostics* diag = nullptr);

/// Area bound aggregated point by point: sqrt(sum_a Tr{I_a^-1}) over the
/// single-virtual-target 3x3 FIMs (the diagonal blocks of the joint AoI FIM).
/// Finite whenever each point is individually observable, unlike the joint
/// bound, whose rank is capped at 2 N_RF and which degenerates when
/// 3 |A| exceeds that. Set `cartesian` for the meters-only variant.
double area_peb_pointwise(const ScenarioConfig& scenario,
                          const std::vector<SphericalPoint>& points,
                          const BlockDiagHermitian& q_rx, const PropagationMatrix& p_rx,
                          bool cartesian = false);

/// Borders a Hermitian block A for the lifted weight variable Q = [q;1][q^H,1]:
/// returns [[A, j A 1],[ -j 1^T A, c]] with c = 1^T A 1 (include_constant) or 0,
/// so that Tr{lift(A) Q(q)} = (q + j1)^H A (q + j1) in constant-corrected mode.
CMatrix lift_quadratic(const CMatrix& a, bool include_constant);

/// Coefficients of one FIM entry as an affine function of the lifted per-strip
/// variables: entry = sum_i Tr{coeff[i] Q_i} + affine.
struct FimEntryCoeff {
    std::vector<CMatrix> coeff;  // N_RF matrices, (N_E+1) x (N_E+1) Hermitian
    double affine = 0.0;
};

struct LiftedBlocks {
    // h_blocks[u][i]: SNR lifting of the i-th diagonal block of P^H h_u h_u^H P.
    std::vector<std::vector<CMatrix>> h_blocks;
    // b_blocks[i]: lifting of the i-th diagonal block of the AoI sensing matrix B.
    std::vector<CMatrix> b_blocks;
    // fim_coeffs[j*dim + k] for j <= k: FIM entry (j,k) over the AoI parameters.
    std::vector<FimEntryCoeff> fim_coeffs;
    int fim_dim = 0;
    bool constant_corrected = true;

    const FimEntryCoeff& fim_entry(int j, int k) const;  // j <= k
};

std::vector<std::vector<CMatrix>> build_h_blocks(const ScenarioConfig& scenario,
                                                 const ChannelSet& channels,
                                                 const PropagationMatrix& p_rx,
                                                 bool constant_corrected = true);

std::vector<CMatrix> build_b_blocks(const ScenarioConfig& scenario, const ParamVector& aoi_params,
                                    const PropagationMatrix& p_rx,
                                    bool constant_corrected = true);

/// Everything the optimizers need, assembled once per scenario.
LiftedBlocks build_lifted_blocks(const ScenarioConfig& scenario, const ChannelSet& channels,
                                 const PropagationMatrix& p_rx, bool constant_corrected = true);

/// AoI parameter vector for a scenario.
ParamVector aoi_params(const ScenarioConfig& scenario);
/// Target parameter vector for a scenario.
ParamVector target_params(const ScenarioConfig& scenario);

/// Illumination power sum: sum of UE powers, or p_max when the scenario has no UEs
/// (virtual unit probe convention for sensing-only designs).
double illumination_power(const ScenarioConfig& scenario);

}  // namespace dmabeam

#endif  // DMABEAM_FISHER_HPP
