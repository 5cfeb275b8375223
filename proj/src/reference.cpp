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

#include "dmabeam/reference.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace dmabeam::reference {

RMatrix fim_naive(const ScenarioConfig& scenario, const ParamVector& params,
                  const BlockDiagHermitian& q_rx, const PropagationMatrix& p_rx) {
    const int n = scenario.panel.total_elements();
    const int n_e = scenario.panel.n_e;
    // Dense N x N versions of P and Q.
    CMatrix q_full = CMatrix::Zero(n, n);
    for (size_t i = 0; i < q_rx.blocks.size(); ++i)
        q_full.block(i * n_e, i * n_e, n_e, n_e) = q_rx.blocks[i];
    const CMatrix p_full = CMatrix(p_rx.diag.asDiagonal());

    const auto derivs = channel_derivatives(scenario, params);
    std::vector<double> powers(derivs.size(), scenario.p_max);
    const double scale = 2.0 * scenario.num_symbols / scenario.noise_var;

    const int dim = params.dim();
    RMatrix out(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            CMatrix acc = CMatrix::Zero(n, n);
            for (size_t u = 0; u < derivs.size(); ++u)
                acc += powers[u] * derivs[u][j] * derivs[u][i].adjoint();
            out(i, j) = scale * (p_full.adjoint() * acc * p_full * q_full).trace().real();
        }
    }
    return out;
}

MusicGrid music_spectrum_naive(const CMatrix& y, const ScenarioConfig& scenario,
                               const CMatrix& w_rx, const PropagationMatrix& p_rx,
                               const GridSpec& spec, int k_hat) {
    const int n_rf = static_cast<int>(y.rows());
    if (n_rf <= k_hat)
        throw StructureError("music_spectrum_naive: noise subspace empty");
    const CMatrix r_cov = y * y.adjoint() / static_cast<double>(y.cols());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r_cov);
    const CMatrix noise = es.eigenvectors().leftCols(n_rf - k_hat);

    MusicGrid grid;
    grid.theta = spec.theta;
    grid.r_axis.resize(spec.n_r);
    grid.phi_axis.resize(spec.n_phi);
    grid.spectrum.resize(spec.n_r, spec.n_phi);
    for (int ir = 0; ir < spec.n_r; ++ir) grid.r_axis(ir) = spec.r_at(ir);
    for (int ip = 0; ip < spec.n_phi; ++ip) grid.phi_axis(ip) = spec.phi_at(ip);

    for (int ir = 0; ir < spec.n_r; ++ir) {
        for (int ip = 0; ip < spec.n_phi; ++ip) {
            const SphericalPoint p{spec.r_at(ir), spec.theta, spec.phi_at(ip)};
            const CVector a =
                steering_vector(scenario.panel, p, scenario.radiation_exponent).value;
            CVector eff = w_rx.adjoint() * p_rx.apply_hermitian(a);
            const double norm = eff.norm();
            if (norm > 0.0) eff /= norm;
            const double denom = (noise.adjoint() * eff).squaredNorm();
            grid.spectrum(ir, ip) = 1.0 / std::max(denom, 1e-18);
        }
    }
    return grid;
}

MapResult beampattern_map_naive(const ScenarioConfig& scenario,
                                const LorentzianWeights& weights, const GridSpec& spec) {
    const CMatrix w = weights.assembled();
    const auto p_rx = build_propagation_matrix(scenario.panel);
    MapResult map;
    map.theta = spec.theta;
    map.r_axis.resize(spec.n_r);
    map.phi_axis.resize(spec.n_phi);
    map.values.resize(spec.n_r, spec.n_phi);
    for (int ir = 0; ir < spec.n_r; ++ir) map.r_axis(ir) = spec.r_at(ir);
    for (int ip = 0; ip < spec.n_phi; ++ip) map.phi_axis(ip) = spec.phi_at(ip);
    for (int ir = 0; ir < spec.n_r; ++ir)
        for (int ip = 0; ip < spec.n_phi; ++ip) {
            const SphericalPoint p{spec.r_at(ir), spec.theta, spec.phi_at(ip)};
            CVector a = steering_vector(scenario.panel, p, scenario.radiation_exponent).value;
            const double norm = a.norm();
            if (norm > 0.0) a /= norm;
            map.values(ir, ip) = (w.adjoint() * p_rx.apply_hermitian(a)).squaredNorm();
        }
    const double peak = map.values.maxCoeff();
    if (peak > 0.0) map.values /= peak;
    return map;
}

MapResult peb_map_naive(const ScenarioConfig& scenario, const LorentzianWeights& weights,
                        const GridSpec& spec) {
    const CMatrix w = weights.assembled();
    const auto p_rx = build_propagation_matrix(scenario.panel);
    const auto q_rx =
        BlockDiagHermitian::from_combiner(w, scenario.panel.n_rf, scenario.panel.n_e);
    MapResult map;
    map.theta = spec.theta;
    map.r_axis.resize(spec.n_r);
    map.phi_axis.resize(spec.n_phi);
    map.values.resize(spec.n_r, spec.n_phi);
    for (int ir = 0; ir < spec.n_r; ++ir) map.r_axis(ir) = spec.r_at(ir);
    for (int ip = 0; ip < spec.n_phi; ++ip) map.phi_axis(ip) = spec.phi_at(ip);
    for (int ir = 0; ir < spec.n_r; ++ir)
        for (int ip = 0; ip < spec.n_phi; ++ip) {
            ScenarioConfig probe = scenario;
            probe.aoi = {{spec.r_at(ir), spec.theta, spec.phi_at(ip)}};
            try {
                map.values(ir, ip) = peb(fim(probe, aoi_params(probe), q_rx, p_rx));
            } catch (const SingularityError&) {
                map.values(ir, ip) = std::numeric_limits<double>::infinity();
            }
        }
    return map;
}

}  // namespace dmabeam::reference
