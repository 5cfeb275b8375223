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

#include "dmabeam/fisher.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace dmabeam {

BlockDiagHermitian BlockDiagHermitian::from_combiner(const CMatrix& w_rx, int n_rf, int n_e) {
    if (w_rx.rows() != static_cast<Eigen::Index>(n_rf) * n_e || w_rx.cols() != n_rf)
        throw StructureError("BlockDiagHermitian: combiner shape mismatch");
    BlockDiagHermitian q;
    q.blocks.reserve(n_rf);
    for (int i = 0; i < n_rf; ++i) {
        const CVector wi = w_rx.block(i * n_e, i, n_e, 1);
        q.blocks.push_back(wi * wi.adjoint());
    }
    return q;
}

BlockDiagHermitian BlockDiagHermitian::identity(int n_rf, int n_e) {
    BlockDiagHermitian q;
    q.blocks.assign(n_rf, CMatrix::Identity(n_e, n_e));
    return q;
}

void BlockDiagHermitian::validate(double psd_tol) const {
    if (blocks.empty()) throw StructureError("BlockDiagHermitian: no blocks");
    const int n_e = block_size();
    for (const auto& blk : blocks) {
        if (blk.rows() != n_e || blk.cols() != n_e)
            throw StructureError("BlockDiagHermitian: ragged block sizes");
        const double scale = std::max(1e-300, blk.norm());
        if ((blk - blk.adjoint()).norm() > 1e-10 * scale)
            throw StructureError("BlockDiagHermitian: block not Hermitian");
        Eigen::SelfAdjointEigenSolver<CMatrix> es(blk, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -psd_tol * scale)
            throw StructureError("BlockDiagHermitian: block not PSD");
    }
}

ParamVector aoi_params(const ScenarioConfig& scenario) {
    return ParamVector{scenario.aoi, ParamMode::aoi};
}

ParamVector target_params(const ScenarioConfig& scenario) {
    return ParamVector{scenario.targets, ParamMode::targets};
}

double illumination_power(const ScenarioConfig& scenario) {
    return scenario.num_ues > 0 ? scenario.num_ues * scenario.p_max : scenario.p_max;
}

std::vector<std::vector<CVector>> channel_derivatives(const ScenarioConfig& scenario,
                                                      const ParamVector& params) {
    const int n_params = params.dim();
    std::vector<SteeringJacobian> jac(params.points.size());
    for (size_t m = 0; m < params.points.size(); ++m)
        jac[m] = steering_jacobian(scenario.panel, params.points[m], scenario.radiation_exponent);
    auto column = [&](int p) -> const CVector& {
        const SteeringJacobian& j = jac[params.point_of(p)];
        switch (params.coord_of(p)) {
            case 0: return j.d_r;
            case 1: return j.d_theta;
            default: return j.d_phi;
        }
    };

    if (params.mode == ParamMode::aoi) {
        // Virtual unit-reflectivity targets: the same derivative for every UE
        // (one virtual probe row when the scenario has no UEs).
        const int rows = std::max(scenario.num_ues, 1);
        std::vector<std::vector<CVector>> d(rows, std::vector<CVector>(n_params));
        for (int p = 0; p < n_params; ++p) {
            const CVector& col = column(p);
            for (int u = 0; u < rows; ++u) d[u][p] = col;
        }
        return d;
    }

    if (scenario.num_ues < 1)
        throw std::invalid_argument("channel_derivatives: targets mode needs at least one UE");
    std::vector<Complex> beta = scenario.reflection_coeffs;
    if (static_cast<int>(beta.size()) != scenario.num_targets()) {
        ScenarioConfig tmp = scenario;
        populate_reflection_coeffs(tmp);
        beta = tmp.reflection_coeffs;
    }
    std::vector<std::vector<CVector>> d(scenario.num_ues, std::vector<CVector>(n_params));
    for (int u = 0; u < scenario.num_ues; ++u) {
        for (int p = 0; p < n_params; ++p) {
            const int k = params.point_of(p);
            if (k == u)
                d[u][p] = column(p);  // LoS term of UE u
            else
                d[u][p] = beta[k] * column(p);
        }
    }
    return d;
}

FimBundle fim(const ScenarioConfig& scenario, const ParamVector& params,
              const BlockDiagHermitian& q_rx, const PropagationMatrix& p_rx) {
    q_rx.validate();
    const int n_rf = scenario.panel.n_rf;
    const int n_e = scenario.panel.n_e;
    if (static_cast<int>(q_rx.blocks.size()) != n_rf || q_rx.block_size() != n_e)
        throw StructureError("fim: Q_rx blocking does not match the panel");

    const auto derivs = channel_derivatives(scenario, params);
    const int rows = static_cast<int>(derivs.size());
    const int dim = params.dim();

    // Rotate every derivative through P^H once.
    std::vector<std::vector<CVector>> g(rows, std::vector<CVector>(dim));
    for (int u = 0; u < rows; ++u)
        for (int p = 0; p < dim; ++p) g[u][p] = p_rx.apply_hermitian(derivs[u][p]);

    std::vector<double> powers(rows, scenario.p_max);
    if (scenario.num_ues == 0 && params.mode == ParamMode::aoi) powers.assign(1, scenario.p_max);

    FimBundle bundle;
    bundle.params = params;
    bundle.num_symbols = scenario.num_symbols;
    bundle.noise_var = scenario.noise_var;
    bundle.ue_powers = powers;
    bundle.matrix = RMatrix::Zero(dim, dim);
    const double scale = 2.0 * scenario.num_symbols / scenario.noise_var;

    // Entries are independent; upper triangle in parallel, mirrored afterwards.
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < dim * dim; ++idx) {
        const int i = idx / dim;
        const int j = idx % dim;
        if (j < i) continue;
        double acc = 0.0;
        for (int u = 0; u < rows; ++u) {
            Complex quad = 0.0;
            for (int b = 0; b < n_rf; ++b) {
                const auto gi = g[u][i].segment(b * n_e, n_e);
                const auto gj = g[u][j].segment(b * n_e, n_e);
                quad += gi.dot(q_rx.blocks[b] * gj);  // gi^H Q_b gj
            }
            acc += powers[u] * quad.real();
        }
        bundle.matrix(i, j) = scale * acc;
    }
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < i; ++j) bundle.matrix(i, j) = bundle.matrix(j, i);
    return bundle;
}

namespace {

// Shared eigen-based inversion with the conditioning bump.
struct FimInverse {
    RMatrix inverse;
    PebDiagnostics diag;
};

FimInverse invert_fim(const FimBundle& bundle) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(bundle.matrix);
    const RVector& ev = es.eigenvalues();
    FimInverse out;
    out.diag.min_eigenvalue = ev.minCoeff();
    const double ev_max = ev.maxCoeff();
    out.diag.condition =
        (out.diag.min_eigenvalue > 0.0) ? ev_max / out.diag.min_eigenvalue
                                        : std::numeric_limits<double>::infinity();
    double eps = 0.0;
    if (!(out.diag.condition <= 1e12)) {
        eps = 1e-12 * bundle.matrix.trace() / bundle.matrix.rows();
        out.diag.regularization = eps;
    }
    if (out.diag.min_eigenvalue + eps <= 0.0)
        throw SingularityError("peb: singular FIM, min eigenvalue " +
                               std::to_string(out.diag.min_eigenvalue));
    RVector inv_ev = (ev.array() + eps).inverse();
    out.inverse = es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
    return out;
}

}  // namespace

double peb(const FimBundle& bundle, PebDiagnostics* diag) {
    FimInverse inv = invert_fim(bundle);
    if (diag) *diag = inv.diag;
    return std::sqrt(inv.inverse.trace());
}

double peb_cartesian(const FimBundle& bundle, PebDiagnostics* diag) {
    FimInverse inv = invert_fim(bundle);
    if (diag) *diag = inv.diag;
    double acc = 0.0;
    for (size_t m = 0; m < bundle.params.points.size(); ++m) {
        const SphericalPoint& p = bundle.params.points[m];
        const double st = std::sin(p.theta), ct = std::cos(p.theta);
        const double sp = std::sin(p.phi), cp = std::cos(p.phi);
        Eigen::Matrix3d jac;
        jac << st * cp, p.r * ct * cp, -p.r * st * sp,
               st * sp, p.r * ct * sp, p.r * st * cp,
               ct, -p.r * st, 0.0;
        const RMatrix crb = inv.inverse.block(3 * m, 3 * m, 3, 3);
        acc += (jac * crb * jac.transpose()).trace();
    }
    return std::sqrt(acc);
}

double area_peb_pointwise(const ScenarioConfig& scenario,
                          const std::vector<SphericalPoint>& points,
                          const BlockDiagHermitian& q_rx, const PropagationMatrix& p_rx,
                          bool cartesian) {
    double acc = 0.0;
    for (const auto& point : points) {
        ScenarioConfig probe = scenario;
        probe.aoi = {point};
        const FimBundle bundle = fim(probe, aoi_params(probe), q_rx, p_rx);
        const double single = cartesian ? peb_cartesian(bundle) : peb(bundle);
        acc += single * single;
    }
    return std::sqrt(acc);
}

CMatrix lift_quadratic(const CMatrix& a, bool include_constant) {
    if (a.rows() != a.cols()) throw StructureError("lift_quadratic: matrix not square");
    const double scale = std::max(1e-300, a.norm());
    if ((a - a.adjoint()).norm() > 1e-10 * scale)
        throw StructureError("lift_quadratic: matrix not Hermitian");
    const int n = static_cast<int>(a.rows());
    const CVector ones = CVector::Ones(n);
    CMatrix lifted(n + 1, n + 1);
    lifted.topLeftCorner(n, n) = a;
    lifted.block(0, n, n, 1) = kImag * (a * ones);
    lifted.block(n, 0, 1, n) = lifted.block(0, n, n, 1).adjoint();
    lifted(n, n) = include_constant ? (ones.adjoint() * a * ones)(0, 0).real() : 0.0;
    return lifted;
}

std::vector<std::vector<CMatrix>> build_h_blocks(const ScenarioConfig& scenario,
                                                 const ChannelSet& channels,
                                                 const PropagationMatrix& p_rx,
                                                 bool constant_corrected) {
    const int n_rf = scenario.panel.n_rf;
    const int n_e = scenario.panel.n_e;
    std::vector<std::vector<CMatrix>> h(scenario.num_ues);
    for (int u = 0; u < scenario.num_ues; ++u) {
        const CVector v = p_rx.apply_hermitian(channels.h_total[u]);
        h[u].reserve(n_rf);
        for (int i = 0; i < n_rf; ++i) {
            const CVector vi = v.segment(i * n_e, n_e);
            h[u].push_back(lift_quadratic(vi * vi.adjoint(), constant_corrected));
        }
    }
    return h;
}

std::vector<CMatrix> build_b_blocks(const ScenarioConfig& scenario, const ParamVector& params,
                                    const PropagationMatrix& p_rx, bool constant_corrected) {
    if (params.mode != ParamMode::aoi)
        throw std::invalid_argument("build_b_blocks: AoI parameters expected");
    const int n_rf = scenario.panel.n_rf;
    const int n_e = scenario.panel.n_e;
    const auto derivs = channel_derivatives(scenario, params);
    std::vector<CMatrix> blk(n_rf, CMatrix::Zero(n_e, n_e));
    for (int p = 0; p < params.dim(); ++p) {
        const CVector g = p_rx.apply_hermitian(derivs[0][p]);
        for (int i = 0; i < n_rf; ++i) {
            const CVector gi = g.segment(i * n_e, n_e);
            blk[i] += gi * gi.adjoint();
        }
    }
    std::vector<CMatrix> lifted;
    lifted.reserve(n_rf);
    for (int i = 0; i < n_rf; ++i) lifted.push_back(lift_quadratic(blk[i], constant_corrected));
    return lifted;
}

const FimEntryCoeff& LiftedBlocks::fim_entry(int j, int k) const {
    if (j > k) std::swap(j, k);
    return fim_coeffs[static_cast<size_t>(j) * fim_dim + k];
}

LiftedBlocks build_lifted_blocks(const ScenarioConfig& scenario, const ChannelSet& channels,
                                 const PropagationMatrix& p_rx, bool constant_corrected) {
    LiftedBlocks out;
    out.constant_corrected = constant_corrected;
    out.h_blocks = build_h_blocks(scenario, channels, p_rx, constant_corrected);
    const ParamVector params = aoi_params(scenario);
    out.b_blocks = build_b_blocks(scenario, params, p_rx, constant_corrected);
    out.fim_dim = params.dim();

    const int n_rf = scenario.panel.n_rf;
    const int n_e = scenario.panel.n_e;
    const auto derivs = channel_derivatives(scenario, params);
    std::vector<CVector> g(params.dim());
    for (int p = 0; p < params.dim(); ++p) g[p] = p_rx.apply_hermitian(derivs[0][p]);

    const double scale =
        2.0 * scenario.num_symbols / scenario.noise_var * illumination_power(scenario) * 0.25;
    out.fim_coeffs.assign(static_cast<size_t>(params.dim()) * params.dim(), FimEntryCoeff{});
    for (int j = 0; j < params.dim(); ++j) {
        for (int k = j; k < params.dim(); ++k) {
            FimEntryCoeff entry;
            entry.coeff.reserve(n_rf);
            for (int i = 0; i < n_rf; ++i) {
                const CVector gj = g[j].segment(i * n_e, n_e);
                const CVector gk = g[k].segment(i * n_e, n_e);
                const CMatrix sym = 0.5 * (gk * gj.adjoint() + gj * gk.adjoint());
                entry.coeff.push_back(scale * lift_quadratic(sym, constant_corrected));
            }
            out.fim_coeffs[static_cast<size_t>(j) * params.dim() + k] = std::move(entry);
        }
    }
    return out;
}

}  // namespace dmabeam
