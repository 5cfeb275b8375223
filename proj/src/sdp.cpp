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

#include "dmabeam/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace dmabeam {

const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::optimal: return "optimal";
        case SdpStatus::infeasible: return "infeasible";
        case SdpStatus::max_iter: return "max_iter";
        default: return "numerical_failure";
    }
}

SdpTerm SdpTerm::from_dense(int block, RMatrix m) {
    SdpTerm t;
    t.block = block;
    t.dense = std::move(m);
    return t;
}

SdpTerm SdpTerm::from_entries(int block, std::vector<Entry> entries) {
    SdpTerm t;
    t.block = block;
    t.entries = std::move(entries);
    return t;
}

RMatrix SdpTerm::to_dense(int size) const {
    if (is_dense()) return dense;
    RMatrix m = RMatrix::Zero(size, size);
    for (const auto& e : entries) {
        m(e.row, e.col) = e.value;
        m(e.col, e.row) = e.value;
    }
    return m;
}

RMatrix hermitian_embed(const CMatrix& h) {
    const double scale = std::max(1e-300, h.norm());
    if ((h - h.adjoint()).norm() > 1e-10 * scale)
        throw StructureError("hermitian_embed: matrix not Hermitian");
    const int n = static_cast<int>(h.rows());
    RMatrix out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    out.bottomRightCorner(n, n) = h.real();
    // Exact symmetry regardless of rounding in the Hermitian input.
    out = 0.5 * (out + out.transpose()).eval();
    return out;
}

CMatrix hermitian_unembed(const RMatrix& x) {
    if (x.rows() != x.cols() || x.rows() % 2 != 0)
        throw StructureError("hermitian_unembed: even square matrix expected");
    const int n = static_cast<int>(x.rows()) / 2;
    const RMatrix re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
    const RMatrix im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
    CMatrix h = re.cast<Complex>() + kImag * im.cast<Complex>();
    return 0.5 * (h + h.adjoint()).eval();
}

std::pair<double, CVector> principal_eigvec(const CMatrix& h) {
    if (!h.allFinite()) throw std::invalid_argument("principal_eigvec: non-finite entries");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success)
        throw SingularityError("principal_eigvec: eigendecomposition failed");
    const int n = static_cast<int>(h.rows());
    const double lambda = es.eigenvalues()(n - 1);
    CVector v = es.eigenvectors().col(n - 1);
    // Phase anchor: last entry, falling back to the largest-magnitude entry.
    int anchor = n - 1;
    if (std::abs(v(anchor)) < 1e-9) {
        double best = 0.0;
        for (int k = 0; k < n; ++k)
            if (std::abs(v(k)) > best) {
                best = std::abs(v(k));
                anchor = k;
            }
    }
    if (std::abs(v(anchor)) > 0.0) v *= std::conj(v(anchor)) / std::abs(v(anchor));
    return {lambda, v};
}

namespace {

struct Cons {
    std::vector<SdpTerm> terms;  // sorted by block
    double rhs = 0.0;
};

// Tr{A S} for symmetric A and a general square S.
double term_inner(const SdpTerm& t, const RMatrix& s) {
    if (t.is_dense()) return t.dense.cwiseProduct(s).sum();
    double acc = 0.0;
    for (const auto& e : t.entries)
        acc += (e.row == e.col) ? e.value * s(e.row, e.row)
                                : e.value * (s(e.row, e.col) + s(e.col, e.row));
    return acc;
}

// X * A * Y for symmetric sparse/dense A.
void term_sandwich(const SdpTerm& t, const RMatrix& x, const RMatrix& y, RMatrix& out) {
    if (t.is_dense()) {
        out.noalias() = x * t.dense * y;
        return;
    }
    out.setZero();
    for (const auto& e : t.entries) {
        out.noalias() += e.value * (x.col(e.row) * y.row(e.col));
        if (e.row != e.col) out.noalias() += e.value * (x.col(e.col) * y.row(e.row));
    }
}

void term_axpy(const SdpTerm& t, double alpha, RMatrix& out) {
    if (alpha == 0.0) return;
    if (t.is_dense()) {
        out.noalias() += alpha * t.dense;
        return;
    }
    for (const auto& e : t.entries) {
        out(e.row, e.col) += alpha * e.value;
        if (e.row != e.col) out(e.col, e.row) += alpha * e.value;
    }
}

double term_frob_sq(const SdpTerm& t) {
    if (t.is_dense()) return t.dense.squaredNorm();
    double acc = 0.0;
    for (const auto& e : t.entries)
        acc += (e.row == e.col) ? e.value * e.value : 2.0 * e.value * e.value;
    return acc;
}

void term_scale(SdpTerm& t, double f) {
    if (t.is_dense())
        t.dense *= f;
    else
        for (auto& e : t.entries) e.value *= f;
}

double block_inner(const std::vector<RMatrix>& a, const std::vector<RMatrix>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i].cwiseProduct(b[i]).sum();
    return acc;
}

// Largest step alpha with S + alpha dS >= 0, via the generalized eigenvalues of
// L^-1 dS L^-T where S = L L^T.
double max_step(const RMatrix& s, const RMatrix& ds) {
    if (s.rows() == 1) {
        if (ds(0, 0) >= 0.0) return std::numeric_limits<double>::infinity();
        return -s(0, 0) / ds(0, 0);
    }
    Eigen::LLT<RMatrix> llt(s);
    if (llt.info() != Eigen::Success) {
        // Boundary-grazing iterate: fall back to an exact bisection on the cone.
        const double floor_tol = -1e-12 * std::max(1.0, s.norm());
        auto psd_at = [&](double alpha) {
            Eigen::SelfAdjointEigenSolver<RMatrix> es(s + alpha * ds,
                                                      Eigen::EigenvaluesOnly);
            return es.eigenvalues().minCoeff() >= floor_tol;
        };
        if (psd_at(1.0)) return 1.0;
        double lo = 0.0, hi = 1.0;
        if (!psd_at(0.0)) return 0.0;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            (psd_at(mid) ? lo : hi) = mid;
        }
        return lo;
    }
    const RMatrix l_inv_ds = llt.matrixL().solve(ds);
    const RMatrix w = llt.matrixL().solve(l_inv_ds.transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (w + w.transpose()),
                                              Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

class InteriorPointSolver {
  public:
    InteriorPointSolver(const SdpProblem& problem, const SdpOptions& opts)
        : opts_(opts), input_(problem) {
        setup();
    }

    SdpSolution run();

  private:
    void setup();
    void compute_residuals();
    void build_schur();
    bool solve_schur(const RVector& rhs, RVector& dy);
    void apply_at(const RVector& y, std::vector<RMatrix>& out) const;
    double dot_con(int c, const std::vector<RMatrix>& s) const;
    void restore_primal_feasibility();
    SdpSolution finish(SdpStatus status);

    SdpOptions opts_;
    const SdpProblem& input_;

    std::vector<int> sizes_;
    std::vector<RMatrix> c_;  // normalized objective per block
    std::vector<Cons> cons_;  // normalized, all equality
    std::vector<double> row_scale_;
    double obj_scale_ = 1.0;
    int n_total_ = 0;
    int m_ = 0;
    int n_orig_blocks_ = 0;

    // (constraint index, term index) lists per block.
    std::vector<std::vector<std::pair<int, int>>> block_cons_;

    std::vector<RMatrix> x_, z_, zinv_, rd_;
    RVector y_, rp_;
    RMatrix schur_;
    double mu_ = 0.0;
    double rel_p_ = 0.0, rel_d_ = 0.0, rel_gap_ = 0.0;
    double p_obj_ = 0.0, d_cert_ = 0.0;
    double rhs_norm_ = 0.0, c_norm_ = 0.0;
    int iter_ = 0;
    std::vector<std::pair<double, double>> history_;
    std::vector<double> rel_p_history_;

    // Closest-to-tolerance iterate, restored when the tail of the run degrades.
    struct Snapshot {
        bool valid = false;
        double score = std::numeric_limits<double>::infinity();
        std::vector<RMatrix> x, z;
        RVector y;
    } best_;
};

void InteriorPointSolver::setup() {
    if (input_.block_sizes.empty() || input_.constraints.empty())
        throw std::invalid_argument("sdp::solve: empty problem");
    for (int s : input_.block_sizes)
        if (s < 1) throw std::invalid_argument("sdp::solve: block sizes must be >= 1");
    sizes_ = input_.block_sizes;
    n_orig_blocks_ = static_cast<int>(sizes_.size());

    auto check_term = [&](const SdpTerm& t) {
        if (t.block < 0 || t.block >= static_cast<int>(sizes_.size()))
            throw StructureError("sdp::solve: term block index out of range");
        const int n = sizes_[t.block];
        if (t.is_dense()) {
            if (t.dense.rows() != n || t.dense.cols() != n)
                throw StructureError("sdp::solve: dense term size mismatch");
            if ((t.dense - t.dense.transpose()).norm() >
                1e-10 * std::max(1.0, t.dense.norm()))
                throw StructureError("sdp::solve: coefficient matrix not symmetric");
        } else {
            for (const auto& e : t.entries)
                if (e.row < 0 || e.col < e.row || e.col >= n)
                    throw StructureError("sdp::solve: sparse entry out of range");
        }
    };
    for (const auto& t : input_.objective) check_term(t);
    for (const auto& con : input_.constraints)
        for (const auto& t : con.terms) check_term(t);

    // Inequalities get a 1x1 slack block each: sum Tr{A X} - s = rhs, s >= 0.
    cons_.reserve(input_.constraints.size());
    for (const auto& con : input_.constraints) {
        Cons c;
        c.terms = con.terms;
        c.rhs = con.rhs;
        if (con.sense == SdpSense::ge) {
            const int slack = static_cast<int>(sizes_.size());
            sizes_.push_back(1);
            c.terms.push_back(SdpTerm::from_entries(slack, {{0, 0, -1.0}}));
        }
        std::sort(c.terms.begin(), c.terms.end(),
                  [](const SdpTerm& a, const SdpTerm& b) { return a.block < b.block; });
        cons_.push_back(std::move(c));
    }
    m_ = static_cast<int>(cons_.size());
    n_total_ = 0;
    for (int s : sizes_) n_total_ += s;

    // Row normalization (Frobenius) and objective normalization.
    row_scale_.resize(m_);
    for (int c = 0; c < m_; ++c) {
        double fs = 0.0;
        for (const auto& t : cons_[c].terms) fs += term_frob_sq(t);
        row_scale_[c] = std::max(std::sqrt(fs), 1e-12);
        for (auto& t : cons_[c].terms) term_scale(t, 1.0 / row_scale_[c]);
        cons_[c].rhs /= row_scale_[c];
    }
    c_.assign(sizes_.size(), RMatrix());
    for (size_t b = 0; b < sizes_.size(); ++b) c_[b] = RMatrix::Zero(sizes_[b], sizes_[b]);
    double obj_fs = 0.0;
    for (const auto& t : input_.objective) obj_fs += term_frob_sq(t);
    obj_scale_ = std::max(std::sqrt(obj_fs), 1e-12);
    for (const auto& t : input_.objective) term_axpy(t, 1.0 / obj_scale_, c_[t.block]);

    block_cons_.assign(sizes_.size(), {});
    for (int c = 0; c < m_; ++c)
        for (size_t ti = 0; ti < cons_[c].terms.size(); ++ti)
            block_cons_[cons_[c].terms[ti].block].emplace_back(c, static_cast<int>(ti));

    rhs_norm_ = 0.0;
    for (const auto& c : cons_) rhs_norm_ += c.rhs * c.rhs;
    rhs_norm_ = std::sqrt(rhs_norm_);
    c_norm_ = 0.0;
    for (const auto& cb : c_) c_norm_ += cb.squaredNorm();
    c_norm_ = std::sqrt(c_norm_);

    // Infeasible start at scaled identities.
    double max_rhs = 0.0;
    for (const auto& c : cons_) max_rhs = std::max(max_rhs, std::abs(c.rhs));
    const double tau_p = std::max({10.0, std::sqrt(static_cast<double>(n_total_)), max_rhs});
    const double tau_d = std::max(10.0, std::sqrt(static_cast<double>(n_total_)));
    x_.resize(sizes_.size());
    z_.resize(sizes_.size());
    for (size_t b = 0; b < sizes_.size(); ++b) {
        x_[b] = tau_p * RMatrix::Identity(sizes_[b], sizes_[b]);
        z_[b] = tau_d * RMatrix::Identity(sizes_[b], sizes_[b]);
    }
    y_ = RVector::Zero(m_);
}

double InteriorPointSolver::dot_con(int c, const std::vector<RMatrix>& s) const {
    double acc = 0.0;
    for (const auto& t : cons_[c].terms) acc += term_inner(t, s[t.block]);
    return acc;
}

void InteriorPointSolver::apply_at(const RVector& y, std::vector<RMatrix>& out) const {
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < static_cast<int>(sizes_.size()); ++b) {
        out[b].setZero();
        for (const auto& [c, ti] : block_cons_[b]) term_axpy(cons_[c].terms[ti], y(c), out[b]);
    }
}

void InteriorPointSolver::compute_residuals() {
    rp_.resize(m_);
    for (int c = 0; c < m_; ++c) rp_(c) = cons_[c].rhs - dot_con(c, x_);

    rd_.assign(sizes_.size(), RMatrix());
    for (size_t b = 0; b < sizes_.size(); ++b) rd_[b].resize(sizes_[b], sizes_[b]);
    apply_at(y_, rd_);
    double rd_norm = 0.0;
    for (size_t b = 0; b < sizes_.size(); ++b) {
        rd_[b] = c_[b] - z_[b] - rd_[b];
        rd_norm += rd_[b].squaredNorm();
    }

    mu_ = block_inner(x_, z_) / n_total_;
    p_obj_ = block_inner(c_, x_);
    double y_dot_r = 0.0;
    for (int c = 0; c < m_; ++c) y_dot_r += y_(c) * cons_[c].rhs;
    d_cert_ = y_dot_r + block_inner(rd_, x_) - y_.dot(rp_);

    rel_p_ = rp_.norm() / (1.0 + rhs_norm_);
    rel_d_ = std::sqrt(rd_norm) / (1.0 + c_norm_);
    rel_gap_ = std::abs(p_obj_ - d_cert_) / (1.0 + std::abs(p_obj_) + std::abs(d_cert_));
    history_.emplace_back(obj_scale_ * p_obj_, obj_scale_ * d_cert_);
    rel_p_history_.push_back(rel_p_);

    const double score = std::max({rel_p_ / opts_.tol_primal, rel_d_ / opts_.tol_dual,
                                   rel_gap_ / opts_.tol_gap});
    if (score < best_.score) {
        best_.valid = true;
        best_.score = score;
        best_.x = x_;
        best_.z = z_;
        best_.y = y_;
    }
}

void InteriorPointSolver::build_schur() {
    schur_.setZero(m_, m_);
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < m_; ++c) {
        RMatrix sandwich;
        for (const auto& t : cons_[c].terms) {
            const int b = t.block;
            sandwich.resize(sizes_[b], sizes_[b]);
            term_sandwich(t, x_[b], zinv_[b], sandwich);
            for (const auto& [c2, ti2] : block_cons_[b]) {
                if (c2 < c) continue;
                schur_(c, c2) += term_inner(cons_[c2].terms[ti2], sandwich);
            }
        }
    }
    const RMatrix upper = schur_;
    schur_ = upper.selfadjointView<Eigen::Upper>();
}

bool InteriorPointSolver::solve_schur(const RVector& rhs, RVector& dy) {
    RMatrix mat = schur_;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::LLT<RMatrix> llt(mat);
        if (llt.info() == Eigen::Success) {
            dy = llt.solve(rhs);
            if (dy.allFinite()) {
                // Iterative refinement against the unridged matrix keeps the
                // late-stage directions accurate enough to hold primal feasibility.
                const double scale = std::max(1.0, rhs.norm());
                for (int round = 0; round < 3; ++round) {
                    RVector residual = rhs - schur_ * dy;
                    if (!residual.allFinite() || residual.norm() <= 1e-13 * scale) break;
                    const RVector correction = llt.solve(residual);
                    if (!correction.allFinite()) break;
                    dy += correction;
                }
                return true;
            }
        }
        ridge = (ridge == 0.0) ? 1e-12 * std::max(1.0, schur_.trace() / m_) : ridge * 100.0;
        mat = schur_ + ridge * RMatrix::Identity(m_, m_);
    }
    return false;
}

// Least-norm primal correction through the constraint Gram matrix, with a PSD
// clip: shaves a small terminal feasibility residual off an otherwise
// converged iterate.
void InteriorPointSolver::restore_primal_feasibility() {
    RMatrix gram = RMatrix::Zero(m_, m_);
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < m_; ++c) {
        RMatrix dense;
        for (const auto& t : cons_[c].terms) {
            const int b = t.block;
            dense = t.to_dense(sizes_[b]);
            for (const auto& [c2, ti2] : block_cons_[b]) {
                if (c2 < c) continue;
                gram(c, c2) += term_inner(cons_[c2].terms[ti2], dense);
            }
        }
    }
    const RMatrix upper = gram;
    gram = upper.selfadjointView<Eigen::Upper>();
    Eigen::LLT<RMatrix> llt(gram + 1e-12 * RMatrix::Identity(m_, m_));
    if (llt.info() != Eigen::Success) return;

    std::vector<RMatrix> delta(sizes_.size());
    for (size_t b = 0; b < sizes_.size(); ++b) delta[b].resize(sizes_[b], sizes_[b]);
    for (int pass = 0; pass < 3; ++pass) {
        RVector rp(m_);
        for (int c = 0; c < m_; ++c) rp(c) = cons_[c].rhs - dot_con(c, x_);
        if (rp.norm() <= 0.5 * opts_.tol_primal * (1.0 + rhs_norm_)) break;
        const RVector lambda = llt.solve(rp);
        apply_at(lambda, delta);
        for (size_t b = 0; b < sizes_.size(); ++b) {
            x_[b] += delta[b];
            Eigen::SelfAdjointEigenSolver<RMatrix> es(x_[b]);
            if (es.eigenvalues().minCoeff() < 0.0)
                x_[b] = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                        es.eigenvectors().transpose();
        }
    }
}

SdpSolution InteriorPointSolver::finish(SdpStatus status) {
    // A degraded tail should not hide an iterate that already met the contract.
    if ((status == SdpStatus::max_iter || status == SdpStatus::numerical_failure) &&
        best_.valid) {
        x_ = best_.x;
        z_ = best_.z;
        y_ = best_.y;
        compute_residuals();
        // Near miss on the primal residual alone: try feasibility restoration.
        if (rel_p_ > opts_.tol_primal && rel_p_ <= 1e3 * opts_.tol_primal &&
            rel_d_ <= opts_.tol_dual && rel_gap_ <= 10.0 * opts_.tol_gap) {
            restore_primal_feasibility();
            compute_residuals();
        }
        if (rel_p_ <= opts_.tol_primal && rel_d_ <= opts_.tol_dual &&
            rel_gap_ <= opts_.tol_gap)
            status = SdpStatus::optimal;
    }
    SdpSolution sol;
    sol.status = status;
    sol.iterations = iter_;
    sol.block_values.assign(x_.begin(), x_.begin() + n_orig_blocks_);
    // Objective in original units, from the original data.
    double obj = 0.0;
    for (const auto& t : input_.objective) obj += term_inner(t, sol.block_values[t.block]);
    sol.objective_value = obj;
    sol.dual_objective = obj_scale_ * d_cert_;
    sol.dual_values.resize(m_);
    for (int c = 0; c < m_; ++c) sol.dual_values[c] = y_(c) * obj_scale_ / row_scale_[c];
    RVector rp_orig = rp_;
    for (int c = 0; c < m_; ++c) rp_orig(c) *= row_scale_[c];
    sol.primal_residual = rp_orig.norm();
    double rd_norm = 0.0;
    for (const auto& r : rd_) rd_norm += r.squaredNorm();
    sol.dual_residual = obj_scale_ * std::sqrt(rd_norm);
    sol.duality_gap = rel_gap_;
    sol.objective_history = history_;
    return sol;
}

SdpSolution InteriorPointSolver::run() {
    std::vector<RMatrix> dxa(sizes_.size()), dza(sizes_.size()), dx(sizes_.size()),
        dz(sizes_.size()), work(sizes_.size());
    for (size_t b = 0; b < sizes_.size(); ++b) work[b].resize(sizes_[b], sizes_[b]);
    zinv_.assign(sizes_.size(), RMatrix());

    for (iter_ = 0; iter_ < opts_.max_iterations; ++iter_) {
        compute_residuals();
        if (opts_.verbose)
            std::cerr << "sdp iter " << iter_ << " mu " << mu_ << " relP " << rel_p_
                      << " relD " << rel_d_ << " gap " << rel_gap_ << " obj "
                      << obj_scale_ * p_obj_ << '\n';
        const bool p_ok = rel_p_ <= opts_.tol_primal;
        const bool d_ok = rel_d_ <= opts_.tol_dual;
        if (p_ok && d_ok && rel_gap_ <= opts_.tol_gap) return finish(SdpStatus::optimal);
        if (mu_ <= 0.0) return finish(SdpStatus::numerical_failure);

        // Primal infeasibility heuristic: residual stalls while the dual certificate
        // blows up (or complementarity has already collapsed).
        if (iter_ >= 25 && rel_p_ > 1e3 * opts_.tol_primal) {
            const double old = rel_p_history_[rel_p_history_.size() - 21];
            const bool stalled = rel_p_ > 0.5 * old;
            const bool blowup = y_.lpNorm<Eigen::Infinity>() > 1e8 ||
                                d_cert_ > 1e8 * (1.0 + std::abs(p_obj_));
            if (stalled && (blowup || mu_ < 1e-10)) return finish(SdpStatus::infeasible);
        }

        // Block inverses of Z (ridge retries against boundary grazing).
        bool factor_ok = true;
        for (size_t b = 0; b < sizes_.size(); ++b) {
            Eigen::LLT<RMatrix> llt(z_[b]);
            double ridge = 1e-14 * std::max(1.0, z_[b].trace() / sizes_[b]);
            for (int attempt = 0; llt.info() != Eigen::Success && attempt < 4; ++attempt) {
                llt.compute(z_[b] + ridge * RMatrix::Identity(sizes_[b], sizes_[b]));
                ridge *= 100.0;
            }
            if (llt.info() != Eigen::Success) {
                factor_ok = false;
                break;
            }
            zinv_[b] = llt.solve(RMatrix::Identity(sizes_[b], sizes_[b]));
        }
        if (!factor_ok) return finish(SdpStatus::numerical_failure);

        build_schur();

        // Predictor (sigma = 0).
        RVector rhs(m_);
#pragma omp parallel for schedule(static)
        for (int c = 0; c < m_; ++c) {
            double xrz = 0.0;
            for (const auto& t : cons_[c].terms) {
                const int b = t.block;
                // <A, X Rd Zinv> = Tr{A X Rd Zinv}
                const RMatrix tmp = x_[b] * rd_[b] * zinv_[b];
                xrz += term_inner(t, tmp);
            }
            rhs(c) = cons_[c].rhs + xrz;
        }
        RVector dy(m_);
        if (!solve_schur(rhs, dy)) return finish(SdpStatus::numerical_failure);
        apply_at(dy, work);
        for (size_t b = 0; b < sizes_.size(); ++b) {
            dza[b] = rd_[b] - work[b];
            dxa[b] = -x_[b] - x_[b] * dza[b] * zinv_[b];
            dxa[b] = 0.5 * (dxa[b] + dxa[b].transpose()).eval();
        }
        double ap = 1.0, ad = 1.0;
        for (size_t b = 0; b < sizes_.size(); ++b) {
            ap = std::min(ap, opts_.step_fraction * max_step(x_[b], dxa[b]));
            ad = std::min(ad, opts_.step_fraction * max_step(z_[b], dza[b]));
        }
        double mu_aff = 0.0;
        for (size_t b = 0; b < sizes_.size(); ++b)
            mu_aff += ((x_[b] + ap * dxa[b]).cwiseProduct(z_[b] + ad * dza[b])).sum();
        mu_aff /= n_total_;
        double sigma = std::clamp(std::pow(mu_aff / mu_, 3.0), 1e-6, 1.0);
        // Keep complementarity from running ahead of the residuals: driving mu to
        // the floor while relP/relD lag wrecks the late-stage Schur conditioning.
        const double resid_measure =
            std::max(rel_p_ / opts_.tol_primal, rel_d_ / opts_.tol_dual);
        if (resid_measure > 1.0 && rel_gap_ / opts_.tol_gap <= resid_measure)
            sigma = std::max(sigma, 0.5);

        // Corrector.
#pragma omp parallel for schedule(static)
        for (int c = 0; c < m_; ++c) {
            double extra = 0.0;
            for (const auto& t : cons_[c].terms) {
                const int b = t.block;
                const RMatrix tmp = (x_[b] * rd_[b] + dxa[b] * dza[b]) * zinv_[b];
                extra += term_inner(t, tmp);
                extra -= sigma * mu_ * term_inner(t, zinv_[b]);
            }
            rhs(c) = cons_[c].rhs + extra;
        }
        if (!solve_schur(rhs, dy)) return finish(SdpStatus::numerical_failure);
        apply_at(dy, work);
        for (size_t b = 0; b < sizes_.size(); ++b) {
            dz[b] = rd_[b] - work[b];
            dx[b] = sigma * mu_ * zinv_[b] - x_[b] - (dxa[b] * dza[b] + x_[b] * dz[b]) * zinv_[b];
            dx[b] = 0.5 * (dx[b] + dx[b].transpose()).eval();
        }
        ap = 1.0;
        ad = 1.0;
        for (size_t b = 0; b < sizes_.size(); ++b) {
            ap = std::min(ap, opts_.step_fraction * max_step(x_[b], dx[b]));
            ad = std::min(ad, opts_.step_fraction * max_step(z_[b], dz[b]));
        }
        if (opts_.verbose) std::cerr << "    step ap " << ap << " ad " << ad << " sigma " << sigma << '\n';
        if (ap < 1e-10 && ad < 1e-10) return finish(SdpStatus::numerical_failure);

        bool finite = true;
        for (size_t b = 0; b < sizes_.size(); ++b) {
            x_[b] += ap * dx[b];
            z_[b] += ad * dz[b];
            x_[b] = 0.5 * (x_[b] + x_[b].transpose()).eval();
            z_[b] = 0.5 * (z_[b] + z_[b].transpose()).eval();
            finite = finite && x_[b].allFinite() && z_[b].allFinite();
        }
        y_ += ad * dy;
        if (!finite || !y_.allFinite()) return finish(SdpStatus::numerical_failure);
    }
    compute_residuals();
    return finish(SdpStatus::max_iter);
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& options) {
    InteriorPointSolver solver(problem, options);
    return solver.run();
}

void dump_problem(const SdpProblem& problem, std::ostream& os) {
    os << "dmabeam-sdp v1\n";
    os << "blocks " << problem.block_sizes.size();
    for (int s : problem.block_sizes) os << ' ' << s;
    os << '\n';
    char buf[64];
    auto put = [&](double v) {
        snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    auto put_term = [&](const char* tag, int con, const SdpTerm& t) {
        const int n = t.is_dense() ? static_cast<int>(t.dense.rows()) : 0;
        if (t.is_dense()) {
            for (int r = 0; r < n; ++r)
                for (int c = r; c < n; ++c) {
                    if (t.dense(r, c) == 0.0) continue;
                    os << tag << ' ' << con << ' ' << t.block << ' ' << r << ' ' << c << ' ';
                    put(t.dense(r, c));
                    os << '\n';
                }
        } else {
            for (const auto& e : t.entries) {
                os << tag << ' ' << con << ' ' << t.block << ' ' << e.row << ' ' << e.col << ' ';
                put(e.value);
                os << '\n';
            }
        }
    };
    for (const auto& t : problem.objective) put_term("obj", -1, t);
    os << "constraints " << problem.constraints.size() << '\n';
    for (size_t c = 0; c < problem.constraints.size(); ++c) {
        const auto& con = problem.constraints[c];
        os << "con " << c << ' ' << (con.sense == SdpSense::eq ? "eq" : "ge") << ' ';
        put(con.rhs);
        os << '\n';
        for (const auto& t : con.terms) put_term("a", static_cast<int>(c), t);
    }
    os << "end\n";
}

SdpProblem load_problem(std::istream& is) {
    SdpProblem p;
    std::string token;
    is >> token;
    if (token != "dmabeam-sdp") throw std::runtime_error("load_problem: bad magic");
    is >> token;  // version
    is >> token;
    if (token != "blocks") throw std::runtime_error("load_problem: expected blocks");
    size_t nb = 0;
    is >> nb;
    p.block_sizes.resize(nb);
    for (auto& s : p.block_sizes) is >> s;

    // Entries accumulate into sparse terms keyed by (constraint, block).
    auto add_entry = [&](std::vector<SdpTerm>& terms, int block, int r, int c, double v) {
        for (auto& t : terms)
            if (t.block == block) {
                t.entries.push_back({r, c, v});
                return;
            }
        terms.push_back(SdpTerm::from_entries(block, {{r, c, v}}));
    };

    while (is >> token) {
        if (token == "obj") {
            int con, block, r, c;
            double v;
            is >> con >> block >> r >> c >> v;
            add_entry(p.objective, block, r, c, v);
        } else if (token == "constraints") {
            size_t m;
            is >> m;
            p.constraints.resize(m);
        } else if (token == "con") {
            size_t c;
            std::string sense;
            double rhs;
            is >> c >> sense >> rhs;
            p.constraints.at(c).rhs = rhs;
            p.constraints.at(c).sense = (sense == "ge") ? SdpSense::ge : SdpSense::eq;
        } else if (token == "a") {
            int con, block, r, c;
            double v;
            is >> con >> block >> r >> c >> v;
            add_entry(p.constraints.at(con).terms, block, r, c, v);
        } else if (token == "end") {
            break;
        } else {
            throw std::runtime_error("load_problem: unexpected token " + token);
        }
    }
    return p;
}

}  // namespace dmabeam
