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

#ifndef DMABEAM_SDP_HPP
#define DMABEAM_SDP_HPP

#include <iosfwd>
#include <utility>
#include <vector>

#include "dmabeam/types.hpp"

namespace dmabeam {

/// One symmetric coefficient matrix acting on one PSD block. Sparse terms carry
/// upper-triangle entries (value applies to both mirrored positions); dense terms
/// carry the full matrix.
struct SdpTerm {
    struct Entry {
        int row = 0;
        int col = 0;  // row <= col
        double value = 0.0;
    };
    int block = 0;
    RMatrix dense;               // empty when the term is sparse
    std::vector<Entry> entries;  // used when dense is empty

    bool is_dense() const { return dense.size() > 0; }
    static SdpTerm from_dense(int block, RMatrix m);
    static SdpTerm from_entries(int block, std::vector<Entry> entries);
    RMatrix to_dense(int size) const;
};

enum class SdpSense { eq, ge };

struct SdpConstraint {
    std::vector<SdpTerm> terms;
    double rhs = 0.0;
    SdpSense sense = SdpSense::eq;
};

/// Standard-form program over a product of PSD cones (1x1 blocks act as the
/// nonnegative orthant): minimize sum_b Tr{C_b X_b} subject to the listed
/// equality / >= trace constraints and X_b >= 0.
struct SdpProblem {
    std::vector<int> block_sizes;
    std::vector<SdpTerm> objective;
    std::vector<SdpConstraint> constraints;
};

enum class SdpStatus { optimal, infeasible, max_iter, numerical_failure };

const char* to_string(SdpStatus s);

struct SdpSolution {
    std::vector<RMatrix> block_values;
    double objective_value = 0.0;
    double dual_objective = 0.0;  // certified lower bound (Lagrangian value)
    SdpStatus status = SdpStatus::numerical_failure;
    int iterations = 0;
    double primal_residual = 0.0;  // ||rhs - A(X)||_2
    double dual_residual = 0.0;    // ||C - Z - A^T(y)||_F
    double duality_gap = 0.0;      // relative
    std::vector<double> dual_values;
    // (primal, certified dual) per iterate; the second never exceeds the first.
    std::vector<std::pair<double, double>> objective_history;
};

struct SdpOptions {
    double tol_primal = 1e-7;
    double tol_dual = 1e-7;
    // One decade under the reported-gap contract so worked objectives land
    // within 1e-6 absolute error.
    double tol_gap = 1e-7;
    int max_iterations = 200;
    double step_fraction = 0.98;
    bool verbose = false;
};

/// Predictor-corrector primal-dual interior-point solve (HKM direction,
/// infeasible start). Deterministic given the problem. Never throws on a
/// well-formed problem; outcome is carried in the status.
SdpSolution solve(const SdpProblem& problem, const SdpOptions& options = {});

/// [[Re H, -Im H],[Im H, Re H]]: H >= 0 iff the embedding is, and
/// Tr{H X} = 0.5 Tr{embed(H) embed(X)} for Hermitian pairs.
RMatrix hermitian_embed(const CMatrix& h);

/// Recovers the Hermitian matrix from a (J-averaged) real embedding solution.
CMatrix hermitian_unembed(const RMatrix& x);

/// Dominant eigenpair; the eigenvector is phase-normalized so its last entry is
/// real nonnegative (falling back to the largest-magnitude entry as anchor).
std::pair<double, CVector> principal_eigvec(const CMatrix& h);

/// Plain-text problem round-trip for solver regression tests
/// (format documented in docs/sdp_problem_format.md).
void dump_problem(const SdpProblem& problem, std::ostream& os);
SdpProblem load_problem(std::istream& is);

}  // namespace dmabeam

#endif  // DMABEAM_SDP_HPP
