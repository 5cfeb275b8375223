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

#ifndef DMABEAM_PIPELINE_HPP
#define DMABEAM_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "dmabeam/design.hpp"
#include "dmabeam/fisher.hpp"

namespace dmabeam {

/// Polar (range x azimuth) search grid at a fixed elevation slice.
struct GridSpec {
    int n_r = 120;
    int n_phi = 140;
    double r_min = 1.5;
    double r_max = 12.0;
    double phi_min = deg_to_rad(5.0);
    double phi_max = deg_to_rad(85.0);
    double theta = deg_to_rad(30.0);

    double r_at(int ir) const;
    double phi_at(int ip) const;
    /// Half-diagonal of a cell in Cartesian meters at the given range.
    double cell_floor(double r) const;
};

struct MusicGrid {
    RVector r_axis;
    RVector phi_axis;
    double theta = 0.0;
    RMatrix spectrum;  // n_r x n_phi, finite nonnegative
};

/// Unit-norm effective steering vectors W^H P^H a(g), precomputed per grid cell.
struct MusicContext {
    GridSpec spec;
    CMatrix effective;  // N_RF x (n_r * n_phi), column-normalized
};

MusicContext build_music_context(const PanelConfig& panel, double radiation_exponent,
                                 const CMatrix& w_rx, const PropagationMatrix& p_rx,
                                 const GridSpec& spec);

/// Subspace spectrum 1 / ||E_n^H a_eff(g)||^2 from the sample covariance of Y.
/// Requires N_RF > k_hat.
MusicGrid music_spectrum(const CMatrix& y, const MusicContext& ctx, int k_hat);

struct PeakList {
    std::vector<SphericalPoint> points;          // k_hat entries, NaN-range padding
    std::vector<std::pair<int, int>> cells;      // (ir, ip), (-1,-1) for padding
    bool padded = false;
};

/// k_hat largest strict local maxima over the 8-neighborhood, at least 2 cells
/// apart (Chebyshev); ties break on (range index, azimuth index).
PeakList pick_peaks(const MusicGrid& grid, int k_hat);

/// Grid scan plus continuous peak polish: evaluates the subspace spectrum
/// off-grid around an enlarged candidate set, so narrow nulls of weak-gain
/// targets are not drowned by strong-target sidelobes. Deterministic.
PeakList localize_targets(const CMatrix& y, const MusicContext& ctx, const PanelConfig& panel,
                          double radiation_exponent, const CMatrix& w_rx,
                          const PropagationMatrix& p_rx, int k_hat);

struct RmseRow {
    double power_dbm = 0.0;
    double rmse_m = 0.0;
    double peb_m = 0.0;     // meters-only bound at this power
    int missing_peaks = 0;  // padded estimates across all trials
};

struct RmseTable {
    std::vector<RmseRow> rows;
    double grid_floor_m = 0.0;
    int trials = 0;
};

/// Monte-Carlo localization sweep: per power, fresh-noise trials localized with
/// MUSIC + peak picking, nearest-pair matched to the truth. Deterministic given
/// the seed; trials run in parallel with per-trial derived streams.
RmseTable monte_carlo_rmse(const ScenarioConfig& scenario, const LorentzianWeights& weights,
                           const std::vector<double>& power_sweep_dbm, int trials,
                           unsigned long long seed, const GridSpec& spec);

struct SnrSweepRow {
    double gamma_db = 0.0;
    // The method's own sensing bound: sqrt of the relaxed area CRB for the
    // direct design, sqrt(1 / Tr{I}) for the trace-bound designs. Shrinking the
    // feasible set can only worsen these, so the degradation trend is exact.
    double peb = 0.0;
    double peb_audited = 0.0;  // pointwise area PEB of the final weights
    std::string status;
};

struct SnrSweepTable {
    DesignMethod method;
    std::vector<SnrSweepRow> rows;
};

/// Redesigns the weights per threshold and records each method's sensing bound
/// plus the audited PEB; infeasible points carry +inf.
std::vector<SnrSweepTable> snr_tradeoff_sweep(const ScenarioConfig& scenario,
                                              const std::vector<DesignMethod>& methods,
                                              const std::vector<double>& gamma_sweep_db,
                                              const DesignOptions& options = {});

struct MapResult {
    RVector r_axis;
    RVector phi_axis;
    double theta = 0.0;
    RMatrix values;  // n_r x n_phi
};

/// Normalized gain ||W^H P^H a(g)||^2 / max over the grid.
MapResult beampattern_map(const ScenarioConfig& scenario, const LorentzianWeights& weights,
                          const GridSpec& spec);

/// Single-virtual-target PEB (3x3 FIM) per grid cell under the design's combiner;
/// singular cells record +inf.
MapResult peb_map(const ScenarioConfig& scenario, const LorentzianWeights& weights,
                  const GridSpec& spec);

/// Greedy globally-closest-pair assignment between estimates and truths; returns
/// the matched truth index per estimate (-1 for unmatched/NaN estimates).
std::vector<int> nearest_pair_assignment(const std::vector<Vec3>& estimates,
                                         const std::vector<Vec3>& truths);

}  // namespace dmabeam

#endif  // DMABEAM_PIPELINE_HPP
