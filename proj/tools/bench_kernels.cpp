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

// Times the OpenMP kernels against their serial reference implementations.

#include <chrono>
#include <cstdio>

#include <omp.h>

#include "dmabeam/reference.hpp"

using namespace dmabeam;

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LorentzianWeights ramp_weights(const PanelConfig& panel) {
    LorentzianWeights w;
    w.phases.resize(panel.n_rf, panel.n_e);
    for (int i = 0; i < panel.n_rf; ++i)
        for (int n = 0; n < panel.n_e; ++n)
            w.phases(i, n) = -kPi / 2.0 + kPi * n / std::max(1, panel.n_e - 1);
    return w;
}

}  // namespace

int main() {
    ScenarioConfig sc = default_scenario();
    const auto p_rx = build_propagation_matrix(sc.panel);
    const LorentzianWeights weights = ramp_weights(sc.panel);
    const CMatrix w = weights.assembled();
    const auto q_rx = BlockDiagHermitian::from_combiner(w, sc.panel.n_rf, sc.panel.n_e);

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-22s %12s %12s %9s %12s\n", "kernel", "reference [s]", "parallel [s]",
                "speedup", "max |diff|");

    {
        const ParamVector params = aoi_params(sc);
        auto t0 = std::chrono::steady_clock::now();
        const RMatrix naive = reference::fim_naive(sc, params, q_rx, p_rx);
        const double ts = seconds(t0);
        t0 = std::chrono::steady_clock::now();
        const RMatrix fast = fim(sc, params, q_rx, p_rx).matrix;
        const double tp = seconds(t0);
        std::printf("%-22s %12.3f %12.3f %9.2f %12.3e\n", "fim (aoi)", ts, tp, ts / tp,
                    (naive - fast).cwiseAbs().maxCoeff() / fast.norm());
    }

    GridSpec grid;
    grid.n_r = 60;
    grid.n_phi = 70;
    {
        auto t0 = std::chrono::steady_clock::now();
        const MapResult naive = reference::beampattern_map_naive(sc, weights, grid);
        const double ts = seconds(t0);
        t0 = std::chrono::steady_clock::now();
        const MapResult fast = beampattern_map(sc, weights, grid);
        const double tp = seconds(t0);
        std::printf("%-22s %12.3f %12.3f %9.2f %12.3e\n", "beampattern map", ts, tp, ts / tp,
                    (naive.values - fast.values).cwiseAbs().maxCoeff());
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        const MapResult naive = reference::peb_map_naive(sc, weights, grid);
        const double ts = seconds(t0);
        t0 = std::chrono::steady_clock::now();
        const MapResult fast = peb_map(sc, weights, grid);
        const double tp = seconds(t0);
        RMatrix diff = (naive.values - fast.values).cwiseAbs();
        for (int i = 0; i < diff.size(); ++i)
            if (!std::isfinite(diff(i))) diff(i) = 0.0;  // matching +inf cells
        std::printf("%-22s %12.3f %12.3f %9.2f %12.3e\n", "peb map", ts, tp, ts / tp,
                    diff.maxCoeff());
    }
    {
        const auto channels = build_channels(sc);
        const CMatrix y = synthesize_rx_signal(sc, w, p_rx, channels, {}, 9);
        const MusicContext ctx =
            build_music_context(sc.panel, sc.radiation_exponent, w, p_rx, grid);
        auto t0 = std::chrono::steady_clock::now();
        const MusicGrid naive =
            reference::music_spectrum_naive(y, sc, w, p_rx, grid, sc.num_targets());
        const double ts = seconds(t0);
        t0 = std::chrono::steady_clock::now();
        const MusicGrid fast = music_spectrum(y, ctx, sc.num_targets());
        const double tp = seconds(t0);
        std::printf("%-22s %12.3f %12.3f %9.2f %12.3e\n", "music spectrum", ts, tp, ts / tp,
                    (naive.spectrum - fast.spectrum).cwiseAbs().maxCoeff() /
                        fast.spectrum.maxCoeff());
    }
    return 0;
}
