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

#ifndef DMABEAM_REFERENCE_HPP
#define DMABEAM_REFERENCE_HPP

#include "dmabeam/design.hpp"
#include "dmabeam/fisher.hpp"
#include "dmabeam/pipeline.hpp"

// Plain serial implementations written against the dense formulas, kept as
// oracles for the OpenMP kernels and for the benchmark comparison.
namespace dmabeam::reference {

/// Entry-by-entry FIM via the full N x N trace expression, single-threaded.
RMatrix fim_naive(const ScenarioConfig& scenario, const ParamVector& params,
                  const BlockDiagHermitian& q_rx, const PropagationMatrix& p_rx);

/// MUSIC spectrum recomputing every steering vector on the fly, single-threaded.
MusicGrid music_spectrum_naive(const CMatrix& y, const ScenarioConfig& scenario,
                               const CMatrix& w_rx, const PropagationMatrix& p_rx,
                               const GridSpec& spec, int k_hat);

/// Serial beampattern map.
MapResult beampattern_map_naive(const ScenarioConfig& scenario,
                                const LorentzianWeights& weights, const GridSpec& spec);

/// Serial PEB map.
MapResult peb_map_naive(const ScenarioConfig& scenario, const LorentzianWeights& weights,
                        const GridSpec& spec);

}  // namespace dmabeam::reference

#endif  // DMABEAM_REFERENCE_HPP
