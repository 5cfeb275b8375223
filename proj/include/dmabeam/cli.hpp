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

#ifndef DMABEAM_CLI_HPP
#define DMABEAM_CLI_HPP

#include <string>
#include <vector>

#include "dmabeam/design.hpp"

namespace dmabeam {

inline constexpr const char* kOutRootEnv = "DMABEAM_OUT_ROOT";
inline constexpr const char* kProjectVersion = "0.1.0";

struct ExperimentSpec {
    std::string experiment;  // design | rmse-sweep | snr-sweep | beampattern |
                             // peb-map | solver-selftest | complexity-report
    std::string scenario_path;                 // empty: use the tier's built-in scenario
    std::vector<DesignMethod> methods = {DesignMethod::p1, DesignMethod::p2,
                                         DesignMethod::cfs};
    std::string tier = "reduced";              // reduced | full
    std::string out_dir = "results";
    unsigned long long seed = 1;
    int trials = -1;                           // -1: tier default (50 / 500)
    std::vector<double> power_sweep_dbm;       // empty: -20..10 dBm in 5 dB steps
    std::vector<double> gamma_sweep_db;        // empty: 10, 20, 30 dB
    bool dump_channels = false;
    bool strict_codebook = false;
    bool uncorrected_lifting = false;
    bool verbose = false;
};

/// Executes one experiment, writing CSV/JSON artifacts plus a manifest into the
/// (env-overridable) output directory. Returns the process exit status; failures
/// also emit a machine-readable error JSON on stderr.
int run(const ExperimentSpec& spec);

/// Full argv entry point (subcommand parsing via CLI11).
int run_cli(int argc, char** argv);

}  // namespace dmabeam

#endif  // DMABEAM_CLI_HPP
