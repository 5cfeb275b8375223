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

#ifndef DMABEAM_IO_HPP
#define DMABEAM_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmabeam/channel.hpp"
#include "dmabeam/design.hpp"
#include "dmabeam/pipeline.hpp"
#include "dmabeam/scenario.hpp"

namespace dmabeam {

/// Scenario files use degrees and dBm/dB; everything internal is radians and watts.
struct ConfigResult {
    std::optional<ScenarioConfig> config;
    std::vector<std::string> errors;  // full list, one message per offending key

    bool ok() const { return errors.empty() && config.has_value(); }
};

ConfigResult validate_config(const std::string& path);
ConfigResult scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& sc);  // file-form units

/// "%.17g" so that re-reading reproduces the exact double.
std::string format_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Map matrix as CSV plus an `<base>_axes.csv` sidecar with the grid axes.
void write_map_csv(const std::string& base_path, const MapResult& map);

void write_rmse_csv(const std::string& path, const RmseTable& table);
void write_snr_sweep_csv(const std::string& path, const SnrSweepTable& table);
void write_channels_csv(const std::string& path, const ChannelSet& channels);
void write_fim_csv(const std::string& path, const RMatrix& matrix);
void write_phases_csv(const std::string& path, const LorentzianWeights& weights);

nlohmann::json design_result_to_json(const DesignResult& result);
nlohmann::json complexity_report_to_json(const ComplexityReport& report);

}  // namespace dmabeam

#endif  // DMABEAM_IO_HPP
