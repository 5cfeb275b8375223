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

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dmabeam/io.hpp"

using namespace dmabeam;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("scenario json round trip reproduces the built-in scenarios") {
    for (const ScenarioConfig& original : {default_scenario(), reduced_scenario()}) {
        const auto parsed = scenario_from_json(scenario_to_json(original));
        REQUIRE_MESSAGE(parsed.ok(), [&] {
            std::string all;
            for (const auto& e : parsed.errors) all += e + "; ";
            return all;
        }());
        const ScenarioConfig& sc = *parsed.config;
        CHECK(sc.panel.n_rf == original.panel.n_rf);
        CHECK(sc.panel.n_e == original.panel.n_e);
        CHECK(sc.panel.d_e == doctest::Approx(original.panel.d_e).epsilon(1e-14));
        CHECK(sc.panel.wavelength == doctest::Approx(original.panel.wavelength).epsilon(1e-14));
        CHECK(sc.noise_var == doctest::Approx(original.noise_var).epsilon(1e-12));
        CHECK(sc.p_max == doctest::Approx(original.p_max).epsilon(1e-12));
        REQUIRE(sc.targets.size() == original.targets.size());
        for (size_t k = 0; k < sc.targets.size(); ++k) {
            CHECK(sc.targets[k].r == doctest::Approx(original.targets[k].r).epsilon(1e-12));
            CHECK(sc.targets[k].theta ==
                  doctest::Approx(original.targets[k].theta).epsilon(1e-12));
            CHECK(sc.targets[k].phi == doctest::Approx(original.targets[k].phi).epsilon(1e-12));
        }
        REQUIRE(sc.snr_thresholds.size() == original.snr_thresholds.size());
        for (size_t u = 0; u < sc.snr_thresholds.size(); ++u)
            CHECK(sc.snr_thresholds[u] ==
                  doctest::Approx(original.snr_thresholds[u]).epsilon(1e-12));
        REQUIRE(sc.reflection_coeffs.size() == original.reflection_coeffs.size());
        for (size_t k = 0; k < sc.reflection_coeffs.size(); ++k)
            CHECK(std::abs(sc.reflection_coeffs[k] - original.reflection_coeffs[k]) < 1e-15);
    }
}

TEST_CASE("file units convert: dB, dBm and degrees") {
    nlohmann::json j = scenario_to_json(reduced_scenario());
    j["snr_thresholds"] = {30.0, 30.0};
    j["noise_var"] = -100.0;
    const auto parsed = scenario_from_json(j);
    REQUIRE(parsed.ok());
    CHECK(parsed.config->snr_thresholds[0] == doctest::Approx(1000.0).epsilon(1e-12));
    CHECK(parsed.config->noise_var == doctest::Approx(1e-13).epsilon(1e-12));
    CHECK(parsed.config->targets[0].theta == doctest::Approx(deg_to_rad(30.0)).epsilon(1e-12));
}

TEST_CASE("config validation reports every offending key") {
    nlohmann::json j = scenario_to_json(reduced_scenario());
    j["targets"][1]["r"] = -2.0;
    j["num_symbols"] = 0;
    j.erase("p_max");
    const auto parsed = scenario_from_json(j);
    CHECK_FALSE(parsed.ok());
    CHECK(parsed.errors.size() >= 3);
    bool names_target = false, names_symbols = false, names_pmax = false;
    for (const auto& e : parsed.errors) {
        names_target = names_target || e.find("targets[1]") != std::string::npos;
        names_symbols = names_symbols || e.find("num_symbols") != std::string::npos;
        names_pmax = names_pmax || e.find("p_max") != std::string::npos;
    }
    CHECK(names_target);
    CHECK(names_symbols);
    CHECK(names_pmax);
}

TEST_CASE("validate_config surfaces file-level problems") {
    const auto missing = validate_config("/nonexistent/scenario.json");
    CHECK_FALSE(missing.ok());

    const std::string path = "/tmp/dmabeam_bad.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    const auto bad = validate_config(path);
    CHECK_FALSE(bad.ok());
    std::remove(path.c_str());
}

TEST_CASE("format_double round-trips doubles exactly") {
    for (double v : {1.0 / 3.0, 1e-13, 12345.6789e37, -0.0, 2.2250738585072014e-308}) {
        const double back = std::strtod(format_double(v).c_str(), nullptr);
        CHECK(back == v);
    }
}

TEST_CASE("csv writers are byte-deterministic") {
    RmseTable table;
    table.rows = {{-10.0, 0.51234567890123456, 0.001234, 0},
                  {0.0, 0.1, 0.00012, 1}};
    const std::string p1 = "/tmp/dmabeam_rmse_a.csv", p2 = "/tmp/dmabeam_rmse_b.csv";
    write_rmse_csv(p1, table);
    write_rmse_csv(p2, table);
    CHECK(slurp(p1) == slurp(p2));
    const std::string content = slurp(p1);
    CHECK(content.rfind("power_dbm,rmse_m,peb\n", 0) == 0);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("map csv writes the matrix plus an axes sidecar") {
    MapResult map;
    map.r_axis = RVector::LinSpaced(3, 1.0, 2.0);
    map.phi_axis = RVector::LinSpaced(4, 0.1, 0.4);
    map.theta = deg_to_rad(30.0);
    map.values = RMatrix::Ones(3, 4);
    write_map_csv("/tmp/dmabeam_map", map);
    CHECK(std::filesystem::exists("/tmp/dmabeam_map.csv"));
    CHECK(std::filesystem::exists("/tmp/dmabeam_map_axes.csv"));
    const std::string axes = slurp("/tmp/dmabeam_map_axes.csv");
    CHECK(axes.rfind("r_m,phi_deg,theta_deg\n", 0) == 0);
    std::remove("/tmp/dmabeam_map.csv");
    std::remove("/tmp/dmabeam_map_axes.csv");
}

TEST_CASE("design result serializes with audit and solver sections") {
    DesignResult result;
    result.method = DesignMethod::p2;
    result.weights.phases = RMatrix::Zero(2, 3);
    result.audit.achieved_snr_db = {21.0, 20.5};
    result.solver.status = SdpStatus::optimal;
    const auto j = design_result_to_json(result);
    CHECK(j["method"] == "p2");
    CHECK(j["audit"]["achieved_snr_db"].size() == 2);
    CHECK(j["solver"]["status"] == "optimal");
    CHECK(j["phases_rad"].size() == 2);
}
