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

#include "dmabeam/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dmabeam {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// Collects per-key messages instead of stopping at the first problem.
struct ErrorList {
    std::vector<std::string>& errors;
    void add(const std::string& key, const std::string& what) {
        errors.push_back(key + ": " + what);
    }
};

double get_num(const json& j, const std::string& key, double fallback, ErrorList& err,
               bool required) {
    if (!j.contains(key)) {
        if (required) err.add(key, "missing required key");
        return fallback;
    }
    if (!j[key].is_number()) {
        err.add(key, "expected a number");
        return fallback;
    }
    return j[key].get<double>();
}

std::vector<SphericalPoint> get_points(const json& j, const std::string& key, ErrorList& err) {
    std::vector<SphericalPoint> pts;
    if (!j.contains(key)) {
        err.add(key, "missing required key");
        return pts;
    }
    if (!j[key].is_array()) {
        err.add(key, "expected an array of {r, theta, phi} objects");
        return pts;
    }
    int idx = 0;
    for (const auto& e : j[key]) {
        const std::string where = key + "[" + std::to_string(idx) + "]";
        SphericalPoint p;
        if (!e.is_object()) {
            err.add(where, "expected an object with r, theta, phi");
        } else {
            p.r = get_num(e, "r", 0.0, err, true);
            p.theta = deg_to_rad(get_num(e, "theta", 0.0, err, true));
            p.phi = deg_to_rad(get_num(e, "phi", 0.0, err, true));
            if (!(p.r > 0.0)) err.add(where + ".r", "must be > 0 meters");
            if (!(p.theta > 0.0 && p.theta < kPi))
                err.add(where + ".theta", "must lie in (0, 180) degrees");
            if (!(p.phi > -kPi && p.phi <= kPi))
                err.add(where + ".phi", "must lie in (-180, 180] degrees");
        }
        pts.push_back(p);
        ++idx;
    }
    return pts;
}

}  // namespace

ConfigResult scenario_from_json(const json& j) {
    ConfigResult result;
    ErrorList err{result.errors};
    ScenarioConfig sc;

    if (!j.contains("panel") || !j["panel"].is_object()) {
        err.add("panel", "missing required object");
    } else {
        const json& p = j["panel"];
        sc.panel.n_rf = static_cast<int>(get_num(p, "n_rf", 1, err, true));
        sc.panel.n_e = static_cast<int>(get_num(p, "n_e", 1, err, true));
        sc.panel.carrier_freq = get_num(p, "carrier_freq", 0.0, err, true);
        if (sc.panel.carrier_freq > 0.0)
            sc.panel.wavelength = kSpeedOfLight / sc.panel.carrier_freq;
        else
            err.add("panel.carrier_freq", "must be > 0 Hz");
        sc.panel.d_e = get_num(p, "d_e", 0.0, err, true);
        sc.panel.d_rf = get_num(p, "d_rf", 0.0, err, true);
        sc.panel.waveguide_alpha = get_num(p, "waveguide_alpha", 0.0, err, false);
        sc.panel.waveguide_beta =
            get_num(p, "waveguide_beta",
                    sc.panel.wavelength > 0.0 ? 2.0 * kPi / sc.panel.wavelength : 0.0, err,
                    false);
        if (sc.panel.n_rf < 1) err.add("panel.n_rf", "must be >= 1");
        if (sc.panel.n_e < 1) err.add("panel.n_e", "must be >= 1");
        if (!(sc.panel.d_e > 0.0)) err.add("panel.d_e", "must be > 0 meters");
        if (!(sc.panel.d_rf > 0.0)) err.add("panel.d_rf", "must be > 0 meters");
    }

    sc.targets = get_points(j, "targets", err);
    sc.aoi = get_points(j, "aoi", err);
    sc.num_ues = static_cast<int>(get_num(j, "num_ues", 0, err, true));
    if (sc.num_ues < 0) err.add("num_ues", "must be >= 0");
    if (sc.num_ues > static_cast<int>(sc.targets.size()))
        err.add("num_ues", "exceeds the target count");

    const double noise_dbm = get_num(j, "noise_var", 0.0, err, true);
    sc.noise_var = dbm_to_watt(noise_dbm);
    const double p_max_dbm = get_num(j, "p_max", 0.0, err, true);
    sc.p_max = dbm_to_watt(p_max_dbm);

    if (j.contains("snr_thresholds")) {
        if (!j["snr_thresholds"].is_array()) {
            err.add("snr_thresholds", "expected an array of dB values");
        } else {
            for (const auto& g : j["snr_thresholds"]) {
                if (!g.is_number())
                    err.add("snr_thresholds", "entries must be numbers (dB)");
                else
                    sc.snr_thresholds.push_back(db_to_linear(g.get<double>()));
            }
        }
    } else if (sc.num_ues > 0) {
        err.add("snr_thresholds", "missing required key");
    }
    if (static_cast<int>(sc.snr_thresholds.size()) != sc.num_ues)
        err.add("snr_thresholds", "must have exactly one entry per UE");

    sc.num_symbols = static_cast<int>(get_num(j, "num_symbols", 1, err, true));
    if (sc.num_symbols < 1) err.add("num_symbols", "must be >= 1");
    sc.radiation_exponent = get_num(j, "radiation_exponent", 0.0, err, false);
    sc.reflection_seed =
        static_cast<unsigned>(get_num(j, "reflection_seed", 1.0, err, false));

    std::string model = j.value("reflection_model", std::string("attenuated"));
    if (model == "attenuated")
        sc.reflection_model = ReflectionModel::attenuated;
    else if (model == "unit")
        sc.reflection_model = ReflectionModel::unit;
    else if (model == "explicit")
        sc.reflection_model = ReflectionModel::explicit_list;
    else
        err.add("reflection_model", "expected attenuated | unit | explicit");

    if (j.contains("reflection_coeffs")) {
        if (!j["reflection_coeffs"].is_array()) {
            err.add("reflection_coeffs", "expected an array of [re, im] pairs");
        } else {
            for (const auto& e : j["reflection_coeffs"]) {
                if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                    sc.reflection_coeffs.emplace_back(e[0].get<double>(), e[1].get<double>());
                else
                    err.add("reflection_coeffs", "entries must be [re, im] number pairs");
            }
        }
    }
    if (sc.reflection_model == ReflectionModel::explicit_list &&
        sc.reflection_coeffs.size() != sc.targets.size())
        err.add("reflection_coeffs", "explicit model needs one [re, im] pair per target");
    if (sc.reflection_model != ReflectionModel::explicit_list) populate_reflection_coeffs(sc);

    if (!(sc.noise_var > 0.0)) err.add("noise_var", "dBm value produced a non-positive power");
    if (!(sc.p_max > 0.0)) err.add("p_max", "dBm value produced a non-positive power");
    for (size_t u = 0; u < sc.snr_thresholds.size(); ++u)
        if (!(sc.snr_thresholds[u] > 0.0))
            err.add("snr_thresholds[" + std::to_string(u) + "]", "must convert to > 0 linear");
    if (sc.aoi.empty()) err.add("aoi", "must contain at least one point");

    if (result.errors.empty()) result.config = std::move(sc);
    return result;
}

ConfigResult validate_config(const std::string& path) {
    ConfigResult result;
    std::ifstream in(path);
    if (!in) {
        result.errors.push_back(path + ": cannot open file");
        return result;
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        result.errors.push_back(path + ": invalid JSON");
        return result;
    }
    return scenario_from_json(j);
}

nlohmann::json scenario_to_json(const ScenarioConfig& sc) {
    json j;
    j["panel"] = {{"n_rf", sc.panel.n_rf},
                  {"n_e", sc.panel.n_e},
                  {"d_e", sc.panel.d_e},
                  {"d_rf", sc.panel.d_rf},
                  {"carrier_freq", sc.panel.carrier_freq},
                  {"waveguide_alpha", sc.panel.waveguide_alpha},
                  {"waveguide_beta", sc.panel.waveguide_beta}};
    auto points = [](const std::vector<SphericalPoint>& pts) {
        json arr = json::array();
        for (const auto& p : pts)
            arr.push_back(
                {{"r", p.r}, {"theta", rad_to_deg(p.theta)}, {"phi", rad_to_deg(p.phi)}});
        return arr;
    };
    j["targets"] = points(sc.targets);
    j["aoi"] = points(sc.aoi);
    j["num_ues"] = sc.num_ues;
    j["noise_var"] = watt_to_dbm(sc.noise_var);
    j["p_max"] = watt_to_dbm(sc.p_max);
    json gammas = json::array();
    for (double g : sc.snr_thresholds) gammas.push_back(linear_to_db(g));
    j["snr_thresholds"] = gammas;
    j["num_symbols"] = sc.num_symbols;
    j["radiation_exponent"] = sc.radiation_exponent;
    switch (sc.reflection_model) {
        case ReflectionModel::attenuated: j["reflection_model"] = "attenuated"; break;
        case ReflectionModel::unit: j["reflection_model"] = "unit"; break;
        default: j["reflection_model"] = "explicit"; break;
    }
    j["reflection_seed"] = sc.reflection_seed;
    json betas = json::array();
    for (const auto& b : sc.reflection_coeffs) betas.push_back({b.real(), b.imag()});
    j["reflection_coeffs"] = betas;
    return j;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    for (size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << '\n';
    }
}

void write_map_csv(const std::string& base_path, const MapResult& map) {
    {
        std::ofstream out(base_path + ".csv");
        if (!out) throw std::runtime_error("write_map_csv: cannot open " + base_path);
        for (int ir = 0; ir < map.values.rows(); ++ir) {
            for (int ip = 0; ip < map.values.cols(); ++ip)
                out << (ip ? "," : "") << format_double(map.values(ir, ip));
            out << '\n';
        }
    }
    std::vector<std::vector<std::string>> rows;
    const Eigen::Index count = std::max(map.r_axis.size(), map.phi_axis.size());
    for (Eigen::Index k = 0; k < count; ++k) {
        std::vector<std::string> row(3);
        row[0] = k < map.r_axis.size() ? format_double(map.r_axis(k)) : "";
        row[1] = k < map.phi_axis.size() ? format_double(rad_to_deg(map.phi_axis(k))) : "";
        row[2] = k == 0 ? format_double(rad_to_deg(map.theta)) : "";
        rows.push_back(std::move(row));
    }
    write_csv(base_path + "_axes.csv", {"r_m", "phi_deg", "theta_deg"}, rows);
}

void write_rmse_csv(const std::string& path, const RmseTable& table) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table.rows)
        rows.push_back({format_double(r.power_dbm), format_double(r.rmse_m),
                        format_double(r.peb_m)});
    write_csv(path, {"power_dbm", "rmse_m", "peb"}, rows);
}

void write_snr_sweep_csv(const std::string& path, const SnrSweepTable& table) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table.rows)
        rows.push_back({format_double(r.gamma_db), format_double(r.peb),
                        format_double(r.peb_audited), r.status});
    write_csv(path, {"gamma_db", "peb", "peb_audited", "status"}, rows);
}

void write_channels_csv(const std::string& path, const ChannelSet& channels) {
    std::vector<std::vector<std::string>> rows;
    for (size_t u = 0; u < channels.h_total.size(); ++u)
        for (Eigen::Index n = 0; n < channels.h_total[u].size(); ++n)
            rows.push_back({std::to_string(u), std::to_string(n),
                            format_double(channels.h_total[u](n).real()),
                            format_double(channels.h_total[u](n).imag())});
    write_csv(path, {"ue", "element", "real", "imag"}, rows);
}

void write_fim_csv(const std::string& path, const RMatrix& matrix) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_fim_csv: cannot open " + path);
    for (int i = 0; i < matrix.rows(); ++i) {
        for (int j = 0; j < matrix.cols(); ++j)
            out << (j ? "," : "") << format_double(matrix(i, j));
        out << '\n';
    }
}

void write_phases_csv(const std::string& path, const LorentzianWeights& weights) {
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < weights.n_rf(); ++i)
        for (int n = 0; n < weights.n_e(); ++n)
            rows.push_back({std::to_string(i + 1), std::to_string(n + 1),
                            format_double(weights.phases(i, n))});
    write_csv(path, {"microstrip", "element", "phi_rad"}, rows);
}

nlohmann::json design_result_to_json(const DesignResult& result) {
    json j;
    j["method"] = to_string(result.method);
    j["feasible"] = result.feasible;
    j["wall_time_s"] = result.wall_time_s;
    json phases = json::array();
    for (int i = 0; i < result.weights.n_rf(); ++i) {
        json row = json::array();
        for (int n = 0; n < result.weights.n_e(); ++n) row.push_back(result.weights.phases(i, n));
        phases.push_back(row);
    }
    j["phases_rad"] = phases;
    j["audit"] = {{"achieved_snr_db", result.audit.achieved_snr_db},
                  {"shortfall_db", result.audit.shortfall_db},
                  {"peb_aoi", result.audit.peb_aoi},
                  {"peb_aoi_m", result.audit.peb_aoi_m},
                  {"fim_singular", result.audit.fim_singular},
                  {"flags", result.audit.flags}};
    j["solver"] = {{"status", to_string(result.solver.status)},
                   {"iterations", result.solver.iterations},
                   {"primal_residual", result.solver.primal_residual},
                   {"dual_residual", result.solver.dual_residual},
                   {"duality_gap", result.solver.duality_gap},
                   {"relaxed_objective", result.solver.relaxed_objective},
                   {"rank_one_ratios", result.solver.rank_one_ratios},
                   {"lift_reproduction_error", result.solver.lift_reproduction_error},
                   {"message", result.solver.message}};
    return j;
}

nlohmann::json complexity_report_to_json(const ComplexityReport& report) {
    return json{{"n_p1", report.n_p1},
                {"c_p1", report.c_p1},
                {"n_p2", report.n_p2},
                {"c_p2", report.c_p2},
                {"cfs_svd_count", report.cfs_svd_count},
                {"p1_flop_proxy", report.p1_flop_proxy},
                {"p2_flop_proxy", report.p2_flop_proxy}};
}

}  // namespace dmabeam
