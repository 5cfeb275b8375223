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

#include "dmabeam/scenario.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace dmabeam {

void PanelConfig::validate() const {
    std::ostringstream err;
    if (n_rf < 1) err << "n_rf must be >= 1; ";
    if (n_e < 1) err << "n_e must be >= 1; ";
    if (!(d_e > 0.0)) err << "d_e must be > 0; ";
    if (!(d_rf > 0.0)) err << "d_rf must be > 0; ";
    if (!(wavelength > 0.0)) err << "wavelength must be > 0; ";
    if (waveguide_alpha < 0.0) err << "waveguide_alpha must be >= 0; ";
    if (!err.str().empty()) throw std::invalid_argument("PanelConfig: " + err.str());
}

void SphericalPoint::validate() const {
    if (!(r > 0.0)) throw std::invalid_argument("SphericalPoint: r must be > 0");
    if (!(theta > 0.0 && theta < kPi))
        throw std::invalid_argument("SphericalPoint: theta must be in (0, pi)");
    if (!(phi > -kPi && phi <= kPi))
        throw std::invalid_argument("SphericalPoint: phi must be in (-pi, pi]");
}

void ScenarioConfig::validate() const {
    panel.validate();
    for (const auto& t : targets) t.validate();
    for (const auto& a : aoi) a.validate();
    std::ostringstream err;
    if (num_ues > num_targets()) err << "num_ues exceeds target count; ";
    if (num_ues < 0) err << "num_ues must be >= 0; ";
    if (aoi.empty()) err << "aoi must contain at least one point; ";
    if (!(noise_var > 0.0)) err << "noise_var must be > 0; ";
    if (!(p_max > 0.0)) err << "p_max must be > 0; ";
    if (static_cast<int>(snr_thresholds.size()) != num_ues)
        err << "snr_thresholds must have one entry per UE; ";
    for (double g : snr_thresholds)
        if (!(g > 0.0)) err << "snr thresholds must be > 0; ";
    if (num_symbols < 1) err << "num_symbols must be >= 1; ";
    if (reflection_model == ReflectionModel::explicit_list &&
        static_cast<int>(reflection_coeffs.size()) != num_targets())
        err << "explicit reflection_coeffs must have one entry per target; ";
    if (!err.str().empty()) throw std::invalid_argument("ScenarioConfig: " + err.str());
}

Vec3 element_position(const PanelConfig& panel, int i, int n) {
    if (i < 1 || i > panel.n_rf)
        throw std::out_of_range("element_position: microstrip index out of range");
    if (n < 1 || n > panel.n_e)
        throw std::out_of_range("element_position: element index out of range");
    return Vec3((n - 1) * panel.d_e, 0.0, (i - 1) * panel.d_rf);
}

Vec3 spherical_to_cartesian(const SphericalPoint& p) {
    const double st = std::sin(p.theta), ct = std::cos(p.theta);
    const double cp = std::cos(p.phi), sp = std::sin(p.phi);
    return Vec3(p.r * st * cp, p.r * st * sp, p.r * ct);
}

SphericalPoint cartesian_to_spherical(const Vec3& v) {
    SphericalPoint p;
    p.r = v.norm();
    p.theta = std::acos(v.z() / p.r);
    p.phi = std::atan2(v.y(), v.x());
    return p;
}

double intra_strip_location(const PanelConfig& panel, int n) {
    if (n < 1 || n > panel.n_e)
        throw std::out_of_range("intra_strip_location: element index out of range");
    return (n - 1) * panel.d_e;
}

double radiation_profile(double theta, double exponent) {
    if (exponent == 0.0) return 1.0;
    const double c = std::cos(theta);
    if (c <= 0.0) return 0.0;  // no radiation behind the panel plane
    return 2.0 * (exponent + 1.0) * std::pow(c, exponent);
}

std::vector<SphericalPoint> make_aoi_diagonal(int count, double theta, double phi0, double phi1,
                                              double r0, double r1) {
    std::vector<SphericalPoint> pts;
    pts.reserve(count);
    for (int a = 0; a < count; ++a) {
        const double t = (count == 1) ? 0.0 : static_cast<double>(a) / (count - 1);
        pts.push_back({r0 + t * (r1 - r0), theta, phi0 + t * (phi1 - phi0)});
    }
    return pts;
}

std::vector<SphericalPoint> make_aoi_grid(int count_phi, int count_r, double theta, double phi0,
                                          double phi1, double r0, double r1) {
    std::vector<SphericalPoint> pts;
    pts.reserve(static_cast<size_t>(count_phi) * count_r);
    for (int ir = 0; ir < count_r; ++ir) {
        const double tr = (count_r == 1) ? 0.0 : static_cast<double>(ir) / (count_r - 1);
        for (int ip = 0; ip < count_phi; ++ip) {
            const double tp = (count_phi == 1) ? 0.0 : static_cast<double>(ip) / (count_phi - 1);
            pts.push_back({r0 + tr * (r1 - r0), theta, phi0 + tp * (phi1 - phi0)});
        }
    }
    return pts;
}

void populate_reflection_coeffs(ScenarioConfig& sc) {
    if (sc.reflection_model == ReflectionModel::explicit_list) return;
    const int k_total = sc.num_targets();
    sc.reflection_coeffs.assign(k_total, Complex{1.0, 0.0});
    if (sc.reflection_model == ReflectionModel::unit) return;
    // Attenuated reflections: magnitude lambda / (4 pi r_k), deterministic seeded phase.
    std::mt19937_64 rng(sc.reflection_seed);
    std::uniform_real_distribution<double> uni(-kPi, kPi);
    for (int k = 0; k < k_total; ++k) {
        const double mag = sc.panel.wavelength / (4.0 * kPi * sc.targets[k].r);
        const double phase = uni(rng);
        sc.reflection_coeffs[k] = std::polar(mag, phase);
    }
}

ScenarioConfig default_scenario() {
    ScenarioConfig sc;
    sc.panel.carrier_freq = 20e9;
    sc.panel.wavelength = kSpeedOfLight / sc.panel.carrier_freq;
    sc.panel.n_rf = 8;
    sc.panel.n_e = 64;
    sc.panel.d_rf = sc.panel.wavelength / 2.0;
    sc.panel.d_e = sc.panel.wavelength / 5.0;
    sc.panel.waveguide_alpha = 0.0;
    sc.panel.waveguide_beta = 2.0 * kPi / sc.panel.wavelength;

    const double th = deg_to_rad(30.0);
    sc.targets = {
        {2.8, th, deg_to_rad(20.0)},   // UE 1
        {4.5, th, deg_to_rad(65.0)},   // UE 2
        {3.5, th, deg_to_rad(45.0)},   // passive
        {6.5, th, deg_to_rad(30.0)},   // passive
        {8.5, th, deg_to_rad(55.0)},   // passive
    };
    sc.num_ues = 2;
    sc.aoi = make_aoi_diagonal(8, th, deg_to_rad(10.0), deg_to_rad(80.0), 2.0, 10.0);
    sc.noise_var = dbm_to_watt(-100.0);
    sc.p_max = dbm_to_watt(0.0);
    sc.snr_thresholds = {db_to_linear(30.0), db_to_linear(30.0)};
    sc.num_symbols = 100;
    sc.radiation_exponent = 0.0;
    sc.reflection_model = ReflectionModel::attenuated;
    sc.reflection_seed = 1u;
    populate_reflection_coeffs(sc);
    return sc;
}

ScenarioConfig reduced_scenario() {
    ScenarioConfig sc;
    sc.panel.carrier_freq = 20e9;
    sc.panel.wavelength = kSpeedOfLight / sc.panel.carrier_freq;
    // 11 cm strip aperture at half-wavelength spacing keeps the 0.5-1.5 m test
    // region inside the Fresnel zone, so range stays observable. Eight strips
    // keep the joint AoI FIM full rank (2 N_RF >= 3 |A|) and leave MUSIC a
    // five-dimensional noise subspace for K = 3.
    sc.panel.n_rf = 8;
    sc.panel.n_e = 16;
    sc.panel.d_rf = sc.panel.wavelength / 2.0;
    sc.panel.d_e = sc.panel.wavelength / 2.0;
    sc.panel.waveguide_alpha = 0.0;
    sc.panel.waveguide_beta = 2.0 * kPi / sc.panel.wavelength;

    const double th = deg_to_rad(30.0);
    // 2 x 2 grid sampling of the surveillance fan: beams tile a genuine area,
    // which keeps the effective responses of separated targets independent
    // (a diagonal-curve AoI makes on-curve targets nearly coplanar after
    // combining). Targets sit inside the tiled region.
    sc.targets = {
        {0.72, th, deg_to_rad(27.0)},  // UE 1
        {1.25, th, deg_to_rad(62.0)},  // UE 2
        {0.95, th, deg_to_rad(44.0)},  // passive
    };
    sc.num_ues = 2;
    sc.aoi = make_aoi_grid(2, 2, th, deg_to_rad(25.0), deg_to_rad(65.0), 0.7, 1.3);
    // Noise floor set so the weakest UE tops out a few dB above 30 dB at 0 dBm:
    // gamma = 30 dB binds, 10/20 dB stay slack.
    sc.noise_var = dbm_to_watt(-29.0);
    sc.p_max = dbm_to_watt(0.0);
    sc.snr_thresholds = {db_to_linear(20.0), db_to_linear(20.0)};
    sc.num_symbols = 100;
    sc.radiation_exponent = 0.0;
    sc.reflection_model = ReflectionModel::explicit_list;
    sc.reflection_seed = 1u;
    // UEs scatter with physically attenuated coefficients; the passive target is a
    // strong reflector so the localization pipeline can see it.
    {
        std::mt19937_64 rng(sc.reflection_seed);
        std::uniform_real_distribution<double> uni(-kPi, kPi);
        sc.reflection_coeffs.clear();
        for (int k = 0; k < 2; ++k) {
            const double mag = sc.panel.wavelength / (4.0 * kPi * sc.targets[k].r);
            sc.reflection_coeffs.push_back(std::polar(mag, uni(rng)));
        }
        sc.reflection_coeffs.push_back(std::polar(0.2, uni(rng)));
    }
    return sc;
}

}  // namespace dmabeam
