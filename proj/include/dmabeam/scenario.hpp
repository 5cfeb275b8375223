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

#ifndef DMABEAM_SCENARIO_HPP
#define DMABEAM_SCENARIO_HPP

#include <cstddef>
#include <vector>

#include "dmabeam/types.hpp"

namespace dmabeam {

/// Metasurface panel geometry and waveguide parameters. The panel sits in the
/// xz-plane: microstrips run along x, stacked along z, element (1,1) at the origin.
struct PanelConfig {
    int n_rf = 1;                 // microstrips (one RX RF chain each)
    int n_e = 1;                  // metamaterials per microstrip
    double d_e = 0.0;             // intra-microstrip element spacing [m]
    double d_rf = 0.0;            // microstrip spacing [m]
    double carrier_freq = 0.0;    // [Hz]
    double wavelength = 0.0;      // [m], c / carrier_freq
    double waveguide_alpha = 0.0; // attenuation coefficient [1/m], uniform
    double waveguide_beta = 0.0;  // wavenumber [rad/m], uniform

    int total_elements() const { return n_rf * n_e; }
    void validate() const;  // throws std::invalid_argument on bad fields
};

/// Point in spherical coordinates, physics convention: theta measured from +z.
struct SphericalPoint {
    double r = 0.0;      // range from origin [m]
    double theta = 0.0;  // elevation [rad], (0, pi)
    double phi = 0.0;    // azimuth [rad], (-pi, pi]

    void validate() const;
};

enum class ReflectionModel {
    attenuated,  // |beta_k| = lambda / (4 pi r_k), seeded pseudo-random phase
    unit,        // beta_k = 1 (debugging)
    explicit_list,
};

enum class AoiSampling { diagonal, grid };

struct ScenarioConfig {
    PanelConfig panel;
    std::vector<SphericalPoint> targets;  // K points; the first num_ues are UEs
    int num_ues = 0;
    std::vector<Complex> reflection_coeffs;  // K entries, used when k scatters into another UE's channel
    std::vector<SphericalPoint> aoi;         // discretized Area of Interest
    double noise_var = 0.0;                  // sigma^2 [W]
    double p_max = 0.0;                      // max UE transmit power [W]
    std::vector<double> snr_thresholds;      // gamma_u [linear], num_ues entries
    int num_symbols = 1;                     // T
    double radiation_exponent = 0.0;         // b in F(theta) = 2(b+1) cos^b(theta); b = 0 means F = 1
    ReflectionModel reflection_model = ReflectionModel::attenuated;
    unsigned reflection_seed = 1u;           // phase seed for the attenuated model

    int num_targets() const { return static_cast<int>(targets.size()); }
    void validate() const;
};

/// Cartesian position of metamaterial (i, n), 1-based indices.
Vec3 element_position(const PanelConfig& panel, int i, int n);

Vec3 spherical_to_cartesian(const SphericalPoint& p);

/// Inverse of spherical_to_cartesian (theta away from the poles).
SphericalPoint cartesian_to_spherical(const Vec3& v);

/// Location rho_{i,n} of element n along its microstrip waveguide [m].
double intra_strip_location(const PanelConfig& panel, int n);

/// Radiation profile F(theta). b = 0 is isotropic (F = 1).
double radiation_profile(double theta, double exponent);

/// AoI points on the joint (phi, r) diagonal from (phi0, r0) to (phi1, r1) at fixed theta.
std::vector<SphericalPoint> make_aoi_diagonal(int count, double theta, double phi0, double phi1,
                                              double r0, double r1);

/// AoI points on a phi x r grid at fixed theta (count_phi * count_r points).
std::vector<SphericalPoint> make_aoi_grid(int count_phi, int count_r, double theta, double phi0,
                                          double phi1, double r0, double r1);

/// Fill reflection_coeffs from the scenario's reflection model (no-op for explicit_list).
void populate_reflection_coeffs(ScenarioConfig& sc);

/// The full-scale evaluation setup: 20 GHz, N_RF = 8 x N_E = 64, K = 5 (U = 2),
/// sigma^2 = -100 dBm, gamma_u = 30 dB, 8 diagonal AoI points at theta = 30 deg.
ScenarioConfig default_scenario();

/// Small instance for CI and quick experiments: N_RF = 4 x N_E = 8, K = 3 (U = 2),
/// 4 AoI points. Noise floor is raised so the 30 dB SNR threshold actually binds.
ScenarioConfig reduced_scenario();

}  // namespace dmabeam

#endif  // DMABEAM_SCENARIO_HPP
