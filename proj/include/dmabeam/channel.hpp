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

#ifndef DMABEAM_CHANNEL_HPP
#define DMABEAM_CHANNEL_HPP

#include <random>
#include <vector>

#include "dmabeam/scenario.hpp"
#include "dmabeam/types.hpp"

namespace dmabeam {

/// Diagonal of the N x N waveguide propagation matrix, element-major order
/// ((i-1)*N_E + n). Entry = exp(-rho_{i,n} (alpha + j beta)).
struct PropagationMatrix {
    CVector diag;

    /// Applies P^H to a length-N vector (conjugate of the diagonal).
    CVector apply_hermitian(const CVector& v) const { return diag.conjugate().cwiseProduct(v); }
};

struct SteeringVector {
    CVector value;  // length N
};

/// Partial derivatives of a steering vector w.r.t. the source point's (r, theta, phi).
struct SteeringJacobian {
    CVector d_r;
    CVector d_theta;
    CVector d_phi;
};

struct ChannelSet {
    std::vector<CVector> h_los;    // U entries, length N
    std::vector<CVector> h_scat;   // U entries, length N
    std::vector<CVector> h_total;  // h_los + h_scat
};

PropagationMatrix build_propagation_matrix(const PanelConfig& panel);

/// Near-field steering vector: entry (i,n) = sqrt(F(theta_el)) / (4 pi rho) * exp(j 2 pi rho / lambda)
/// with rho the point-to-element distance and theta_el the elevation seen from the element.
/// Throws SingularityError if the point coincides with an element.
SteeringVector steering_vector(const PanelConfig& panel, const SphericalPoint& p,
                               double radiation_exponent);

/// Analytic position derivatives of steering_vector via the Cartesian chain rule.
SteeringJacobian steering_jacobian(const PanelConfig& panel, const SphericalPoint& p,
                                   double radiation_exponent);

/// LoS + scattered uplink channels for every UE. Scattered parts sum
/// beta_k * steering(target k) over all other targets k != u.
ChannelSet build_channels(const ScenarioConfig& scenario);

/// Instantaneous post-combining SNR: tx_power * ||W^H P^H h||^2 / noise_var.
double received_snr(const CMatrix& w_rx, const PropagationMatrix& p_rx, const CVector& h_u,
                    double tx_power, double noise_var);

/// Baseband RF-chain outputs over T symbols: Y = W^H P^H sum_u sqrt(P_u) h_u s_u + noise,
/// QPSK unit-modulus streams, circular complex Gaussian noise with variance noise_var
/// per entry of the N_RF x T output. Deterministic given the seed.
CMatrix synthesize_rx_signal(const ScenarioConfig& scenario, const CMatrix& w_rx,
                             const PropagationMatrix& p_rx, const ChannelSet& channels,
                             const std::vector<double>& tx_powers, unsigned long long seed);

/// Unit-modulus QPSK symbol rows (U x T), deterministic given the seed.
CMatrix qpsk_symbols(int num_ues, int num_symbols, unsigned long long seed);

/// Standard Gaussian pairs via Box-Muller on a seeded mt19937_64 stream;
/// bit-reproducible across platforms (no std::normal_distribution).
class GaussianStream {
  public:
    explicit GaussianStream(unsigned long long seed) : rng_(seed) {}
    double next();
    Complex next_complex(double variance);  // circular, total variance as given

  private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dmabeam

#endif  // DMABEAM_CHANNEL_HPP
