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

#include "dmabeam/channel.hpp"

#include <cmath>

namespace dmabeam {

namespace {

constexpr double kCoincidenceEps = 1e-9;  // [m]

inline unsigned long long mix_seed(unsigned long long seed, unsigned long long salt) {
    unsigned long long x = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

}  // namespace

double GaussianStream::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller on uniform doubles drawn from the raw 64-bit stream.
    constexpr double kInv = 1.0 / 9007199254740992.0;  // 2^-53
    double u1 = 0.0;
    do {
        u1 = static_cast<double>(rng_() >> 11) * kInv;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(rng_() >> 11) * kInv;
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * kPi * u2);
}

Complex GaussianStream::next_complex(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = next();
    const double im = next();
    return Complex{s * re, s * im};
}

PropagationMatrix build_propagation_matrix(const PanelConfig& panel) {
    panel.validate();
    PropagationMatrix p;
    p.diag.resize(panel.total_elements());
    for (int i = 1; i <= panel.n_rf; ++i) {
        for (int n = 1; n <= panel.n_e; ++n) {
            const double rho = intra_strip_location(panel, n);
            const Complex expo = -rho * Complex{panel.waveguide_alpha, panel.waveguide_beta};
            p.diag[(i - 1) * panel.n_e + (n - 1)] = std::exp(expo);
        }
    }
    return p;
}

SteeringVector steering_vector(const PanelConfig& panel, const SphericalPoint& p,
                               double radiation_exponent) {
    p.validate();
    const Vec3 c = spherical_to_cartesian(p);
    const double kappa = 2.0 * kPi / panel.wavelength;
    SteeringVector sv;
    sv.value.resize(panel.total_elements());
    for (int i = 1; i <= panel.n_rf; ++i) {
        for (int n = 1; n <= panel.n_e; ++n) {
            const Vec3 d = c - element_position(panel, i, n);
            const double rho = d.norm();
            if (rho < kCoincidenceEps)
                throw SingularityError("steering_vector: point coincides with element");
            const double theta_el = std::acos(std::clamp(d.z() / rho, -1.0, 1.0));
            const double amp =
                std::sqrt(radiation_profile(theta_el, radiation_exponent)) / (4.0 * kPi * rho);
            sv.value[(i - 1) * panel.n_e + (n - 1)] = std::polar(amp, kappa * rho);
        }
    }
    return sv;
}

SteeringJacobian steering_jacobian(const PanelConfig& panel, const SphericalPoint& p,
                                   double radiation_exponent) {
    p.validate();
    const Vec3 c = spherical_to_cartesian(p);
    const double st = std::sin(p.theta), ct = std::cos(p.theta);
    const double sp = std::sin(p.phi), cp = std::cos(p.phi);
    // Columns of the spherical->Cartesian Jacobian d c / d (r, theta, phi).
    const Vec3 dc_dr(st * cp, st * sp, ct);
    const Vec3 dc_dtheta(p.r * ct * cp, p.r * ct * sp, -p.r * st);
    const Vec3 dc_dphi(-p.r * st * sp, p.r * st * cp, 0.0);

    const double kappa = 2.0 * kPi / panel.wavelength;
    const double b = radiation_exponent;
    const int n_total = panel.total_elements();
    SteeringJacobian jac;
    jac.d_r.resize(n_total);
    jac.d_theta.resize(n_total);
    jac.d_phi.resize(n_total);

    for (int i = 1; i <= panel.n_rf; ++i) {
        for (int n = 1; n <= panel.n_e; ++n) {
            const Vec3 d = c - element_position(panel, i, n);
            const double rho = d.norm();
            if (rho < kCoincidenceEps)
                throw SingularityError("steering_jacobian: point coincides with element");
            const Vec3 u = d / rho;
            const double mu = std::clamp(d.z() / rho, -1.0, 1.0);  // cos(theta_el)
            const double theta_el = std::acos(mu);
            const double amp =
                std::sqrt(radiation_profile(theta_el, b)) / (4.0 * kPi * rho);
            const Complex phase = std::polar(1.0, kappa * rho);
            const int idx = (i - 1) * panel.n_e + (n - 1);

            auto entry_derivative = [&](const Vec3& dc) {
                if (b != 0.0 && mu <= 0.0) return Complex{0.0, 0.0};  // dark hemisphere
                const double drho = u.dot(dc);
                double damp = -amp / rho * drho;
                if (b != 0.0) {
                    const double dmu = (dc.z() - mu * drho) / rho;
                    damp += amp * (b / 2.0) * (dmu / mu);
                }
                return (damp + amp * Complex{0.0, kappa * drho}) * phase;
            };
            jac.d_r[idx] = entry_derivative(dc_dr);
            jac.d_theta[idx] = entry_derivative(dc_dtheta);
            jac.d_phi[idx] = entry_derivative(dc_dphi);
        }
    }
    return jac;
}

ChannelSet build_channels(const ScenarioConfig& scenario) {
    scenario.validate();
    std::vector<Complex> beta = scenario.reflection_coeffs;
    if (static_cast<int>(beta.size()) != scenario.num_targets()) {
        ScenarioConfig tmp = scenario;
        populate_reflection_coeffs(tmp);
        beta = tmp.reflection_coeffs;
    }
    const int n_total = scenario.panel.total_elements();
    std::vector<CVector> steer(scenario.num_targets());
    for (int k = 0; k < scenario.num_targets(); ++k)
        steer[k] =
            steering_vector(scenario.panel, scenario.targets[k], scenario.radiation_exponent)
                .value;

    ChannelSet cs;
    cs.h_los.resize(scenario.num_ues);
    cs.h_scat.resize(scenario.num_ues);
    cs.h_total.resize(scenario.num_ues);
    for (int u = 0; u < scenario.num_ues; ++u) {
        cs.h_los[u] = steer[u];
        cs.h_scat[u] = CVector::Zero(n_total);
        for (int k = 0; k < scenario.num_targets(); ++k) {
            if (k == u) continue;
            cs.h_scat[u] += beta[k] * steer[k];
        }
        cs.h_total[u] = cs.h_los[u] + cs.h_scat[u];
    }
    return cs;
}

double received_snr(const CMatrix& w_rx, const PropagationMatrix& p_rx, const CVector& h_u,
                    double tx_power, double noise_var) {
    if (w_rx.rows() != p_rx.diag.size() || h_u.size() != p_rx.diag.size())
        throw std::invalid_argument("received_snr: dimension mismatch");
    const CVector combined = w_rx.adjoint() * p_rx.apply_hermitian(h_u);
    return tx_power * combined.squaredNorm() / noise_var;
}

CMatrix qpsk_symbols(int num_ues, int num_symbols, unsigned long long seed) {
    CMatrix s(num_ues, num_symbols);
    std::mt19937_64 rng(mix_seed(seed, 0x51));
    for (int u = 0; u < num_ues; ++u)
        for (int t = 0; t < num_symbols; ++t)
            s(u, t) = std::polar(1.0, kPi / 4.0 + (rng() & 3) * kPi / 2.0);
    return s;
}

CMatrix synthesize_rx_signal(const ScenarioConfig& scenario, const CMatrix& w_rx,
                             const PropagationMatrix& p_rx, const ChannelSet& channels,
                             const std::vector<double>& tx_powers, unsigned long long seed) {
    const int n_rf = scenario.panel.n_rf;
    const int t_sym = scenario.num_symbols;
    if (w_rx.cols() != n_rf)
        throw std::invalid_argument("synthesize_rx_signal: combiner column count != N_RF");
    const CMatrix s = qpsk_symbols(scenario.num_ues, t_sym, seed);
    CMatrix y = CMatrix::Zero(n_rf, t_sym);
    for (int u = 0; u < scenario.num_ues; ++u) {
        const double power = (u < static_cast<int>(tx_powers.size())) ? tx_powers[u]
                                                                      : scenario.p_max;
        const CVector combined = w_rx.adjoint() * p_rx.apply_hermitian(channels.h_total[u]);
        y += std::sqrt(power) * combined * s.row(u);
    }
    GaussianStream noise(mix_seed(seed, 0xA3));
    for (int t = 0; t < t_sym; ++t)
        for (int r = 0; r < n_rf; ++r) y(r, t) += noise.next_complex(scenario.noise_var);
    return y;
}

}  // namespace dmabeam
