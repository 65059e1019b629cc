// SPDX-License-Identifier: Apache-2.0
//
// cfprec c++ library for robust precoding simulation in cell-free MU-MIMO networks
// Copyright (C) 2026 cfprec contributors
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

#pragma once

#include <armadillo>

#include "cfprec/common.hpp"
#include "cfprec/rng.hpp"

namespace cfprec {

// Propagation constants of the three-slope path-loss model plus receiver
// noise parameters. Defaults are the usual 1.9 GHz cell-free setup.
struct PropagationParams {
    double carrier_freq_mhz = 1900.0; // f
    double h_ap_m = 15.0;             // AP height above ground
    double h_user_m = 1.65;           // user terminal height
    double d0_m = 10.0;               // inner breakpoint
    double d1_m = 50.0;               // outer breakpoint
    double shadow_std_db = 8.0;       // log-normal shadowing std
    double noise_temp_k = 290.0;      // T_o
    double boltzmann_jk = 1.381e-23;  // k_B
    double bandwidth_hz = 50.0e6;     // B
    double noise_figure_db = 10.0;    // N_f
};

// AP and user drop inside the square [0, area_side_m]^2.
struct Geometry {
    arma::mat ap_positions;   // [n_aps, 2] in meters
    arma::mat user_positions; // [n_users, 2] in meters
    double area_side_m = 0.0;
};

// Large-scale fading coefficients, linear scale. zeta(n, k) couples AP n to
// user k and is strictly positive.
struct LargeScaleMatrix {
    arma::mat zeta; // [n_aps, n_users]
};

// One consistent draw of the imperfect-CSIT channel model:
//   g_true = sqrt(zeta) .* h
//   g_err  = sigma_e * sqrt(zeta) .* h_err
//   g_hat  = sqrt(zeta) .* (tau * h - sigma_e * h_err),   tau = sqrt(1 + sigma_e^2)
// so that g_hat + g_err = tau * g_true holds elementwise.
struct ChannelSet {
    arma::cx_mat g_true; // [n_aps, n_users]
    arma::cx_mat g_hat;
    arma::cx_mat g_err;
    LargeScaleMatrix zeta;
    double sigma_e = 0.0;
    double tau = 1.0;
};

// Fresh error realization against a fixed estimate; see redraw_error().
struct ErrorRedraw {
    arma::cx_mat g_err;
    arma::cx_mat g_true;
};

// Frequency-dependent attenuation constant of the three-slope model, in dB.
inline double attenuation_constant(const PropagationParams &p) {
    if (p.carrier_freq_mhz <= 0.0 || p.h_ap_m <= 0.0 || p.h_user_m <= 0.0)
        throw std::invalid_argument("attenuation_constant: carrier frequency and antenna heights must be positive");
    const double lf = std::log10(p.carrier_freq_mhz);
    return 46.3 + 33.9 * lf - 13.82 * std::log10(p.h_ap_m) - (1.1 * lf - 0.7) * p.h_user_m +
           (1.56 * lf - 0.8);
}

// Three-slope path loss in dB at distance d (meters). Continuous at both
// breakpoints; constant below d0 (near-field floor).
inline double path_loss_db(double distance_m, const PropagationParams &p) {
    if (distance_m < 0.0)
        throw std::invalid_argument("path_loss_db: distance must be nonnegative");
    if (p.d0_m >= p.d1_m)
        throw std::invalid_argument("path_loss_db: requires d0 < d1");
    const double att = attenuation_constant(p);
    if (distance_m > p.d1_m)
        return -att - 35.0 * std::log10(distance_m);
    if (distance_m > p.d0_m)
        return -att - 15.0 * std::log10(p.d1_m) - 20.0 * std::log10(distance_m);
    return -att - 15.0 * std::log10(p.d1_m) - 20.0 * std::log10(p.d0_m);
}

// Receiver noise power T_o * k_B * B * N_f in watts.
inline double noise_variance_w(const PropagationParams &p) {
    if (p.noise_temp_k <= 0.0 || p.boltzmann_jk <= 0.0 || p.bandwidth_hz <= 0.0)
        throw std::invalid_argument("noise_variance_w: physical parameters must be positive");
    return p.noise_temp_k * p.boltzmann_jk * p.bandwidth_hz * db_to_linear(p.noise_figure_db);
}

// Uniform i.i.d. drop of APs and users in the square. Deterministic in rng.
inline Geometry place_network(arma::uword n_aps, arma::uword n_users, double area_side_m,
                              RandomSource &rng) {
    if (n_aps < 1 || n_users < 1)
        throw std::invalid_argument("place_network: need at least one AP and one user");
    if (area_side_m <= 0.0)
        throw std::invalid_argument("place_network: area side must be positive");
    Geometry g;
    g.area_side_m = area_side_m;
    g.ap_positions.set_size(n_aps, 2);
    for (auto &v : g.ap_positions)
        v = rng.uniform(area_side_m);
    g.user_positions.set_size(n_users, 2);
    for (auto &v : g.user_positions)
        v = rng.uniform(area_side_m);
    return g;
}

// zeta(n, k) = 10^((PL_dB(d_{n,k}) + shadow_std * z_{n,k}) / 10), z i.i.d. standard
// normal per (AP, user) pair.
inline LargeScaleMatrix large_scale_coefficients(const Geometry &geo, const PropagationParams &p,
                                                 RandomSource &rng) {
    const arma::uword n = geo.ap_positions.n_rows;
    const arma::uword k = geo.user_positions.n_rows;
    LargeScaleMatrix out;
    out.zeta.set_size(n, k);
    for (arma::uword j = 0; j < k; ++j) {
        for (arma::uword i = 0; i < n; ++i) {
            const double dx = geo.ap_positions(i, 0) - geo.user_positions(j, 0);
            const double dy = geo.ap_positions(i, 1) - geo.user_positions(j, 1);
            const double d = std::sqrt(dx * dx + dy * dy);
            const double pl_db = path_loss_db(d, p) + p.shadow_std_db * rng.normal();
            out.zeta(i, j) = db_to_linear(pl_db);
        }
    }
    return out;
}

// Draws (g_true, g_hat, g_err) in one shot. h first, h_err second, both
// column-major, so the sequence is reproducible from the stream key alone.
inline ChannelSet draw_channel_triple(const LargeScaleMatrix &ls, double sigma_e,
                                      RandomSource &rng) {
    if (sigma_e < 0.0)
        throw std::invalid_argument("draw_channel_triple: sigma_e must be nonnegative");
    const arma::uword n = ls.zeta.n_rows;
    const arma::uword k = ls.zeta.n_cols;
    const double tau = std::sqrt(1.0 + sigma_e * sigma_e);
    const arma::cx_mat h = rng.cnormal_matrix(n, k);
    const arma::cx_mat h_err = rng.cnormal_matrix(n, k);
    const arma::mat root_zeta = arma::sqrt(ls.zeta);

    ChannelSet cs;
    cs.zeta = ls;
    cs.sigma_e = sigma_e;
    cs.tau = tau;
    cs.g_true = root_zeta % h;
    cs.g_err = sigma_e * (root_zeta % h_err);
    cs.g_hat = root_zeta % (tau * h - sigma_e * h_err);
    return cs;
}

// Fresh error matrix for a fixed estimate: g_err = sigma_e*sqrt(zeta).*h_err and
// g_true = (g_hat + g_err)/tau, keeping the triple consistent with the model.
inline ErrorRedraw redraw_error(const arma::cx_mat &g_hat, const LargeScaleMatrix &ls,
                                double sigma_e, RandomSource &rng) {
    if (sigma_e < 0.0)
        throw std::invalid_argument("redraw_error: sigma_e must be nonnegative");
    if (g_hat.n_rows != ls.zeta.n_rows || g_hat.n_cols != ls.zeta.n_cols)
        throw std::invalid_argument("redraw_error: estimate and zeta dimensions disagree");
    const double tau = std::sqrt(1.0 + sigma_e * sigma_e);
    ErrorRedraw out;
    out.g_err = sigma_e * (arma::sqrt(ls.zeta) % rng.cnormal_matrix(g_hat.n_rows, g_hat.n_cols));
    out.g_true = (g_hat + out.g_err) / tau;
    return out;
}

// Transmit power achieving a target average SNR, with tr(G^T G*) replaced by
// its expectation sum(zeta): P_t = snr * N * K * sigma_n^2 / sum(zeta).
inline double power_for_snr(const LargeScaleMatrix &ls, double snr_linear, double sigma_n2_w) {
    if (snr_linear <= 0.0)
        throw std::invalid_argument("power_for_snr: snr must be positive");
    const double zeta_sum = arma::accu(ls.zeta);
    if (!(zeta_sum > 0.0))
        throw std::invalid_argument("power_for_snr: zeta sums to zero");
    return snr_linear * static_cast<double>(ls.zeta.n_rows) * static_cast<double>(ls.zeta.n_cols) *
           sigma_n2_w / zeta_sum;
}

} // namespace cfprec
