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

#include <vector>

#include <armadillo>

#include "cfprec/common.hpp"
#include "cfprec/selection.hpp"

namespace cfprec {

// Model for the channel-error covariance E[G_err* G_err^T] (always diagonal here):
//   identity_scaled: sigma_e^2 * I, the textbook loading term
//   exact_diagonal:  diag(sigma_e^2 * sum_k zeta(n, k)), the model's exact expectation
enum class ThetaMode { identity_scaled, exact_diagonal };

struct ErrorCovariance {
    arma::vec diag;     // length n_aps; diagonal of E[G_err* G_err^T]
    ThetaMode mode = ThetaMode::identity_scaled;
    double sigma_e = 0.0;
    arma::mat per_user; // [n_aps, n_users] sigma_e^2 * zeta, kept in exact mode so
                        // per-cluster restrictions can be rebuilt; empty otherwise

    bool is_scalar() const { return mode == ThetaMode::identity_scaled; }
    arma::cx_mat matrix() const { return arma::cx_mat(arma::diagmat(diag), arma::mat(diag.n_elem, diag.n_elem, arma::fill::zeros)); }
};

inline ErrorCovariance error_covariance(const LargeScaleMatrix &ls, double sigma_e, ThetaMode mode) {
    if (sigma_e < 0.0)
        throw std::invalid_argument("error_covariance: sigma_e must be nonnegative");
    const double se2 = sigma_e * sigma_e;
    ErrorCovariance out;
    out.mode = mode;
    out.sigma_e = sigma_e;
    if (mode == ThetaMode::identity_scaled) {
        out.diag = se2 * arma::ones<arma::vec>(ls.zeta.n_rows);
    } else {
        out.per_user = se2 * ls.zeta;
        out.diag = arma::sum(out.per_user, 1);
    }
    return out;
}

// Restriction of the covariance to the error columns of a user cluster.
inline arma::vec cluster_theta_diag(const ErrorCovariance &theta, const arma::uvec &users) {
    if (theta.is_scalar())
        return theta.diag;
    return arma::sum(arma::mat(theta.per_user.cols(users)), 1);
}

// How the regularized Hermitian system is solved. The dual route uses the
// K x K push-through identity (A A^H + cI)^{-1} A = A (A^H A + cI)^{-1} and is
// valid only while the full loading is a scalar multiple of identity; it must
// agree with the direct route to 1e-10 (pinned by a test).
enum class SolveRoute { automatic, direct, dual };

struct RobustSolveSettings {
    arma::uword max_iterations = 10; // i_t
    double convergence_tol = 1e-8;   // early exit on relative precoder change
    double jitter = 1e-10;           // one-shot diagonal jitter coefficient, times tr(gram)/N
    SolveRoute route = SolveRoute::automatic;
};

// Precoder with its solver by-products. Columns are indexed by user and
// tr(p p^H) equals the power budget the solver was given.
struct PrecoderMatrix {
    arma::cx_mat p;                 // [n_aps, n_users]
    double f = 1.0;                 // receiver gain factor (clustered: final global rescale)
    double lambda = 0.0;            // loading term of the last iteration
    double total_power = 0.0;       // tr(p p^H)
    arma::uword iterations_run = 0; // alternating iterations actually executed
    double residual = 0.0;          // stationarity residual at the returned iterate
    std::vector<double> f_trace;
    std::vector<double> lambda_trace;
    std::vector<double> residual_trace;
};

// Per-cluster diagnostics of robust_mmse_clustered.
struct ClusterSolveInfo {
    arma::uword user = 0;
    arma::uword cluster_size = 0;
    double power_budget = 0.0; // |U_k| P_t / K
    double power = 0.0;        // tr(P' P'^H) actually reached
    double f = 0.0;
    double lambda = 0.0;
    double residual = 0.0;
    arma::uword iterations_run = 0;
};

namespace detail {

inline double frob_sq(const arma::cx_mat &m) { return arma::accu(arma::square(arma::abs(m))); }

// Per-AP transmit power sum_k |p(n,k)|^2.
inline arma::vec row_power(const arma::cx_mat &p) {
    return arma::sum(arma::square(arma::abs(p)), 1);
}

// Factor-once multi-RHS solve of m x = rhs with a one-shot diagonal jitter on
// failure. m is Hermitian but possibly indefinite (lambda may be negative), so
// the general LU path is used; singularity past the jitter aborts the trial.
inline arma::cx_mat jittered_solve(arma::cx_mat m, const arma::cx_mat &rhs, double jitter_abs) {
    arma::cx_mat x;
    if (arma::solve(x, m, rhs, arma::solve_opts::no_approx) && x.is_finite())
        return x;
    m.diag() += jitter_abs;
    if (arma::solve(x, m, rhs, arma::solve_opts::no_approx) && x.is_finite())
        return x;
    throw numerical_error("regularized precoding system is singular even after diagonal jitter");
}

// One regularized solve (gram + theta_coeff*diag(theta) + scalar_load*I)^{-1} conj(g).
struct LoadedSystem {
    const arma::cx_mat &g;        // channel estimate, [n, k]
    arma::cx_mat g_conj;          // conj(g), the multi-RHS block
    arma::cx_mat gram_nn;         // conj(g) * g^T, built lazily for the direct route
    arma::cx_mat gram_kk;         // g^T * conj(g), built lazily for the dual route
    const arma::vec *theta_diag;  // may be null when the loading is purely scalar
    double theta_scalar = 0.0;    // sigma_e^2 when the covariance is scalar
    bool scalar_theta = true;
    double jitter_abs = 0.0;
    bool use_dual = false;

    LoadedSystem(const arma::cx_mat &g_in, const arma::vec *theta, double theta_s, bool scalar,
                 const RobustSolveSettings &s)
        : g(g_in), g_conj(arma::conj(g_in)), theta_diag(theta), theta_scalar(theta_s),
          scalar_theta(scalar) {
        const double trace_gram = frob_sq(g); // tr(G* G^T)
        jitter_abs = s.jitter * trace_gram / static_cast<double>(g.n_rows);
        switch (s.route) {
        case SolveRoute::direct:
            use_dual = false;
            break;
        case SolveRoute::dual:
            if (!scalar_theta)
                throw std::invalid_argument("dual solve route requires a scalar error covariance");
            use_dual = true;
            break;
        case SolveRoute::automatic:
            use_dual = scalar_theta && g.n_rows > g.n_cols;
            break;
        }
        if (use_dual)
            gram_kk = arma::cx_mat(g.st() * g_conj);
        else
            gram_nn = arma::cx_mat(g_conj * g.st());
    }

    // theta_coeff multiplies the error covariance, scalar_load multiplies I.
    arma::cx_mat solve(double theta_coeff, double scalar_load) const {
        if (use_dual) {
            const double c = theta_coeff * theta_scalar + scalar_load;
            arma::cx_mat mk = gram_kk;
            mk.diag() += c;
            arma::cx_mat w = jittered_solve(std::move(mk),
                                            arma::cx_mat(arma::eye<arma::cx_mat>(gram_kk.n_rows, gram_kk.n_cols)),
                                            jitter_abs);
            return g_conj * w;
        }
        arma::cx_mat m = gram_nn;
        if (scalar_theta) {
            m.diag() += theta_coeff * theta_scalar + scalar_load;
        } else {
            m.diag() += theta_coeff * arma::cx_vec(*theta_diag, arma::vec(theta_diag->n_elem, arma::fill::zeros));
            m.diag() += scalar_load;
        }
        return jittered_solve(std::move(m), g_conj, jitter_abs);
    }

    // Residual of the stationarity condition M(f, lambda) P = f*tau*conj(g),
    // computed without materializing the n x n system.
    double residual(const arma::cx_mat &p, double f, double lambda, double tau) const {
        const double theta_coeff = 1.0 + f * f;
        const double scalar_load = lambda * f * f * tau * tau;
        arma::cx_mat mp = g_conj * (g.st() * p);
        if (scalar_theta) {
            mp += (theta_coeff * theta_scalar + scalar_load) * p;
        } else {
            mp += p.each_col() % arma::cx_vec(theta_coeff * (*theta_diag),
                                              arma::vec(theta_diag->n_elem, arma::fill::zeros));
            mp += scalar_load * p;
        }
        const arma::cx_mat target = (f * tau) * g_conj;
        return std::sqrt(frob_sq(mp - target) / frob_sq(target));
    }
};

} // namespace detail

// Gain factor of Eq.-type power scaling: f = (1/tau) sqrt(p_t / tr(p_bar p_bar^H)).
inline double scale_factor(const arma::cx_mat &p_bar, double p_t, double tau) {
    if (p_t <= 0.0)
        throw std::invalid_argument("scale_factor: power budget must be positive");
    const double tr = detail::frob_sq(p_bar);
    if (!(tr > 0.0))
        throw std::invalid_argument("scale_factor: precoder is identically zero");
    return std::sqrt(p_t / tr) / tau;
}

// Loading term lambda = tr(R_n)/(f^2 P_t) - tr(P^H Theta P)/(tau^2 P_t). May be
// negative; callers do not clamp it.
inline double update_lambda(const arma::cx_mat &p, double f, double noise_cov_trace,
                            const arma::vec &theta_diag, double tau, double p_t) {
    if (p_t <= 0.0 || f <= 0.0)
        throw std::invalid_argument("update_lambda: power budget and gain must be positive");
    const double theta_term = arma::dot(theta_diag, detail::row_power(p));
    return noise_cov_trace / (f * f * p_t) - theta_term / (tau * tau * p_t);
}

// Conventional MMSE precoder (G_hat* G_hat^T + K sigma_n^2 / P_t I)^{-1} G_hat*,
// rescaled to the exact power budget.
inline PrecoderMatrix mmse_conventional(const arma::cx_mat &g_hat, double p_t, double sigma_n2,
                                        const RobustSolveSettings &settings = {}) {
    if (p_t <= 0.0)
        throw std::invalid_argument("mmse_conventional: transmit power must be positive");
    const arma::uword k = g_hat.n_cols;
    RobustSolveSettings s = settings;
    s.jitter = 0.0; // loaded PSD system; singularity is reported, not patched
    detail::LoadedSystem sys(g_hat, nullptr, 0.0, true, s);
    const double load = static_cast<double>(k) * sigma_n2 / p_t;
    const arma::cx_mat p_bar = sys.solve(0.0, load);

    PrecoderMatrix out;
    out.f = scale_factor(p_bar, p_t, 1.0);
    out.lambda = load;
    out.p = out.f * p_bar;
    out.total_power = detail::frob_sq(out.p);
    out.iterations_run = 0;
    out.residual = 0.0;
    return out;
}

namespace detail {

// Alternating optimization shared by the network-wide, sparse, and per-cluster
// robust solvers. g is the (possibly masked or reduced) estimate, theta_diag
// the matching error covariance diagonal, p_t the power budget of this
// problem, noise_cov_trace = tr(R_n) for its receivers.
inline PrecoderMatrix robust_alternating(const arma::cx_mat &g, const arma::vec &theta_diag,
                                         bool scalar_theta, double theta_scalar, double p_t,
                                         double noise_cov_trace, double tau,
                                         const RobustSolveSettings &settings) {
    if (p_t <= 0.0)
        throw std::invalid_argument("robust precoder: transmit power must be positive");
    if (theta_diag.n_elem != g.n_rows)
        throw std::invalid_argument("robust precoder: covariance and channel dimensions disagree");
    if (settings.max_iterations < 1)
        throw std::invalid_argument("robust precoder: need at least one iteration");

    LoadedSystem sys(g, &theta_diag, theta_scalar, scalar_theta, settings);

    PrecoderMatrix out;
    // Conventional MMSE start; f and lambda already follow the robust updates.
    arma::cx_mat p_bar = sys.solve(0.0, noise_cov_trace / p_t);
    double f = scale_factor(p_bar, p_t, tau);
    arma::cx_mat p = (f * tau) * p_bar;
    double lambda = update_lambda(p, f, noise_cov_trace, theta_diag, tau, p_t);
    out.f_trace.push_back(f);
    out.lambda_trace.push_back(lambda);
    out.residual_trace.push_back(sys.residual(p, f, lambda, tau));

    for (arma::uword i = 1; i <= settings.max_iterations; ++i) {
        p_bar = sys.solve(1.0 + f * f, lambda * f * f * tau * tau);
        f = scale_factor(p_bar, p_t, tau);
        const arma::cx_mat p_next = (f * tau) * p_bar;
        const double rel_change = std::sqrt(frob_sq(p_next - p) / frob_sq(p));
        p = p_next;
        lambda = update_lambda(p, f, noise_cov_trace, theta_diag, tau, p_t);
        out.iterations_run = i;
        out.f_trace.push_back(f);
        out.lambda_trace.push_back(lambda);
        out.residual_trace.push_back(sys.residual(p, f, lambda, tau));
        if (rel_change < settings.convergence_tol)
            break;
    }

    out.p = std::move(p);
    out.f = f;
    out.lambda = lambda;
    out.total_power = frob_sq(out.p);
    out.residual = out.residual_trace.back();
    return out;
}

} // namespace detail

// Robust MMSE precoder via alternating optimization of (P, f, lambda).
inline PrecoderMatrix robust_mmse(const arma::cx_mat &g_hat, const ErrorCovariance &theta,
                                  double p_t, double sigma_n2, double tau,
                                  const RobustSolveSettings &settings = {}) {
    const double noise_trace = static_cast<double>(g_hat.n_cols) * sigma_n2;
    return detail::robust_alternating(g_hat, theta.diag, theta.is_scalar(),
                                      theta.is_scalar() ? theta.sigma_e * theta.sigma_e : 0.0,
                                      p_t, noise_trace, tau, settings);
}

// Sparse robust MMSE: the alternating loop on the AP-masked estimate. The
// error covariance stays the full-network one.
inline PrecoderMatrix robust_mmse_sparse(const SparseChannel &sparse, const ErrorCovariance &theta,
                                         double p_t, double sigma_n2, double tau,
                                         const RobustSolveSettings &settings = {}) {
    const double noise_trace = static_cast<double>(sparse.g_bar.n_cols) * sigma_n2;
    return detail::robust_alternating(sparse.g_bar, theta.diag, theta.is_scalar(),
                                      theta.is_scalar() ? theta.sigma_e * theta.sigma_e : 0.0,
                                      p_t, noise_trace, tau, settings);
}

// Cluster-based reduced-dimension robust MMSE. Per user k the robust problem
// is solved on the columns of the cluster's users with budget |U_k| P_t / K
// and noise trace |U_k| sigma_n^2; column index_map[k] of the cluster solution
// becomes column k. The assembled matrix is rescaled to total power P_t so all
// schemes compete under the same budget; per-cluster (f, lambda) land in the
// f/lambda traces in user order.
inline PrecoderMatrix robust_mmse_clustered(const arma::cx_mat &g_hat, const ClusterPlan &plan,
                                            const ErrorCovariance &theta, double p_t,
                                            double sigma_n2, double tau,
                                            const RobustSolveSettings &settings = {},
                                            std::vector<ClusterSolveInfo> *info = nullptr) {
    const arma::uword k = g_hat.n_cols;
    if (plan.user_sets.size() != k)
        throw std::invalid_argument("robust_mmse_clustered: plan and estimate dimensions disagree");
    if (info)
        info->clear();

    PrecoderMatrix out;
    out.p.set_size(g_hat.n_rows, k);
    for (arma::uword c = 0; c < k; ++c) {
        const arma::uvec &users = plan.user_sets[c];
        const double budget = static_cast<double>(users.n_elem) * p_t / static_cast<double>(k);
        const double noise_trace = static_cast<double>(users.n_elem) * sigma_n2;
        const arma::vec theta_c = cluster_theta_diag(theta, users);
        PrecoderMatrix sub;
        try {
            sub = detail::robust_alternating(arma::cx_mat(g_hat.cols(users)), theta_c,
                                             theta.is_scalar(),
                                             theta.is_scalar() ? theta.sigma_e * theta.sigma_e : 0.0,
                                             budget, noise_trace, tau, settings);
        } catch (const numerical_error &e) {
            throw numerical_error("cluster of user " + std::to_string(c) + ": " + e.what());
        }
        out.p.col(c) = sub.p.col(plan.index_map[c]);
        out.f_trace.push_back(sub.f);
        out.lambda_trace.push_back(sub.lambda);
        out.residual_trace.push_back(sub.residual);
        out.residual = std::max(out.residual, sub.residual);
        out.iterations_run = std::max(out.iterations_run, sub.iterations_run);
        if (info)
            info->push_back({c, users.n_elem, budget, sub.total_power, sub.f, sub.lambda,
                             sub.residual, sub.iterations_run});
    }

    const double assembled = detail::frob_sq(out.p);
    if (!(assembled > 0.0))
        throw numerical_error("robust_mmse_clustered: assembled precoder is zero");
    out.f = std::sqrt(p_t / assembled);
    out.p *= out.f;
    out.lambda = 0.0; // loading is per cluster; see lambda_trace
    out.total_power = detail::frob_sq(out.p);
    return out;
}

// Stationarity residual ||(G*G^T + (1+f^2)Theta + lambda f^2 tau^2 I) P - f tau G*|| /
// ||f tau G*|| for an externally supplied iterate.
inline double stationarity_residual(const arma::cx_mat &g, const arma::vec &theta_diag,
                                    const arma::cx_mat &p, double f, double lambda, double tau) {
    const arma::cx_mat g_conj = arma::conj(g);
    arma::cx_mat mp = g_conj * (g.st() * p);
    mp += p.each_col() % arma::cx_vec((1.0 + f * f) * theta_diag,
                                      arma::vec(theta_diag.n_elem, arma::fill::zeros));
    mp += (lambda * f * f * tau * tau) * p;
    const arma::cx_mat target = (f * tau) * g_conj;
    return std::sqrt(detail::frob_sq(mp - target) / detail::frob_sq(target));
}

} // namespace cfprec
