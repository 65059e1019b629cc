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

#include <algorithm>
#include <numeric>
#include <vector>

#include <armadillo>

#include "cfprec/channel.hpp"

namespace cfprec {

// Per-user serving AP subsets. sets[k] holds the l APs with the largest
// zeta(:, k), stored as ascending indices; ties break toward the lowest index.
struct APSelection {
    std::vector<arma::uvec> sets; // one ascending index vector per user
    arma::uword l = 0;
};

// Estimate masked to the selected APs: column k keeps exactly l nonzeros.
struct SparseChannel {
    arma::cx_mat g_bar;
    APSelection support;
};

// User clusters for reduced-dimension precoding. user_sets[k] lists the users
// whose AP sets overlap user k's in at least n_shared APs (k always included),
// ascending. selection_matrices[k] is the |U_k| x K one-hot row matrix in the
// same order, and index_map[k] is the row whose one sits in column k.
struct ClusterPlan {
    std::vector<arma::uvec> user_sets;
    std::vector<arma::mat> selection_matrices;
    arma::uvec index_map;
    arma::uword n_shared = 0;
};

inline APSelection select_aps(const LargeScaleMatrix &ls, arma::uword l) {
    const arma::uword n = ls.zeta.n_rows;
    const arma::uword k = ls.zeta.n_cols;
    if (l < 1 || l > n)
        throw std::invalid_argument("select_aps: l must satisfy 1 <= l <= n_aps");
    APSelection out;
    out.l = l;
    out.sets.reserve(k);
    std::vector<arma::uword> order(n);
    for (arma::uword j = 0; j < k; ++j) {
        std::iota(order.begin(), order.end(), arma::uword{0});
        std::stable_sort(order.begin(), order.end(), [&](arma::uword a, arma::uword b) {
            return ls.zeta(a, j) > ls.zeta(b, j); // stable: equal gains keep lowest index first
        });
        arma::uvec set(l);
        std::copy_n(order.begin(), l, set.begin());
        out.sets.push_back(arma::sort(set));
    }
    return out;
}

inline SparseChannel sparse_channel(const arma::cx_mat &g_hat, const APSelection &sel) {
    if (sel.sets.size() != g_hat.n_cols)
        throw std::invalid_argument("sparse_channel: selection and estimate dimensions disagree");
    SparseChannel out;
    out.support = sel;
    out.g_bar.zeros(g_hat.n_rows, g_hat.n_cols);
    for (arma::uword j = 0; j < g_hat.n_cols; ++j)
        for (arma::uword idx : sel.sets[j])
            out.g_bar(idx, j) = g_hat(idx, j);
    return out;
}

// Number of APs two ascending index vectors have in common.
inline arma::uword shared_ap_count(const arma::uvec &a, const arma::uvec &b) {
    arma::uword count = 0, i = 0, j = 0;
    while (i < a.n_elem && j < b.n_elem) {
        if (a[i] == b[j]) {
            ++count;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return count;
}

inline ClusterPlan build_clusters(const APSelection &sel, arma::uword n_shared) {
    if (n_shared > sel.l)
        throw std::invalid_argument("build_clusters: n_shared cannot exceed the AP set size");
    const arma::uword k = sel.sets.size();
    ClusterPlan plan;
    plan.n_shared = n_shared;
    plan.user_sets.reserve(k);
    plan.selection_matrices.reserve(k);
    plan.index_map.set_size(k);
    for (arma::uword c = 0; c < k; ++c) {
        std::vector<arma::uword> members;
        for (arma::uword i = 0; i < k; ++i)
            if (i == c || shared_ap_count(sel.sets[i], sel.sets[c]) >= n_shared)
                members.push_back(i); // ascending by construction
        arma::uvec users(members);
        arma::mat u(users.n_elem, k, arma::fill::zeros);
        for (arma::uword r = 0; r < users.n_elem; ++r) {
            u(r, users[r]) = 1.0;
            if (users[r] == c)
                plan.index_map[c] = r;
        }
        plan.user_sets.push_back(std::move(users));
        plan.selection_matrices.push_back(std::move(u));
    }
    return plan;
}

// Rows of G_hat^T for the users in cluster k (equals U_k * G_hat^T), shape |U_k| x N.
inline arma::cx_mat reduced_channel(const arma::cx_mat &g_hat, const ClusterPlan &plan,
                                    arma::uword k) {
    if (k >= plan.user_sets.size())
        throw std::invalid_argument("reduced_channel: user index out of range");
    return arma::cx_mat(g_hat.cols(plan.user_sets[k])).st();
}

} // namespace cfprec
