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
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace cfprec {

// SplitMix64 finalizer. Used to key sub-streams, never as the stream itself.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a over a purpose tag, so sub-streams with different roles never collide.
inline constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Splittable deterministic random source.
//
// Every stream is identified by a 64-bit key; derive() maps (key, tag,
// indices...) to a fresh independent key, so per-trial sub-streams depend only
// on the master seed and the trial coordinates, never on draw order or worker
// scheduling. Normal variates use an explicit Box-Muller transform on top of
// std::mt19937_64 (whose output sequence the standard fully specifies), so a
// given key reproduces bit-identical draws on any platform.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed) : key_(seed), engine_(mix64(seed)) {}

    std::uint64_t key() const { return key_; }

    template <typename... Index>
    RandomSource derive(std::string_view tag, Index... indices) const {
        std::uint64_t h = mix64(key_ ^ hash_tag(tag));
        ((h = mix64(h ^ static_cast<std::uint64_t>(indices))), ...);
        return RandomSource(h);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on [0, high).
    double uniform(double high) { return high * uniform(); }

    // Standard normal via Box-Muller; the pair's second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;      // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * arma::datum::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly symmetric complex normal, unit variance (each part N(0, 1/2)).
    std::complex<double> cnormal() {
        const double re = normal();
        const double im = normal();
        return {re * arma::datum::sqrt2 / 2.0, im * arma::datum::sqrt2 / 2.0};
    }

    // Column-major fills, fixed traversal order.
    arma::mat normal_matrix(arma::uword n_rows, arma::uword n_cols) {
        arma::mat out(n_rows, n_cols);
        for (auto &v : out)
            v = normal();
        return out;
    }

    arma::cx_mat cnormal_matrix(arma::uword n_rows, arma::uword n_cols) {
        arma::cx_mat out(n_rows, n_cols);
        for (auto &v : out)
            v = cnormal();
        return out;
    }

  private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace cfprec
