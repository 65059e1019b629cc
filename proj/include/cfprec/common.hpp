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

#include <cmath>
#include <stdexcept>
#include <string>

namespace cfprec {

inline constexpr const char *version_string = "0.1.0";

// Raised when a linear solve or an iterate is numerically unusable.
// Trials hitting this are recorded and excluded, not silently patched.
class numerical_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Raised on persistence failures; the message carries the offending path.
class io_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// dB convention: power quantities, 10*log10 both ways.
inline double db_to_linear(double value_db) { return std::pow(10.0, value_db / 10.0); }

inline double linear_to_db(double value_linear) { return 10.0 * std::log10(value_linear); }

} // namespace cfprec
