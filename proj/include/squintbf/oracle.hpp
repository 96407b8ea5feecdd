// SPDX-License-Identifier: Apache-2.0
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

// Brute-force reference computations, independent of the conic solver. Used
// by the self-test command and the test suites.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace squintbf::oracle {

// max <C, X> over 3x3 correlation matrices (unit diagonal, PSD).
//
// Brute force over the off-diagonal pair (x, y) = (X01, X02). For fixed
// (x, y) the PSD condition det >= 0 leaves X12 in
// [xy - sqrt((1-x^2)(1-y^2)), xy + sqrt((1-x^2)(1-y^2))], and the linear
// objective picks an endpoint. A dense grid finds the basin, repeated
// local grids shrink onto the maximizer.
inline double elliptope3_max(const Eigen::Matrix3d& C)
{
    const double base = C.trace();
    auto value = [&](double x, double y) {
        const double r = std::sqrt(std::max(0.0, (1.0 - x * x) * (1.0 - y * y)));
        const double z = C(1, 2) >= 0.0 ? x * y + r : x * y - r;
        return base + 2.0 * (C(0, 1) * x + C(0, 2) * y + C(1, 2) * z);
    };
    // Dense pass.
    const int N = 400;
    std::vector<std::pair<double, std::array<double, 2>>> top;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j) {
            const double x = -1.0 + 2.0 * i / N, y = -1.0 + 2.0 * j / N;
            top.push_back({value(x, y), {x, y}});
        }
    std::partial_sort(top.begin(), top.begin() + 8, top.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    double best = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < 8; ++c) {
        double bx = top[c].second[0], by = top[c].second[1], bv = top[c].first;
        double span = 2.0 / N;
        for (int round = 0; round < 60; ++round) {
            const double cx = bx, cy = by;
            for (int i = -5; i <= 5; ++i)
                for (int j = -5; j <= 5; ++j) {
                    const double x = std::clamp(cx + span * i / 5.0, -1.0, 1.0);
                    const double y = std::clamp(cy + span * j / 5.0, -1.0, 1.0);
                    const double v = value(x, y);
                    if (v > bv) {
                        bv = v;
                        bx = x;
                        by = y;
                    }
                }
            span *= 0.6;
        }
        best = std::max(best, bv);
    }
    return best;
}

} // namespace squintbf::oracle
