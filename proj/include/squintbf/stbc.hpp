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

// Alamouti space-time block coding over two analog beamformers.

#pragma once

#include "squintbf/array_model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace squintbf {

// Symbols per branch (rows) and time slot (columns):
//   [[s1, -conj(s2)], [s2, conj(s1)]] / sqrt(2).
struct StbcBlock {
    Eigen::Matrix2cd symbols;

    // Power radiated in one time slot across both branches.
    double slot_power(int slot) const { return symbols.col(slot).squaredNorm(); }
};

inline StbcBlock encode(cdouble s1, cdouble s2)
{
    const double r = 1.0 / std::numbers::sqrt2;
    StbcBlock b;
    b.symbols << r * s1, -r * std::conj(s2), r * s2, r * std::conj(s1);
    return b;
}

// Gamma = (1/sqrt 2) [[w1^H a, w2^H a], [a^H w2, -a^H w1]], so that
// (y1(t), conj(y2(t+1))) = Gamma (s1, s2) for noiseless reception.
struct EquivalentChannel {
    Eigen::Matrix2cd gamma;

    // (|w1^H a|^2 + |w2^H a|^2) / 2, the common diagonal of Gamma^H Gamma.
    double processing_gain() const { return 0.5 * gamma.squaredNorm(); }
};

inline EquivalentChannel equivalent_channel(const WeightVector& w1, const WeightVector& w2,
                                            const SteeringVector& a)
{
    if (w1.size() != a.size() || w2.size() != a.size())
        throw DimensionError("equivalent_channel: vector lengths differ");
    const cdouble g1 = w1.entries().dot(a.entries());
    const cdouble g2 = w2.entries().dot(a.entries());
    const double r = 1.0 / std::numbers::sqrt2;
    EquivalentChannel ch;
    ch.gamma << r * g1, r * g2, r * std::conj(g2), -r * std::conj(g1);
    return ch;
}

struct CombinerOutput {
    Eigen::Vector2cd estimates;
    // Set when alpha1^2 + alpha2^2 == 0: nothing can be recovered.
    bool unrecoverable = false;
};

// Matched combining Gamma^H y. For y = Gamma s the output is
// processing_gain() * s.
inline CombinerOutput combine(const EquivalentChannel& ch, const Eigen::Vector2cd& y)
{
    CombinerOutput out;
    if (ch.processing_gain() == 0.0) {
        out.estimates.setZero();
        out.unrecoverable = true;
        return out;
    }
    out.estimates = ch.gamma.adjoint() * y;
    return out;
}

// Received pair (y1(t), conj(y2(t+1))) for a transmitted block, optionally
// with additive noise samples (n1 at slot t, n2 at slot t+1).
inline Eigen::Vector2cd receive(const WeightVector& w1, const WeightVector& w2, const SteeringVector& a,
                                const StbcBlock& block, cdouble n1 = {}, cdouble n2 = {})
{
    // Branch i contributes w_i^H a per unit symbol.
    const cdouble g1 = w1.entries().dot(a.entries());
    const cdouble g2 = w2.entries().dot(a.entries());
    const cdouble y1 = g1 * block.symbols(0, 0) + g2 * block.symbols(1, 0) + n1;
    const cdouble y2 = g1 * block.symbols(0, 1) + g2 * block.symbols(1, 1) + n2;
    return {y1, std::conj(y2)};
}

} // namespace squintbf
