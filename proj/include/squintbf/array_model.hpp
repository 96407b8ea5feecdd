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

// Uniform linear array mathematics: steering vectors, constant-modulus
// weights, beam patterns and the closed-form fine-beam (Dirichlet) gain.
//
// Elements are indexed m = 0..M-1, so element m carries the phase
// 2*pi*(f/c)*m*d*theta. Virtual angle theta is sin(angle of departure).

#pragma once

#include "squintbf/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace squintbf {

using cdouble = std::complex<double>;

inline constexpr double kSpeedOfLight = 2.99792458e8;

// Linear power ratio to dB.
inline double to_db(double linear) { return 10.0 * std::log10(linear); }

class ArrayConfig {
public:
    ArrayConfig(std::size_t num_elements, double element_spacing, double carrier_freq,
                double wave_speed = kSpeedOfLight)
        : num_elements_(num_elements),
          element_spacing_(element_spacing),
          carrier_freq_(carrier_freq),
          wave_speed_(wave_speed)
    {
        if (num_elements_ < 2)
            throw DomainError("ArrayConfig: num_elements must be >= 2");
        if (!(element_spacing_ > 0.0) || !std::isfinite(element_spacing_))
            throw DomainError("ArrayConfig: element_spacing must be > 0");
        if (!(carrier_freq_ > 0.0) || !std::isfinite(carrier_freq_))
            throw DomainError("ArrayConfig: carrier_freq must be > 0");
        if (!(wave_speed_ > 0.0) || !std::isfinite(wave_speed_))
            throw DomainError("ArrayConfig: wave_speed must be > 0");
    }

    // d = lambda_c / 2.
    static ArrayConfig half_wavelength(std::size_t num_elements, double carrier_freq,
                                       double wave_speed = kSpeedOfLight)
    {
        if (!(carrier_freq > 0.0))
            throw DomainError("ArrayConfig: carrier_freq must be > 0");
        return ArrayConfig(num_elements, wave_speed / (2.0 * carrier_freq), carrier_freq,
                           wave_speed);
    }

    std::size_t num_elements() const { return num_elements_; }
    double element_spacing() const { return element_spacing_; }
    double carrier_freq() const { return carrier_freq_; }
    double wave_speed() const { return wave_speed_; }

    // Inter-element phase progression in cycles, f*d*theta/c.
    double spatial_freq(double f, double theta) const
    {
        return f * element_spacing_ * theta / wave_speed_;
    }

private:
    std::size_t num_elements_;
    double element_spacing_;
    double carrier_freq_;
    double wave_speed_;
};

inline void check_virtual_angle(double theta, const char* who)
{
    if (!(theta >= -1.0 && theta <= 1.0))
        throw DomainError(std::string(who) + ": virtual angle must lie in [-1, 1]");
}

class SteeringVector {
public:
    const Eigen::VectorXcd& entries() const { return entries_; }
    std::size_t size() const { return static_cast<std::size_t>(entries_.size()); }
    double freq() const { return freq_; }
    double virtual_angle() const { return virtual_angle_; }

private:
    SteeringVector(Eigen::VectorXcd entries, double freq, double theta)
        : entries_(std::move(entries)), freq_(freq), virtual_angle_(theta)
    {
    }
    friend SteeringVector steering_vector(const ArrayConfig&, double, double);

    Eigen::VectorXcd entries_;
    double freq_;
    double virtual_angle_;
};

// a(f, theta)[m] = exp(j*2*pi*(f/c)*m*d*theta).
inline SteeringVector steering_vector(const ArrayConfig& cfg, double f, double theta)
{
    check_virtual_angle(theta, "steering_vector");
    if (!(f > 0.0) || !std::isfinite(f))
        throw DomainError("steering_vector: frequency must be > 0");
    const auto M = static_cast<Eigen::Index>(cfg.num_elements());
    const double step = 2.0 * std::numbers::pi * cfg.spatial_freq(f, theta);
    Eigen::VectorXcd a(M);
    for (Eigen::Index m = 0; m < M; ++m)
        a[m] = std::polar(1.0, step * static_cast<double>(m));
    return SteeringVector(std::move(a), f, theta);
}

// Phase-shifter weights: every entry has modulus exactly 1/sqrt(M).
class WeightVector {
public:
    static constexpr double kModulusTol = 1e-12;

    explicit WeightVector(Eigen::VectorXcd entries) : entries_(std::move(entries))
    {
        const auto M = entries_.size();
        if (M < 2)
            throw DimensionError("WeightVector: need at least 2 entries");
        const double target = 1.0 / std::sqrt(static_cast<double>(M));
        for (Eigen::Index m = 0; m < M; ++m)
            if (std::abs(std::abs(entries_[m]) - target) > kModulusTol)
                throw DomainError("WeightVector: entry modulus differs from 1/sqrt(M)");
    }

    static WeightVector from_phases(std::span<const double> phases)
    {
        const auto M = static_cast<Eigen::Index>(phases.size());
        const double r = 1.0 / std::sqrt(static_cast<double>(M));
        Eigen::VectorXcd w(M);
        for (Eigen::Index m = 0; m < M; ++m)
            w[m] = std::polar(r, phases[static_cast<std::size_t>(m)]);
        return WeightVector(std::move(w));
    }

    const Eigen::VectorXcd& entries() const { return entries_; }
    std::size_t size() const { return static_cast<std::size_t>(entries_.size()); }

    std::vector<double> phases() const
    {
        std::vector<double> out(size());
        for (std::size_t m = 0; m < out.size(); ++m)
            out[m] = std::arg(entries_[static_cast<Eigen::Index>(m)]);
        return out;
    }

private:
    Eigen::VectorXcd entries_;
};

// Frequency band D = [f_c - f_0, f_c + f_0] with main lobe [f_c - B/2, f_c + B/2].
class BandSpec {
public:
    BandSpec(double carrier_freq, double bandwidth, double half_extent)
        : carrier_freq_(carrier_freq), bandwidth_(bandwidth), half_extent_(half_extent)
    {
        if (!(carrier_freq_ > 0.0))
            throw DomainError("BandSpec: carrier_freq must be > 0");
        if (!(bandwidth_ > 0.0))
            throw DomainError("BandSpec: bandwidth must be > 0");
        if (!(bandwidth_ < 2.0 * half_extent_))
            throw DomainError("BandSpec: bandwidth must be < 2*half_extent");
        if (!(carrier_freq_ - half_extent_ > 0.0))
            throw DomainError("BandSpec: carrier_freq - half_extent must be > 0");
    }

    // f_0 = 2.5 B unless given.
    static BandSpec with_default_extent(double carrier_freq, double bandwidth)
    {
        return BandSpec(carrier_freq, bandwidth, kDefaultExtentFactor * bandwidth);
    }
    static constexpr double kDefaultExtentFactor = 2.5;

    double carrier_freq() const { return carrier_freq_; }
    double bandwidth() const { return bandwidth_; }
    double half_extent() const { return half_extent_; }
    double main_lo() const { return carrier_freq_ - 0.5 * bandwidth_; }
    double main_hi() const { return carrier_freq_ + 0.5 * bandwidth_; }
    double range_lo() const { return carrier_freq_ - half_extent_; }
    double range_hi() const { return carrier_freq_ + half_extent_; }
    // Total width of D_SL.
    double side_width() const { return 2.0 * half_extent_ - bandwidth_; }

private:
    double carrier_freq_;
    double bandwidth_;
    double half_extent_;
};

// Classical matched beam at the carrier: phases 2*pi*f_c*m*d*theta0/c.
inline WeightVector fine_beam_weights(const ArrayConfig& cfg, double theta0)
{
    check_virtual_angle(theta0, "fine_beam_weights");
    const auto M = static_cast<Eigen::Index>(cfg.num_elements());
    const double step = 2.0 * std::numbers::pi * cfg.spatial_freq(cfg.carrier_freq(), theta0);
    const double r = 1.0 / std::sqrt(static_cast<double>(M));
    Eigen::VectorXcd w(M);
    for (Eigen::Index m = 0; m < M; ++m)
        w[m] = std::polar(r, step * static_cast<double>(m));
    return WeightVector(std::move(w));
}

// |w^H a|^2.
inline double beam_gain(const WeightVector& w, const SteeringVector& a)
{
    if (w.size() != a.size())
        throw DimensionError("beam_gain: weight and steering vector lengths differ");
    return std::norm(w.entries().dot(a.entries()));
}

// Closed-form gain of the fine beam for theta0 seen at frequency f:
// (1/M) sin^2(pi M delta) / sin^2(pi delta), delta = (f - f_c) d theta0 / c.
inline double dirichlet_gain(const ArrayConfig& cfg, double theta0, double f)
{
    const double M = static_cast<double>(cfg.num_elements());
    const double delta = (f - cfg.carrier_freq()) * cfg.element_spacing() * theta0 / cfg.wave_speed();
    const double frac = delta - std::round(delta);
    if (std::abs(frac) < 1e-12)
        return M;
    const double num = std::sin(std::numbers::pi * M * delta);
    const double den = std::sin(std::numbers::pi * delta);
    return num * num / (den * den * M);
}

// STBC virtual beam pattern (|w1^H a|^2 + |w2^H a|^2) / 2.
inline double virtual_beam_gain(const WeightVector& w1, const WeightVector& w2,
                                const SteeringVector& a)
{
    return 0.5 * (beam_gain(w1, a) + beam_gain(w2, a));
}

// Constant-modulus projection (1/sqrt(M)) exp(j arg u). Zero entries take phase 0.
inline WeightVector phase_projection(const Eigen::VectorXcd& u)
{
    const auto M = u.size();
    if (M < 2)
        throw DimensionError("phase_projection: need at least 2 entries");
    if (u.cwiseAbs().maxCoeff() == 0.0)
        throw DomainError("phase_projection: input vector is zero");
    const double r = 1.0 / std::sqrt(static_cast<double>(M));
    Eigen::VectorXcd w(M);
    for (Eigen::Index m = 0; m < M; ++m)
        w[m] = u[m] == cdouble(0.0, 0.0) ? cdouble(r, 0.0) : std::polar(r, std::arg(u[m]));
    return WeightVector(std::move(w));
}

} // namespace squintbf
