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

#include "squintbf/array_model.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace squintbf;

namespace {

const ArrayConfig kArray64 = ArrayConfig::half_wavelength(64, 28e9);

double wrap(double phase)
{
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(phase, two_pi);
    return r < 0.0 ? r + two_pi : r;
}

WeightVector random_weights(std::mt19937_64& rng, std::size_t M)
{
    std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
    std::vector<double> p(M);
    for (auto& x : p)
        x = ph(rng);
    return WeightVector::from_phases(p);
}

} // namespace

TEST(ArrayConfig, ValidatesGeometry)
{
    EXPECT_THROW(ArrayConfig(1, 0.005, 28e9), DomainError);
    EXPECT_THROW(ArrayConfig(8, 0.0, 28e9), DomainError);
    EXPECT_THROW(ArrayConfig(8, 0.005, -1.0), DomainError);
    const auto cfg = ArrayConfig::half_wavelength(8, 28e9);
    EXPECT_DOUBLE_EQ(cfg.element_spacing(), kSpeedOfLight / (2.0 * 28e9));
}

TEST(SteeringVector, ZeroAngleIsAllOnes)
{
    const auto a = steering_vector(kArray64, 27e9, 0.0);
    for (Eigen::Index m = 0; m < a.entries().size(); ++m)
        EXPECT_EQ(a.entries()[m], cdouble(1.0, 0.0));
}

TEST(SteeringVector, HalfWavelengthEndFire)
{
    const double f = 10e9;
    const ArrayConfig cfg(2, kSpeedOfLight / (2.0 * f), f);
    const auto a = steering_vector(cfg, f, 1.0);
    EXPECT_NEAR(std::abs(a.entries()[0] - cdouble(1.0, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a.entries()[1] - cdouble(-1.0, 0.0)), 0.0, 1e-15);
}

TEST(SteeringVector, PhaseProgressionAtCarrier)
{
    const auto a = steering_vector(kArray64, 28e9, 0.6);
    EXPECT_EQ(a.entries()[0], cdouble(1.0, 0.0));
    for (Eigen::Index m = 0; m < 64; ++m) {
        EXPECT_NEAR(std::abs(a.entries()[m]), 1.0, 1e-12);
        const double expected = std::polar(1.0, wrap(std::numbers::pi * 0.6 * static_cast<double>(m))).real();
        EXPECT_NEAR(a.entries()[m].real(), expected, 1e-12);
    }
}

TEST(SteeringVector, RejectsOutOfDomainArguments)
{
    EXPECT_THROW(steering_vector(kArray64, 28e9, 1.5), DomainError);
    EXPECT_THROW(steering_vector(kArray64, 0.0, 0.5), DomainError);
    EXPECT_THROW(steering_vector(kArray64, -1e9, 0.5), DomainError);
}

TEST(FineBeam, PeakGainIsM)
{
    for (double theta0 : {-0.9, -0.2, 0.0, 0.35, 0.6, 1.0}) {
        const auto w = fine_beam_weights(kArray64, theta0);
        const double g = beam_gain(w, steering_vector(kArray64, 28e9, theta0));
        EXPECT_NEAR(g, 64.0, 1e-10);
        EXPECT_NEAR(to_db(g), 18.0617997398388717, 1e-10);
    }
}

TEST(FineBeam, BroadsideIsUniform)
{
    const auto w = fine_beam_weights(kArray64, 0.0);
    for (Eigen::Index m = 0; m < 64; ++m)
        EXPECT_EQ(w.entries()[m], cdouble(0.125, 0.0));
}

// Closed-form reference: delta = 1.5/28 * 0.6 / 2, gain = 0.0492921072614953,
// 31.134 dB below the 64x peak (evaluated at 40 digits).
TEST(FineBeam, SquintAtBandEdges)
{
    const auto w = fine_beam_weights(kArray64, 0.6);
    for (double f : {29.5e9, 26.5e9}) {
        const double g = beam_gain(w, steering_vector(kArray64, f, 0.6));
        EXPECT_NEAR(g, 0.0492921072614953, 1e-12);
        EXPECT_NEAR(to_db(64.0) - to_db(g), 31.134025891325302, 1e-9);
    }
}

TEST(BeamGain, OrthogonalWeightsGiveZero)
{
    const auto a = steering_vector(kArray64, 28e9, 0.0);
    std::vector<double> ph(64, 0.0);
    for (std::size_t m = 32; m < 64; ++m)
        ph[m] = std::numbers::pi;
    EXPECT_NEAR(beam_gain(WeightVector::from_phases(ph), a), 0.0, 1e-26);
}

TEST(BeamGain, DimensionMismatchThrows)
{
    const auto a = steering_vector(ArrayConfig::half_wavelength(8, 28e9), 28e9, 0.3);
    EXPECT_THROW(beam_gain(fine_beam_weights(kArray64, 0.3), a), DimensionError);
}

TEST(Dirichlet, CoherentLimit)
{
    EXPECT_EQ(dirichlet_gain(kArray64, 0.6, 28e9), 64.0);
    EXPECT_EQ(dirichlet_gain(kArray64, 0.0, 35e9), 64.0);
}

TEST(Dirichlet, BandEdgeValueAndSymmetry)
{
    const double hi = dirichlet_gain(kArray64, 0.6, 29.5e9);
    const double lo = dirichlet_gain(kArray64, 0.6, 26.5e9);
    EXPECT_NEAR(hi, 0.0492921072614953, 1e-13);
    EXPECT_NEAR(hi, lo, 1e-15);
}

TEST(Dirichlet, MatchesDirectEvaluation)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> th(-1.0, 1.0), fr(20e9, 36e9);
    for (int i = 0; i < 1000; ++i) {
        const double theta0 = th(rng), f = fr(rng);
        const double expected = beam_gain(fine_beam_weights(kArray64, theta0), steering_vector(kArray64, f, theta0));
        const double got = dirichlet_gain(kArray64, theta0, f);
        EXPECT_LE(std::abs(got - expected), 1e-9 * expected) << "theta0=" << theta0 << " f=" << f;
    }
}

TEST(VirtualBeamGain, ReducesToBeamGain)
{
    std::mt19937_64 rng(1);
    const auto w = random_weights(rng, 64);
    const auto a = steering_vector(kArray64, 27.3e9, 0.41);
    EXPECT_DOUBLE_EQ(virtual_beam_gain(w, w, a), beam_gain(w, a));
}

TEST(VirtualBeamGain, MirroredFineBeams)
{
    // |sum_m exp(j 1.2 pi m)|^2 / 64 = 1/64 by direct summation.
    const auto a = steering_vector(kArray64, 28e9, 0.6);
    const double g = virtual_beam_gain(fine_beam_weights(kArray64, 0.6), fine_beam_weights(kArray64, -0.6), a);
    EXPECT_NEAR(g, 32.0078125, 1e-10);
}

TEST(VirtualBeamGain, BothBranchesNull)
{
    const auto a = steering_vector(kArray64, 28e9, 0.0);
    std::vector<double> p1(64, 0.0), p2(64, 0.0);
    for (std::size_t m = 0; m < 64; ++m) {
        p1[m] = m % 2 ? std::numbers::pi : 0.0;
        p2[m] = m < 32 ? 0.0 : std::numbers::pi;
    }
    EXPECT_NEAR(virtual_beam_gain(WeightVector::from_phases(p1), WeightVector::from_phases(p2), a), 0.0, 1e-26);
}

TEST(PhaseProjection, Conventions)
{
    Eigen::VectorXcd u = Eigen::VectorXcd::Constant(16, cdouble(3.0, 0.0));
    const auto w = phase_projection(u);
    for (Eigen::Index m = 0; m < 16; ++m)
        EXPECT_NEAR(std::abs(w.entries()[m] - cdouble(0.25, 0.0)), 0.0, 1e-15);

    u[5] = 0.0;
    u[6] = cdouble(0.0, -2.0);
    const auto w2 = phase_projection(u);
    EXPECT_EQ(w2.entries()[5], cdouble(0.25, 0.0));
    EXPECT_NEAR(std::abs(w2.entries()[6] - cdouble(0.0, -0.25)), 0.0, 1e-15);

    EXPECT_THROW(phase_projection(Eigen::VectorXcd::Zero(16)), DomainError);
}

TEST(PhaseProjection, GlobalScalingOnlyRotates)
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXcd v(64);
    for (auto& x : v)
        x = cdouble(n(rng), n(rng));
    const cdouble c = std::polar(3.7, 1.1);
    const auto pv = phase_projection(v), pc = phase_projection(c * v);
    for (Eigen::Index m = 0; m < 64; ++m)
        EXPECT_NEAR(std::abs(pc.entries()[m] - std::polar(1.0, 1.1) * pv.entries()[m]), 0.0, 1e-14);
    const auto a = steering_vector(kArray64, 29e9, -0.3);
    EXPECT_NEAR(beam_gain(pc, a), beam_gain(pv, a), 1e-12);
}

TEST(WeightVector, RejectsWrongModulus)
{
    Eigen::VectorXcd w = Eigen::VectorXcd::Constant(4, cdouble(0.5, 0.0));
    EXPECT_NO_THROW(WeightVector{w});
    w[2] = 0.51;
    EXPECT_THROW(WeightVector{w}, DomainError);
}

TEST(ArrayProperties, GainBoundsAndInvariances)
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> th(-1.0, 1.0), fr(20e9, 36e9), ph(-3.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        const auto w = random_weights(rng, 64);
        const double f = fr(rng), theta = th(rng), theta0 = th(rng);
        const auto a = steering_vector(kArray64, f, theta);
        const double g = beam_gain(w, a);
        EXPECT_GE(g, 0.0);
        EXPECT_LE(g, 64.0 + 1e-9);

        const WeightVector rotated(std::polar(1.0, ph(rng)) * w.entries());
        EXPECT_NEAR(beam_gain(rotated, a), g, 1e-11 * (1.0 + g));

        const double left = beam_gain(fine_beam_weights(kArray64, theta0), a);
        const double right = beam_gain(fine_beam_weights(kArray64, -theta0), steering_vector(kArray64, f, -theta));
        EXPECT_NEAR(left, right, 1e-11 * (1.0 + left));

        const auto w2 = random_weights(rng, 64);
        EXPECT_EQ(virtual_beam_gain(w, w2, a), 0.5 * (beam_gain(w, a) + beam_gain(w2, a)));
    }
}

TEST(BandSpec, Validation)
{
    EXPECT_THROW(BandSpec(28e9, 0.0, 1e9), DomainError);
    EXPECT_THROW(BandSpec(28e9, 3e9, 1e9), DomainError);
    EXPECT_THROW(BandSpec(28e9, 3e9, 30e9), DomainError);
    const auto b = BandSpec::with_default_extent(28e9, 3e9);
    EXPECT_DOUBLE_EQ(b.half_extent(), 7.5e9);
    EXPECT_DOUBLE_EQ(b.main_lo(), 26.5e9);
    EXPECT_DOUBLE_EQ(b.side_width(), 12e9);
}
