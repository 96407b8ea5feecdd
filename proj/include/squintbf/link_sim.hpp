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

// Wideband line-of-sight link evaluation: per-subcarrier SNR and Shannon
// throughput for the fine beam and for designed beamformers.

#pragma once

#include "squintbf/array_model.hpp"
#include "squintbf/sdr_design.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace squintbf {

// dBm/Hz to W/Hz.
inline double dbm_per_hz_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct LinkParams {
    explicit LinkParams(BandSpec b, double focus = 0.0) : band(b), theta0(focus) {}

    double tx_power = 2e-4;                          // W
    double noise_psd = dbm_per_hz_to_watts(-74.0);   // W/Hz
    std::size_t n_subcarriers = 256;
    BandSpec band;
    double theta0 = 0.0;

    void validate() const
    {
        if (!(tx_power > 0.0))
            throw DomainError("LinkParams: tx_power must be > 0");
        if (!(noise_psd > 0.0))
            throw DomainError("LinkParams: noise_psd must be > 0");
        if (n_subcarriers < 2)
            throw DomainError("LinkParams: need at least 2 subcarriers");
        check_virtual_angle(theta0, "LinkParams");
    }

    // Subchannel centers f_c - B/2 + (n + 1/2) B / N.
    std::vector<double> subcarriers() const
    {
        std::vector<double> f(n_subcarriers);
        const double B = band.bandwidth();
        for (std::size_t i = 0; i < n_subcarriers; ++i)
            f[i] = band.main_lo() + (static_cast<double>(i) + 0.5) * B / static_cast<double>(n_subcarriers);
        return f;
    }
};

enum class Scheme { FineBeam, Direct, Diversity };

inline const char* to_string(Scheme s)
{
    switch (s) {
    case Scheme::FineBeam: return "FineBeam";
    case Scheme::Direct: return "Direct";
    case Scheme::Diversity: return "Diversity";
    }
    return "?";
}

struct ThroughputReport {
    std::vector<double> per_subcarrier_snr;
    double total_bps = 0.0;
    Scheme scheme_label = Scheme::FineBeam;
};

// The LoS channel towards theta0 is the steering vector itself.
inline SteeringVector los_channel(const ArrayConfig& cfg, double f, double theta0)
{
    return steering_vector(cfg, f, theta0);
}

struct FineBeam {
    double theta0 = 0.0;
};

using Transmission = std::variant<FineBeam, DesignOutcome>;

// Equal power over N subcarriers against noise N0 B / N per subcarrier:
// snr_n = P gain_n / (N0 B); total = sum_n (B/N) log2(1 + snr_n).
template <typename GainFn>
ThroughputReport throughput_from_gains(GainFn&& gain_at, const LinkParams& params, Scheme label)
{
    params.validate();
    const double B = params.band.bandwidth();
    const double scale = params.tx_power / (params.noise_psd * B);
    const double sub_bw = B / static_cast<double>(params.n_subcarriers);
    ThroughputReport rep;
    rep.scheme_label = label;
    for (double f : params.subcarriers()) {
        const double snr = scale * gain_at(f);
        rep.per_subcarrier_snr.push_back(snr);
        rep.total_bps += sub_bw * std::log2(1.0 + snr);
    }
    return rep;
}

inline ThroughputReport throughput(const ArrayConfig& cfg, const Transmission& tx, const LinkParams& params)
{
    if (const auto* fb = std::get_if<FineBeam>(&tx)) {
        const WeightVector w = fine_beam_weights(cfg, fb->theta0);
        return throughput_from_gains(
            [&](double f) { return beam_gain(w, los_channel(cfg, f, params.theta0)); }, params,
            Scheme::FineBeam);
    }
    const auto& out = std::get<DesignOutcome>(tx);
    return throughput_from_gains(
        [&](double f) { return outcome_gain(out, los_channel(cfg, f, params.theta0)); }, params,
        out.is_direct() ? Scheme::Direct : Scheme::Diversity);
}

struct SweepRow {
    double theta0 = 0.0;
    double fine_bps = std::numeric_limits<double>::quiet_NaN();
    double proposed_bps = std::numeric_limits<double>::quiet_NaN();
    double improvement_pct = std::numeric_limits<double>::quiet_NaN();
    std::optional<Scheme> mode;
    std::string error;

    bool ok() const { return error.empty(); }
};

// For each beam focus: design with `spec_template` re-aimed at theta0,
// evaluate fine and proposed throughput over `params.band`. A failed design
// is recorded in its row and the sweep moves on.
inline std::vector<SweepRow> sweep_focus(const std::vector<double>& theta_grid, const DesignSpec& spec_template,
                                         const LinkParams& params)
{
    std::vector<SweepRow> rows;
    for (double theta0 : theta_grid) {
        SweepRow row;
        row.theta0 = theta0;
        try {
            if (!(theta0 > 0.0 && theta0 < 1.0))
                throw DomainError("sweep_focus: beam focus must lie in (0, 1)");
            DesignSpec spec = spec_template;
            spec.beam_focus = theta0;
            LinkParams lp = params;
            lp.theta0 = theta0;
            row.fine_bps = throughput(spec.array, FineBeam{theta0}, lp).total_bps;
            const DesignOutcome out = run_algorithm1(spec);
            const ThroughputReport rep = throughput(spec.array, out, lp);
            row.proposed_bps = rep.total_bps;
            row.mode = rep.scheme_label;
            row.improvement_pct = 100.0 * (row.proposed_bps - row.fine_bps) / row.fine_bps;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace squintbf
