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

// Subcommands of the squintbf tool. Each one computes everything in memory
// and only then writes its files, so a failure leaves no partial output.
//
// Exit codes: 0 ok, 1 config, 2 I/O, 3 solver/design failure, 4 selftest.

#pragma once

#include "squintbf/config.hpp"
#include "squintbf/link_sim.hpp"
#include "squintbf/sdr_design.hpp"
#include "squintbf/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace squintbf {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitIo = 2, kExitSolver = 3, kExitSelftest = 4 };

// Shortest text that is still exact: 17 significant digits, fixed spellings
// for non-finite values.
inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ", ";
        out += format_number(v[i]);
    }
    return out;
}

using OutputFile = std::pair<std::string, std::string>;  // file name, contents

class OutputDir {
public:
    explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir))
    {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_))
            throw IoError("cannot create output directory " + dir_.string());
    }

    const std::filesystem::path& path() const { return dir_; }

    void write(const std::vector<OutputFile>& files) const
    {
        for (const auto& [name, contents] : files) {
            const auto p = dir_ / name;
            std::ofstream out(p, std::ios::binary | std::ios::trunc);
            out << contents;
            out.flush();
            if (!out)
                throw IoError("cannot write " + p.string());
        }
    }

private:
    std::filesystem::path dir_;
};

inline std::vector<double> pattern_thetas(std::size_t n)
{
    std::vector<double> t;
    if (n < 2)
        return t;
    const double d = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        t.push_back((2.0 * static_cast<double>(i) - d) / d);
    return t;
}

inline const char* to_string(conic::SolverMethod m)
{
    return m == conic::SolverMethod::Splitting ? "splitting" : "interior_point";
}

// Gain in dB of the fine beam and of the designed beamformer(s) over
// theta in [-1, 1] at the lower band edge, the carrier and the upper edge.
inline std::string pattern_csv(const RunConfig& cfg, const DesignOutcome& design)
{
    const ArrayConfig arr = cfg.array();
    const BandSpec band = cfg.band();
    const WeightVector fine = fine_beam_weights(arr, cfg.beam_focus);
    std::string out = "theta,freq_hz,gain_db_fine,gain_db_proposed\n";
    const auto thetas = pattern_thetas(cfg.pattern_points);
    for (double f : {band.main_lo(), band.carrier_freq(), band.main_hi()})
        for (double th : thetas) {
            const SteeringVector a = steering_vector(arr, f, th);
            out += format_number(th) + "," + format_number(f) + "," + format_number(to_db(beam_gain(fine, a))) +
                   "," + format_number(to_db(outcome_gain(design, a))) + "\n";
        }
    return out;
}

// Plain-text record of a design, one `key = value` per line. Lists are
// comma separated; phases are in degrees, eigenvector indices 0-based.
inline std::string design_artifact(const RunConfig& cfg, const DesignOutcome& d)
{
    auto degrees = [](const WeightVector& w) {
        std::vector<double> p = w.phases();
        for (auto& x : p)
            x *= 180.0 / std::numbers::pi;
        return p;
    };
    std::string out = "# squintbf design\n";
    auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    kv("num_elements", std::to_string(cfg.num_elements));
    kv("carrier_freq_hz", format_number(cfg.carrier_freq_hz));
    kv("bandwidth_hz", format_number(cfg.bandwidth_hz));
    kv("half_extent_hz", format_number(cfg.band().half_extent()));
    kv("beam_focus", format_number(cfg.beam_focus));
    kv("mode", d.is_direct() ? "Direct" : "Diversity");
    if (const auto* dm = std::get_if<DirectMode>(&d.mode)) {
        kv("phases_deg", format_list(degrees(dm->w)));
    } else {
        const auto& dv = std::get<DiversityMode>(d.mode);
        kv("eigenvector_indices", std::to_string(dv.first) + ", " + std::to_string(dv.second));
        kv("phases_w1_deg", format_list(degrees(dv.w1)));
        kv("phases_w2_deg", format_list(degrees(dv.w2)));
    }
    kv("effective_rank", std::to_string(d.effective_rank));
    kv("eigen_threshold", format_number(cfg.eigen_threshold));
    kv("eigenvalues", format_list(d.eigenvalues));
    kv("relaxation_objective", format_number(d.relaxation_objective));
    kv("gamma", format_number(d.gamma_star));
    kv("achieved_ripple_db", format_number(d.achieved_ripple_db));
    kv("achieved_leakage_ratio", format_number(d.achieved_leakage_ratio));
    kv("solver_method", to_string(cfg.solver));
    kv("solver_status", conic::to_string(d.solver_status));
    kv("solver_iterations", std::to_string(d.solver_iterations));
    kv("primal_residual", format_number(d.primal_residual));
    kv("dual_residual", format_number(d.dual_residual));
    return out;
}

// Gain at the beam focus across the whole design range.
inline std::string design_gain_csv(const RunConfig& cfg, const DesignOutcome& d, std::size_t n = 1001)
{
    const ArrayConfig arr = cfg.array();
    const BandSpec band = cfg.band();
    const WeightVector fine = fine_beam_weights(arr, cfg.beam_focus);
    std::string out = "freq_hz,gain_db_fine,gain_db_proposed\n";
    for (double f : detail::linspace(band.range_lo(), band.range_hi(), n)) {
        const SteeringVector a = steering_vector(arr, f, cfg.beam_focus);
        out += format_number(f) + "," + format_number(to_db(beam_gain(fine, a))) + "," +
               format_number(to_db(outcome_gain(d, a))) + "\n";
    }
    return out;
}

inline std::string throughput_csv(const std::vector<SweepRow>& rows)
{
    std::string out = "theta0,fine_bps,proposed_bps,improvement_pct\n";
    for (const auto& r : rows)
        out += format_number(r.theta0) + "," + format_number(r.fine_bps) + "," + format_number(r.proposed_bps) +
               "," + format_number(r.improvement_pct) + "\n";
    return out;
}

inline std::string selftest_text(const SelftestReport& rep)
{
    std::string out;
    for (const auto& c : rep.checks)
        out += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
    return out;
}

// The commands below take an already validated config. Design failures
// surface as DesignError and are mapped to exit 3 by the caller.

inline int cmd_pattern(const RunConfig& cfg, const OutputDir& out)
{
    const DesignOutcome d = run_algorithm1(cfg.design());
    out.write({{"pattern.csv", pattern_csv(cfg, d)}});
    return kExitOk;
}

inline int cmd_design(const RunConfig& cfg, const OutputDir& out)
{
    const DesignOutcome d = run_algorithm1(cfg.design());
    out.write({{"design.txt", design_artifact(cfg, d)}, {"design_gain.csv", design_gain_csv(cfg, d)}});
    return kExitOk;
}

inline int cmd_throughput(const RunConfig& cfg, const OutputDir& out, std::ostream& log = std::cerr)
{
    const auto rows = sweep_focus(cfg.sweep_theta, cfg.design(), cfg.link());
    std::size_t ok = 0;
    for (const auto& r : rows) {
        if (r.ok())
            ++ok;
        else
            log << "warning: theta0 = " << format_number(r.theta0) << ": " << r.error << "\n";
    }
    out.write({{"throughput.csv", throughput_csv(rows)}});
    return ok > 0 || rows.empty() ? kExitOk : kExitSolver;
}

inline int cmd_selftest(const RunConfig& cfg, const OutputDir* out, std::ostream& log = std::cout)
{
    const SelftestReport rep = run_selftest(cfg.array(), cfg.band(), cfg.solver_settings(), cfg.seed);
    const std::string text = selftest_text(rep);
    if (out)
        out->write({{"selftest.txt", text}});
    log << text;
    return rep.all_passed() ? kExitOk : kExitSelftest;
}

} // namespace squintbf
