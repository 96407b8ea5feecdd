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

// Run configuration for the command-line tool: flat `key = value` text,
// one entry per line, `#` starts a comment.

#pragma once

#include "squintbf/array_model.hpp"
#include "squintbf/conic_solver.hpp"
#include "squintbf/link_sim.hpp"
#include "squintbf/sdr_design.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace squintbf {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // Array.
    std::size_t num_elements = 64;
    double carrier_freq_hz = 28e9;
    std::optional<double> element_spacing_m;  // half wavelength at the carrier if unset
    double wave_speed = kSpeedOfLight;
    // Band.
    double bandwidth_hz = 3e9;
    std::optional<double> half_extent_hz;     // 2.5 * bandwidth if unset
    // Design.
    double beam_focus = 0.6;
    double ripple_db = 5.0;
    double leakage_ratio = 0.1;
    double eigen_threshold = 0.1;
    std::size_t n_main_samples = 192;
    std::size_t n_side_samples = 128;
    conic::SolverMethod solver = conic::SolverMethod::InteriorPoint;
    double solver_tol = 1e-7;
    std::size_t solver_max_iters = 50000;
    // Link.
    double tx_power_w = 2e-4;
    double noise_psd_dbm_hz = -74.0;
    std::size_t n_subcarriers = 256;
    // Commands.
    std::size_t pattern_points = 2001;
    std::vector<double> sweep_theta = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
    std::uint64_t seed = 1;

    ArrayConfig array() const
    {
        return element_spacing_m ? ArrayConfig(num_elements, *element_spacing_m, carrier_freq_hz, wave_speed)
                                 : ArrayConfig::half_wavelength(num_elements, carrier_freq_hz, wave_speed);
    }

    BandSpec band() const
    {
        return half_extent_hz ? BandSpec(carrier_freq_hz, bandwidth_hz, *half_extent_hz)
                              : BandSpec::with_default_extent(carrier_freq_hz, bandwidth_hz);
    }

    conic::SolverSettings solver_settings() const
    {
        conic::SolverSettings s;
        s.tol = solver_tol;
        s.max_iters = solver_max_iters;
        s.method = solver;
        return s;
    }

    DesignSpec design() const
    {
        DesignSpec d{array(), band(), beam_focus};
        d.ripple_db = ripple_db;
        d.leakage_ratio = leakage_ratio;
        d.eigen_threshold = eigen_threshold;
        d.n_main_samples = n_main_samples;
        d.n_side_samples = n_side_samples;
        d.solver = solver_settings();
        return d;
    }

    LinkParams link() const
    {
        LinkParams p(band(), beam_focus);
        p.tx_power = tx_power_w;
        p.noise_psd = dbm_per_hz_to_watts(noise_psd_dbm_hz);
        p.n_subcarriers = n_subcarriers;
        return p;
    }

    // Every derived object is constructed and validated; any failure is a
    // ConfigError so nothing runs on a bad configuration.
    void validate() const
    {
        try {
            design().validate();
            assemble_problem(design());
            link().validate();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        if (!(solver_tol > 0.0))
            throw ConfigError("solver_tol must be > 0");
        if (solver_max_iters == 0)
            throw ConfigError("solver_max_iters must be >= 1");
        if (pattern_points == 1)
            throw ConfigError("pattern_points must be 0 or >= 2");
        for (double t : sweep_theta)
            if (!(t > 0.0 && t < 1.0))
                throw ConfigError("sweep_theta entries must lie in (0, 1)");
    }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view v)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError("not a finite number: '" + std::string(v) + "'");
    return out;
}

inline std::uint64_t parse_uint(std::string_view v)
{
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("not a non-negative integer: '" + std::string(v) + "'");
    return out;
}

inline std::vector<double> parse_list(std::string_view v)
{
    std::vector<double> out;
    if (v.empty())
        return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = v.find(',', start);
        out.push_back(parse_double(trim(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start))));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

} // namespace detail

inline RunConfig parse_config(std::string_view text)
{
    RunConfig cfg;
    using Setter = std::function<void(RunConfig&, std::string_view)>;
    auto dbl = [](double RunConfig::*m) { return Setter([m](RunConfig& c, std::string_view v) { c.*m = detail::parse_double(v); }); };
    auto opt = [](std::optional<double> RunConfig::*m) {
        return Setter([m](RunConfig& c, std::string_view v) { c.*m = detail::parse_double(v); });
    };
    auto cnt = [](std::size_t RunConfig::*m) {
        return Setter([m](RunConfig& c, std::string_view v) { c.*m = static_cast<std::size_t>(detail::parse_uint(v)); });
    };
    const std::map<std::string, Setter, std::less<>> setters = {
        {"num_elements", cnt(&RunConfig::num_elements)},
        {"carrier_freq_hz", dbl(&RunConfig::carrier_freq_hz)},
        {"element_spacing_m", opt(&RunConfig::element_spacing_m)},
        {"wave_speed", dbl(&RunConfig::wave_speed)},
        {"bandwidth_hz", dbl(&RunConfig::bandwidth_hz)},
        {"half_extent_hz", opt(&RunConfig::half_extent_hz)},
        {"beam_focus", dbl(&RunConfig::beam_focus)},
        {"ripple_db", dbl(&RunConfig::ripple_db)},
        {"leakage_ratio", dbl(&RunConfig::leakage_ratio)},
        {"eigen_threshold", dbl(&RunConfig::eigen_threshold)},
        {"n_main_samples", cnt(&RunConfig::n_main_samples)},
        {"n_side_samples", cnt(&RunConfig::n_side_samples)},
        {"solver", [](RunConfig& c, std::string_view v) {
             if (v == "interior_point")
                 c.solver = conic::SolverMethod::InteriorPoint;
             else if (v == "splitting")
                 c.solver = conic::SolverMethod::Splitting;
             else
                 throw ConfigError("solver must be interior_point or splitting");
         }},
        {"solver_tol", dbl(&RunConfig::solver_tol)},
        {"solver_max_iters", cnt(&RunConfig::solver_max_iters)},
        {"tx_power_w", dbl(&RunConfig::tx_power_w)},
        {"noise_psd_dbm_hz", dbl(&RunConfig::noise_psd_dbm_hz)},
        {"n_subcarriers", cnt(&RunConfig::n_subcarriers)},
        {"pattern_points", cnt(&RunConfig::pattern_points)},
        {"sweep_theta", [](RunConfig& c, std::string_view v) { c.sweep_theta = detail::parse_list(v); }},
        {"seed", [](RunConfig& c, std::string_view v) { c.seed = detail::parse_uint(v); }},
    };

    std::map<std::string, std::size_t, std::less<>> seen;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (eq == std::string_view::npos)
            throw ConfigError(where + "expected 'key = value'");
        const std::string_view key = detail::trim(line.substr(0, eq));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError(where + "unknown key '" + std::string(key) + "'");
        if (const auto prev = seen.find(key); prev != seen.end())
            throw ConfigError(where + "duplicate key '" + std::string(key) + "' (first set on line " +
                              std::to_string(prev->second) + ")");
        seen.emplace(std::string(key), lineno);
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + std::string(key) + ": " + e.what());
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace squintbf
