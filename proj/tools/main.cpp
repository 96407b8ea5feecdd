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

#include "squintbf/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, bool out_given)
{
    using namespace squintbf;
    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed)
            cfg.seed = *seed;
        cfg.validate();
        if (command == "selftest") {
            if (!out_given)
                return cmd_selftest(cfg, nullptr);
            const OutputDir out(out_dir);
            return cmd_selftest(cfg, &out);
        }
        const OutputDir out(out_dir);
        if (command == "pattern")
            return cmd_pattern(cfg, out);
        if (command == "design")
            return cmd_design(cfg, out);
        return cmd_throughput(cfg, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "design failed: " << e.what() << "\n";
        return kExitSolver;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Squint-compensating analog beamformer design"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed_value = 0;
    app.add_option("--config", config_path, "key = value configuration file");
    auto* out_opt = app.add_option("--out", out_dir, "output directory (created if missing)");
    auto* seed_opt = app.add_option("--seed", seed_value, "RNG seed, overrides the config");

    for (const char* name : {"pattern", "design", "throughput", "selftest"})
        app.add_subcommand(name)->fallthrough();
    app.get_subcommand("pattern")->description("beam gain over angle at the band edges and carrier");
    app.get_subcommand("design")->description("solve the relaxation and write the design artifact");
    app.get_subcommand("throughput")->description("fine beam vs designed throughput over the focus grid");
    app.get_subcommand("selftest")->description("run the oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : squintbf::kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    std::optional<std::uint64_t> seed;
    if (seed_opt->count())
        seed = seed_value;
    return run(command, config_path, out_dir, seed, out_opt->count() > 0);
}
