// SPDX-License-Identifier: Apache-2.0
//
// cjt-precode: decentralized coherent joint transmission precoding
// Copyright (C) 2026 The cjt-precode Authors
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

#include "cjt/bench.hpp"
#include "cjt/de.hpp"
#include "cjt/errors.hpp"
#include "cjt/io.hpp"

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace cjt;

namespace
{
    void setup_logging()
    {
        auto logger = spdlog::stderr_color_mt("precode");
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
        spdlog::set_level(spdlog::level::info);
        if (const char *env = std::getenv("PRECODE_LOG"))
            spdlog::cfg::helpers::load_levels(env);
    }

    bench::ExperimentSpec load(const std::string &path, const std::vector<std::string> &overrides)
    {
        auto spec = bench::load_spec(path);
        for (const auto &o : overrides)
            bench::apply_override(spec, o);
        return spec;
    }

    void describe(const bench::ExperimentSpec &spec)
    {
        std::size_t rows = spec.n_tx.size() * spec.seeds.size() * spec.alpha.size() * spec.beta.size() *
                           spec.schemes.size();
        std::cout << "network: " << spec.n_bs << " BSs, " << spec.n_ue << " UEs\n"
                  << "schemes:";
        for (auto s : spec.schemes)
            std::cout << ' ' << bench::to_string(s);
        std::cout << "\nnoise: " << to_string(spec.noise_mode) << " at " << spec.snr_db << " dB\n"
                  << "rows: " << rows << '\n';
    }

    int cmd_run(const std::string &path, const std::vector<std::string> &overrides, unsigned jobs,
                const std::string &out_dir, std::uint64_t seed_offset)
    {
        const auto spec = load(path, overrides);
        const fs::path dir = out_dir.empty() ? fs::path(spec.output) : fs::path(out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw IoError("Cannot create " + dir.string() + ": " + ec.message());

        spdlog::info("running {} with {} job(s), noise mode {}", path, jobs, to_string(spec.noise_mode));
        const auto result = bench::run_experiment(spec, jobs, seed_offset);
        bench::emit_csv(result.rows, dir / "results.csv");
        bench::emit_json(result.rows, dir / "results.json");

        spdlog::info("{} rows, {} failed, DE cache {} hit(s) / {} miss(es)", result.rows.size(), result.failed(),
                     result.de_cache_hits, result.de_cache_misses);
        if (result.foreign_reads() > 0)
            spdlog::error("per-BS solves read {} foreign channel vector(s)", result.foreign_reads());
        spdlog::info("wrote {}", (dir / "results.csv").string());
        return result.failed() > 0 || result.foreign_reads() > 0 ? 2 : 0;
    }

    int cmd_de_bounds(const std::string &cov_path, const std::string &gamma_path, double sigma2, double alpha,
                      const std::string &state_path)
    {
        const auto cov = io::covariance_from_document(io::read_json(cov_path));
        const auto targets = io::targets_from_document(io::read_json(gamma_path));
        if (sigma2 <= 0.0)
            sigma2 = targets.sigma2;
        if (sigma2 <= 0.0)
            throw SpecError("No noise power: pass --sigma2 or put sigma2 in the targets file.");
        targets.gamma.validate(cov.topology);

        const auto state = de_interference_bounds(cov.cov, targets.gamma, sigma2, cov.topology, {}, alpha);
        if (!state_path.empty())
            io::write_json(state_path, io::de_state_document(state));
        std::cout << io::bounds_document(state.bounds).dump(1) << '\n';
        return 0;
    }

    int cmd_instance(const std::string &path, const std::vector<std::string> &overrides, std::uint64_t seed,
                     std::size_t n_tx, const std::string &out_dir)
    {
        const auto spec = load(path, overrides);
        const auto topo = Topology::build(spec.n_bs, spec.n_ue, n_tx ? n_tx : spec.n_tx.front(),
                                          spec.serving.empty() ? overlapping_line_layout(spec.n_bs, spec.n_ue)
                                                               : spec.serving);
        const auto cov = synth_covariance(topo, spec.corr, spec.placement, spec.placement_seed.value_or(seed));
        const auto ch = draw_channel(cov, {seed, 0});
        const auto noise = spec.sigma2 ? NoiseModel{*spec.sigma2, spec.snr_db, spec.noise_mode}
                                       : calibrate_noise(ch, topo, spec.snr_db, spec.noise_mode);
        TargetSinr gamma;
        if (spec.targets == bench::TargetSource::Wmmse)
            gamma = wmmse_targets(ch, topo, noise, spec.wmmse).targets;
        else
            gamma.gamma.assign(topo.n_pairs(), spec.target_sinr);

        const fs::path dir(out_dir);
        fs::create_directories(dir);
        io::write_json(dir / "covariance.json", io::covariance_document(topo, cov));
        io::write_json(dir / "channels.json", io::channel_document(topo, ch));
        io::write_json(dir / "targets.json", io::targets_document(gamma, noise.sigma2));
        spdlog::info("wrote covariance.json, channels.json and targets.json to {}", dir.string());
        return 0;
    }
}

int main(int argc, char **argv)
{
    setup_logging();

    CLI::App app{"Decentralized CJT precoding experiments"};
    app.require_subcommand(1);

    std::string spec_path;
    std::vector<std::string> overrides;
    unsigned jobs = 1;
    std::string out_dir;
    std::uint64_t seed_offset = 0;

    auto *run = app.add_subcommand("run", "Run an experiment spec and write results.csv / results.json");
    run->add_option("spec", spec_path, "Experiment spec file")->required();
    run->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--out,-o", out_dir, "Output directory (default: the spec's output key)");
    run->add_option("--seed-offset", seed_offset, "Added to every seed");
    run->add_option("--set", overrides, "Override a spec key, e.g. --set snr_db=15");

    auto *validate = app.add_subcommand("validate", "Parse and check a spec without running it");
    validate->add_option("spec", spec_path, "Experiment spec file")->required();
    validate->add_option("--set", overrides, "Override a spec key");

    std::string cov_path, gamma_path, state_path;
    double sigma2 = 0.0;
    double alpha = 1.0;
    auto *de = app.add_subcommand("de-bounds", "Interference bounds from covariances and targets");
    de->add_option("cov", cov_path, "Covariance document")->required()->check(CLI::ExistingFile);
    de->add_option("--gamma", gamma_path, "Targets document")->required()->check(CLI::ExistingFile);
    de->add_option("--sigma2", sigma2, "Noise power (overrides the targets file)");
    de->add_option("--alpha", alpha, "Scale applied to the bounds")->check(CLI::PositiveNumber);
    de->add_option("--state", state_path, "Also write the full DE state here");

    std::uint64_t seed = 1;
    std::size_t n_tx = 0;
    std::string inst_dir = ".";
    auto *inst = app.add_subcommand("instance", "Write covariance, channel and target documents for one seed");
    inst->add_option("spec", spec_path, "Experiment spec file")->required();
    inst->add_option("--seed", seed, "Seed");
    inst->add_option("--n-tx", n_tx, "Antenna count (default: first n_tx of the spec)");
    inst->add_option("--out,-o", inst_dir, "Output directory");
    inst->add_option("--set", overrides, "Override a spec key");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try
    {
        if (*run)
            return cmd_run(spec_path, overrides, jobs, out_dir, seed_offset);
        if (*validate)
        {
            describe(load(spec_path, overrides));
            std::cout << "ok\n";
            return 0;
        }
        if (*de)
            return cmd_de_bounds(cov_path, gamma_path, sigma2, alpha, state_path);
        if (*inst)
            return cmd_instance(spec_path, overrides, seed, n_tx, inst_dir);
    }
    catch (const std::exception &e)
    {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
