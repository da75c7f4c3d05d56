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

#ifndef CJT_BENCH_HPP
#define CJT_BENCH_HPP

#include "cjt/admm.hpp"
#include "cjt/baselines.hpp"
#include "cjt/de.hpp"
#include "cjt/net_model.hpp"
#include "cjt/udd.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cjt::bench
{
    enum class Scheme
    {
        Udd,       // centralized oracle
        DeAdmm,    // DE bounds + single-pass CCCP-ADMM
        Reference, // DE bounds + long-run CCCP-ADMM
        ExactAdmm, // exact bounds + long-run CCCP-ADMM
        ZfCentral,
        ZfLocal,
        Wmmse
    };

    const char *to_string(Scheme s);
    Scheme scheme_from_string(const std::string &s); // throws SpecError

    enum class CompareMode
    {
        Rate,  // every scheme normalized to p_total
        Power  // every scheme scaled to the zf-central rate at p_total
    };

    enum class TargetSource
    {
        Wmmse,
        Constant
    };

    struct ExperimentSpec
    {
        Index n_bs = 3;
        Index n_ue = 12;
        std::vector<std::vector<Index>> serving; // empty: overlapping line layout
        std::vector<Index> n_tx{16};
        std::vector<Scheme> schemes{Scheme::Udd, Scheme::DeAdmm, Scheme::ZfCentral, Scheme::ZfLocal};
        std::vector<std::uint64_t> seeds{1};

        double snr_db = 20.0;
        NoiseNormalization noise_mode = NoiseNormalization::Literal;
        std::optional<double> sigma2; // fixed noise power instead of calibration
        double p_total = 10.0;
        std::vector<double> alpha{1.0};
        std::vector<double> beta{1.0};

        double corr = 0.5;
        Placement placement;
        // One UE drop shared by every seed; channel draws still follow the seed
        std::optional<std::uint64_t> placement_seed;

        TargetSource targets = TargetSource::Wmmse;
        double target_sinr = 1.0;

        WmmseConfig wmmse;
        UddConfig udd;
        DeConfig de;
        SolverConfig solver;
        SolverConfig reference = long_run();

        CompareMode mode = CompareMode::Rate;
        double rate_tol = 1e-3;

        bool record_timing = true;
        std::string output = "results";

        // Throws SpecError
        void validate() const;

        static SolverConfig long_run()
        {
            SolverConfig c;
            c.q1 = c.q2 = 500;
            return c;
        }
    };

    // Parses the key/value format documented in the README. name is used in
    // error messages. Throws SpecError with a line number.
    ExperimentSpec parse_spec(std::istream &in, const std::string &name = "<spec>");
    ExperimentSpec load_spec(const std::filesystem::path &path);
    // A single "key = value" line applied on top of a parsed spec
    void apply_override(ExperimentSpec &spec, const std::string &assignment);

    struct ResultRow
    {
        std::string scheme;
        Index n_tx = 0;
        std::uint64_t seed = 0;
        double alpha = 1.0;
        double beta = 1.0;
        double sum_rate = 0.0;
        double total_power = 0.0;
        std::vector<double> sinr; // per UE, true SINR
        double time_bounds_ms = 0.0;
        double time_solve_ms = 0.0;
        // Channel reads of the per-BS solves and how many of them touched a
        // foreign BS; zero for schemes without per-BS solves
        Index channel_reads = 0;
        Index foreign_reads = 0;
        std::string error; // empty on success

        bool ok() const { return error.empty(); }
        bool operator==(const ResultRow &) const = default;
    };

    struct ExperimentResult
    {
        std::vector<ResultRow> rows;
        Index de_cache_hits = 0;
        Index de_cache_misses = 0;

        Index failed() const;
        Index foreign_reads() const;
    };

    // Rows come out ordered by (n_tx, seed, beta, alpha, scheme) whatever
    // the job count. Failures become rows with an error message.
    ExperimentResult run_experiment(const ExperimentSpec &spec, unsigned jobs = 1, std::uint64_t seed_offset = 0);

    // Failed rows are skipped in the CSV and kept in the JSON
    void emit_csv(const std::vector<ResultRow> &rows, const std::filesystem::path &path);
    void emit_json(const std::vector<ResultRow> &rows, const std::filesystem::path &path);
    std::vector<ResultRow> read_json_rows(const std::filesystem::path &path);

    // Power P in [lo, hi] whose rate is within rel_tol of target, found by
    // bisection; rate must be non-decreasing in P. Returns lo when even lo
    // overshoots. Throws NumericalFailure when hi falls short.
    template <typename F>
    double match_rate(F &&rate, double target, double lo, double hi, double rel_tol);
}

#include "cjt/bench_inl.hpp"

#endif
