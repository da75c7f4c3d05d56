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

#include "helpers.hpp"

#include "cjt/baselines.hpp"
#include "cjt/bench.hpp"
#include "cjt/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cjt;
using namespace cjt::bench;
namespace fs = std::filesystem;

namespace
{
    ExperimentSpec parse(const std::string &text)
    {
        std::istringstream in(text);
        return parse_spec(in, "test");
    }

    std::string spec_error(const std::string &text)
    {
        try
        {
            parse(text);
        }
        catch (const SpecError &e)
        {
            return e.what();
        }
        return {};
    }

    struct TempDir
    {
        fs::path path;
        TempDir()
        {
            path = fs::temp_directory_path() / ("cjt_bench_" + std::to_string(std::random_device{}()));
            fs::create_directories(path);
        }
        ~TempDir() { fs::remove_all(path); }
    };

    std::vector<std::string> lines_of(const fs::path &p)
    {
        std::ifstream in(p);
        std::vector<std::string> out;
        for (std::string l; std::getline(in, l);)
            out.push_back(l);
        return out;
    }

    ExperimentSpec small_spec()
    {
        auto s = parse(R"(
n_ue = 6
n_tx = 6
seeds = [3]
schemes = [udd, de-admm, zf-central, zf-local]
snr_db = 10
noise_mode = total-pairs
record_timing = false
)");
        return s;
    }
}

TEST_SUITE("spec parser")
{
    TEST_CASE("full grammar")
    {
        const auto s = parse(R"(
# comment line
n_bs = 2
n_ue = 4
n_tx = [8, 16,]        # trailing comma
serving = [[0, 1, 2], [2, 3]]
seeds = 5..8
schemes = [udd, "zf-local"]
snr_db = -3.5
noise_mode = total-pairs
sigma2 = 0.25
alpha = [0.5, 2]
targets = constant
target_sinr = 3
mode = power
record_timing = false
output = "out dir"

[placement]
site_spacing = 1.5
seed = 9

[solver]
q1 = 4
mode = strict

[reference]
q2 = 50
)");
        CHECK(s.n_bs == 2);
        CHECK(s.n_tx == std::vector<Index>{8, 16});
        CHECK(s.serving == std::vector<std::vector<Index>>{{0, 1, 2}, {2, 3}});
        CHECK(s.seeds == std::vector<std::uint64_t>{5, 6, 7, 8});
        CHECK(s.schemes == std::vector<Scheme>{Scheme::Udd, Scheme::ZfLocal});
        CHECK(s.snr_db == -3.5);
        CHECK(s.noise_mode == NoiseNormalization::TotalPairs);
        CHECK(s.sigma2 == 0.25);
        CHECK(s.alpha == std::vector<double>{0.5, 2.0});
        CHECK(s.targets == TargetSource::Constant);
        CHECK(s.target_sinr == 3.0);
        CHECK(s.mode == CompareMode::Power);
        CHECK_FALSE(s.record_timing);
        CHECK(s.output == "out dir");
        CHECK(s.placement.site_spacing == 1.5);
        CHECK(s.placement_seed == 9u);
        CHECK(s.solver.q1 == 4);
        CHECK(s.solver.mode == AUpdateMode::Strict);
        CHECK(s.reference.q2 == 50);
        CHECK(s.reference.q1 == 500);
    }

    TEST_CASE("empty input keeps defaults")
    {
        const auto s = parse("");
        const ExperimentSpec d;
        CHECK(s.n_tx == d.n_tx);
        CHECK(s.schemes == d.schemes);
        CHECK(s.reference.q1 == 500);
    }

    TEST_CASE("errors carry the line")
    {
        CHECK(spec_error("n_bs = 3\nbogus = 1\n").find("test:2") != std::string::npos);
        CHECK(spec_error("n_bs = 3\nn_bs = 4\n").find("test:2") != std::string::npos);
        CHECK_FALSE(spec_error("schemes = [udd, magic]").empty());
        CHECK_FALSE(spec_error("n_tx = [8").empty());
        CHECK_FALSE(spec_error("seeds = 5..2").empty());
        CHECK_FALSE(spec_error("n_bs 3").empty());
        CHECK_FALSE(spec_error("[solver]\nrho1 = \"x\"").empty());
        CHECK_FALSE(spec_error("corr = 1.5").empty());
        CHECK_FALSE(spec_error("seeds = [1, 1]").empty());
        CHECK_FALSE(spec_error("n_ue = 2").empty());
    }

    TEST_CASE("overrides")
    {
        auto s = parse("snr_db = 5");
        apply_override(s, "snr_db = 7");
        apply_override(s, "solver.q2=9");
        apply_override(s, "seeds = 1..3");
        CHECK(s.snr_db == 7.0);
        CHECK(s.solver.q2 == 9);
        CHECK(s.seeds.size() == 3);
        CHECK_THROWS_AS(apply_override(s, "nonsense"), SpecError);
        CHECK_THROWS_AS(apply_override(s, "solver.q2 = 0"), SpecError);
    }

    TEST_CASE("scheme names round-trip")
    {
        for (auto sc : {Scheme::Udd, Scheme::DeAdmm, Scheme::Reference, Scheme::ExactAdmm, Scheme::ZfCentral,
                        Scheme::ZfLocal, Scheme::Wmmse})
            CHECK(scheme_from_string(to_string(sc)) == sc);
        CHECK_THROWS_AS(scheme_from_string("mmse"), SpecError);
    }

    TEST_CASE("shipped configs parse")
    {
        for (const auto &e : fs::directory_iterator(CJT_SOURCE_DIR "/configs"))
            if (e.path().extension() == ".toml")
            {
                CAPTURE(e.path().string());
                CHECK_NOTHROW(load_spec(e.path()));
            }
        CHECK_THROWS_AS(load_spec("/nonexistent/spec.toml"), SpecError);
    }
}

TEST_SUITE("experiments")
{
    TEST_CASE("one-cell ZF row matches a direct evaluation")
    {
        auto s = parse(R"(
n_bs = 1
n_ue = 3
serving = [[0, 1, 2]]
n_tx = 4
seeds = [7]
schemes = [zf-local]
sigma2 = 0.5
p_total = 2
record_timing = false
)");
        const auto res = run_experiment(s);
        REQUIRE(res.rows.size() == 1);
        const auto &r = res.rows[0];
        REQUIRE(r.ok());

        const auto t = Topology::build(1, 3, 4, {{0, 1, 2}});
        const auto cov = synth_covariance(t, s.corr, s.placement, 7);
        const auto ch = draw_channel(cov, {7, 0});
        NoiseModel noise;
        noise.sigma2 = 0.5;
        const auto w = normalize_power(zf_decentralized(ch, t), 2.0);
        const RVec sinr = sinr_true(w, ch, t, noise);
        double rate = 0.0;
        for (Index i = 0; i < 3; ++i)
            rate += std::log2(1.0 + sinr(i));
        CHECK(cjt::test::rel_err(r.sum_rate, rate) < 1e-12);
        CHECK(cjt::test::rel_err(r.total_power, 2.0) < 1e-12);
        REQUIRE(r.sinr.size() == 3);
        double from_row = 0.0;
        for (double g : r.sinr)
            from_row += std::log2(1.0 + g);
        CHECK(cjt::test::rel_err(r.sum_rate, from_row) < 1e-12);
        CHECK(r.channel_reads == 0);
    }

    TEST_CASE("rows are deterministic without timing and independent of jobs")
    {
        auto s = small_spec();
        s.seeds = {1, 2};
        s.beta = {0.5, 1.0};
        const auto a = run_experiment(s, 1);
        const auto b = run_experiment(s, 3);
        CHECK(a.rows == b.rows);
        REQUIRE(a.rows.size() == 2 * 2 * 4);
        // (n_tx, seed, beta, alpha, scheme) ordering
        CHECK(a.rows[0].seed == 1);
        CHECK(a.rows[0].beta == 0.5);
        CHECK(a.rows[0].scheme == "udd");
        CHECK(a.rows[4].beta == 1.0);
        CHECK(a.rows[8].seed == 2);
        CHECK(a.failed() == 0);
        CHECK(a.foreign_reads() == 0);
        for (const auto &r : a.rows)
        {
            CHECK(r.time_solve_ms == 0.0);
            CHECK(r.time_bounds_ms == 0.0);
        }
    }

    TEST_CASE("seed offset shifts the realizations")
    {
        auto s = small_spec();
        const auto a = run_experiment(s, 1, 0);
        const auto b = run_experiment(s, 1, 1);
        CHECK(b.rows[0].seed == a.rows[0].seed + 1);
        s.seeds = {4};
        CHECK(run_experiment(s).rows == b.rows);
    }

    TEST_CASE("per-BS schemes report their reads")
    {
        const auto res = run_experiment(small_spec());
        for (const auto &r : res.rows)
        {
            if (r.scheme == "de-admm")
                CHECK(r.channel_reads == 3 * 6);
            else
                CHECK(r.channel_reads == 0);
            CHECK(r.foreign_reads == 0);
        }
    }

    TEST_CASE("DE results are cached across seeds with a shared drop")
    {
        auto s = small_spec();
        s.seeds = {1, 2, 3};
        s.placement_seed = 5;
        s.sigma2 = 0.1;
        s.targets = TargetSource::Constant;
        s.target_sinr = 0.5;
        s.schemes = {Scheme::DeAdmm, Scheme::Reference};
        const auto res = run_experiment(s);
        CHECK(res.de_cache_misses == 1);
        CHECK(res.de_cache_hits >= 2);
        CHECK(res.failed() == 0);
    }

    TEST_CASE("power mode matches the zf-central rate")
    {
        auto s = small_spec();
        s.mode = CompareMode::Power;
        s.schemes = {Scheme::ZfCentral, Scheme::ZfLocal, Scheme::Udd};
        const auto res = run_experiment(s);
        REQUIRE(res.failed() == 0);
        const double anchor = res.rows[0].sum_rate;
        CHECK(cjt::test::rel_err(res.rows[0].total_power, s.p_total) < 1e-12);
        for (const auto &r : res.rows)
            CHECK(cjt::test::rel_err(r.sum_rate, anchor) <= s.rate_tol);
    }

    TEST_CASE("failures become error rows")
    {
        auto s = small_spec();
        s.targets = TargetSource::Constant;
        s.target_sinr = 1e6;
        s.schemes = {Scheme::Udd, Scheme::ZfLocal};
        const auto res = run_experiment(s);
        REQUIRE(res.rows.size() == 2);
        CHECK_FALSE(res.rows[0].ok());
        CHECK(res.rows[1].ok());
        CHECK(res.failed() == 1);
    }
}

TEST_SUITE("emitters")
{
    TEST_CASE("CSV header with and without rows")
    {
        TempDir dir;
        const std::string header = "scheme,n_tx,seed,alpha,beta,sum_rate,total_power,time_bounds_ms,time_solve_ms";
        emit_csv({}, dir.path / "empty.csv");
        CHECK(lines_of(dir.path / "empty.csv") == std::vector<std::string>{header});

        ResultRow r;
        r.scheme = "udd";
        r.n_tx = 16;
        r.seed = 3;
        r.sum_rate = 12.5;
        r.total_power = 10;
        r.time_solve_ms = 0.25;
        ResultRow bad = r;
        bad.error = "boom";
        emit_csv({r, bad}, dir.path / "one.csv");
        const auto lines = lines_of(dir.path / "one.csv");
        REQUIRE(lines.size() == 2);
        CHECK(lines[1] == "udd,16,3,1,1,12.5,10,0,0.25");
    }

    TEST_CASE("JSON keeps every row and round-trips")
    {
        TempDir dir;
        ResultRow r;
        r.scheme = "de-admm";
        r.n_tx = 32;
        r.seed = 11;
        r.alpha = 0.2;
        r.beta = 5;
        r.sum_rate = 1.0 / 3.0;
        r.total_power = 10;
        r.sinr = {0.1, 2.0 / 7.0};
        r.channel_reads = 36;
        ResultRow bad;
        bad.scheme = "udd";
        bad.error = "Infeasible";
        emit_json({r, bad}, dir.path / "r.json");
        const auto back = read_json_rows(dir.path / "r.json");
        REQUIRE(back.size() == 2);
        CHECK(back[0] == r);
        CHECK(back[1] == bad);
        std::ofstream(dir.path / "x.json") << "{\"schema\": 1, \"kind\": \"bounds\"}";
        CHECK_THROWS_AS(read_json_rows(dir.path / "x.json"), IoError);
    }

    TEST_CASE("match_rate bisection")
    {
        auto rate = [](double p) { return std::log2(1.0 + p); };
        const double p = match_rate(rate, 3.0, 1e-6, 1e6, 1e-6);
        CHECK(std::abs(rate(p) - 3.0) <= 3e-6);
        CHECK(match_rate(rate, 1e-9, 1.0, 2.0, 1e-3) == 1.0);
        CHECK_THROWS_AS(match_rate(rate, 100.0, 1.0, 2.0, 1e-3), NumericalFailure);
        CHECK_THROWS_AS(match_rate(rate, 1.0, 2.0, 1.0, 1e-3), InvalidArgument);
    }
}
