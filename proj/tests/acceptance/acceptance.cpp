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

// Acceptance harness: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "helpers.hpp"

#include "cjt/admm.hpp"
#include "cjt/baselines.hpp"
#include "cjt/bench.hpp"
#include "cjt/de.hpp"
#include "cjt/errors.hpp"
#include "cjt/udd.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>

using namespace cjt;
using cjt::test::rel_err;

namespace
{
    using Clock = std::chrono::steady_clock;

    double ms_since(Clock::time_point t0)
    {
        return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    }

    double median(std::vector<double> v)
    {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    double mean(const std::vector<double> &v)
    {
        return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    }

    double std_error(const std::vector<double> &v)
    {
        const double m = mean(v);
        double s = 0.0;
        for (double x : v)
            s += (x - m) * (x - m);
        return std::sqrt(s / double(v.size() - 1) / double(v.size()));
    }

    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::string fmt(const char *f, auto... args)
    {
        char buf[512];
        std::snprintf(buf, sizeof buf, f, args...);
        return buf;
    }

    // Audit totals gathered from every run below
    struct Audit
    {
        Index solves = 0;
        Index reads = 0;
        Index foreign = 0;

        void add(const std::vector<std::vector<ChannelRead>> &per_bs)
        {
            for (Index p = 0; p < per_bs.size(); ++p)
            {
                ++solves;
                for (const auto &r : per_bs[p])
                {
                    ++reads;
                    foreign += r.bs != p;
                }
            }
        }

        void add(const bench::ExperimentResult &res)
        {
            for (const auto &r : res.rows)
                if (r.channel_reads > 0)
                {
                    ++solves;
                    reads += r.channel_reads;
                    foreign += r.foreign_reads;
                }
        }
    };

    Audit audit;

    bench::ExperimentSpec config(const std::string &name)
    {
        return bench::load_spec(std::string(CJT_SOURCE_DIR) + "/configs/" + name + ".toml");
    }

    // Same drop, draw and noise calibration as the bench cell runner
    cjt::test::Instance instance(const bench::ExperimentSpec &s, Index n_tx, Index n_ue, std::uint64_t seed)
    {
        cjt::test::Instance in;
        in.topology = Topology::build(s.n_bs, n_ue, n_tx, overlapping_line_layout(s.n_bs, n_ue));
        in.cov = synth_covariance(in.topology, s.corr, s.placement, seed);
        in.channels = draw_channel(in.cov, {seed, 0});
        in.noise = calibrate_noise(in.channels, in.topology, s.snr_db, s.noise_mode);
        return in;
    }

    Outcome udd_exactness(const bench::ExperimentSpec &s)
    {
        const auto t0 = Clock::now();
        double worst = 0.0;
        int failures = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed)
        {
            const auto in = instance(s, 16, 12, seed);
            const auto g = wmmse_targets(in.channels, in.topology, in.noise, s.wmmse).targets;
            try
            {
                const auto sol = solve_udd(in.channels, g, in.topology, in.noise, s.udd);
                const RVec got = sinr_approx(sol.precoders, in.channels, in.topology, in.noise);
                for (Index k = 0; k < in.topology.n_pairs(); ++k)
                    worst = std::max(worst, rel_err(got(k), g.gamma[k]));
            }
            catch (const Error &)
            {
                ++failures;
            }
        }
        const double ms = ms_since(t0);
        return {failures == 0 && worst <= 1e-6 && ms < 10000.0,
                fmt("max rel SINR error %.2e over 20 seeds, %d solver failures, %.0f ms", worst, failures, ms)};
    }

    Outcome de_trend(const bench::ExperimentSpec &s)
    {
        const auto t0 = Clock::now();
        const Index sizes[] = {16, 32, 64};
        std::vector<double> lam_med, bound_med;
        int failures = 0;
        for (Index n : sizes)
        {
            const Index n_ue = Index(std::lround(0.4 * double(n)));
            std::vector<double> lam, bnd;
            for (std::uint64_t seed = 1; seed <= 20; ++seed)
            {
                const auto in = instance(s, n, n_ue, seed);
                const auto g = cjt::test::constant_targets(in.topology, 1.0);
                try
                {
                    const auto exact = solve_udd(in.channels, g, in.topology, in.noise, s.udd);
                    const auto de = de_interference_bounds(in.cov, g, in.noise.sigma2, in.topology, s.de);
                    double worst = 0.0;
                    for (Index k = 0; k < in.topology.n_pairs(); ++k)
                        worst = std::max(worst, std::abs(exact.multipliers.lambda(k) - de.lambda_bar(k)) /
                                                    de.lambda_bar(k));
                    std::vector<double> errs;
                    for (Index i = 0; i < n_ue; ++i)
                        for (Index q = 0; q < in.topology.n_bs(); ++q)
                            if (exact.bounds.value(i, q) > 0.0)
                                errs.push_back(rel_err(de.bounds.value(i, q), exact.bounds.value(i, q)));
                    lam.push_back(worst);
                    bnd.push_back(median(errs));
                }
                catch (const Error &)
                {
                    ++failures;
                }
            }
            lam_med.push_back(median(lam));
            bound_med.push_back(median(bnd));
        }
        const double ms = ms_since(t0);
        const bool down = lam_med[1] < lam_med[0] && lam_med[2] < lam_med[1] && bound_med[1] < bound_med[0] &&
                          bound_med[2] < bound_med[1];
        return {down && failures == 0 && ms < 300000.0,
                fmt("lambda %.3g > %.3g > %.3g, bounds %.3g > %.3g > %.3g (N_T 16/32/64), %d failures, %.0f ms",
                    lam_med[0], lam_med[1], lam_med[2], bound_med[0], bound_med[1], bound_med[2], failures, ms)};
    }

    Outcome exact_recovery(const bench::ExperimentSpec &s)
    {
        int hits = 0;
        std::vector<double> gaps;
        for (std::uint64_t seed = 1; seed <= 20; ++seed)
        {
            const auto in = instance(s, 16, 12, seed);
            const auto g = wmmse_targets(in.channels, in.topology, in.noise, s.wmmse).targets;
            try
            {
                const auto udd = solve_udd(in.channels, g, in.topology, in.noise, s.udd);
                const auto sol = decentralized_precoders(in.channels, g, udd.bounds, in.noise, in.topology,
                                                         bench::ExperimentSpec::long_run());
                audit.add(sol.reads);
                const double gap = rel_err(total_power(sol.precoders), total_power(udd.precoders));
                gaps.push_back(gap);
                hits += gap <= 0.02;
            }
            catch (const Error &)
            {
            }
        }
        return {hits >= 18, fmt("%d/20 seeds within 2%% of the optimal power (median gap %.2e)", hits,
                                gaps.empty() ? 0.0 : median(gaps))};
    }

    using RowIndex = std::map<std::tuple<Index, std::uint64_t, double, double, std::string>, double>;

    RowIndex index_rates(const bench::ExperimentResult &res)
    {
        RowIndex out;
        for (const auto &r : res.rows)
            if (r.ok())
                out[{r.n_tx, r.seed, r.alpha, r.beta, r.scheme}] = r.sum_rate;
        return out;
    }

    Outcome ordering()
    {
        const auto spec = config("sum_rate");
        const auto res = bench::run_experiment(spec);
        audit.add(res);
        const auto rates = index_rates(res);
        bool pass = res.failed() == 0;
        std::string detail;
        for (Index n : spec.n_tx)
        {
            int ordered = 0;
            std::vector<double> de, zfc;
            for (auto seed : spec.seeds)
            {
                auto at = [&](const char *sc) {
                    auto it = rates.find({n, seed, 1.0, 1.0, sc});
                    return it == rates.end() ? std::nan("") : it->second;
                };
                const double u = at("udd"), d = at("de-admm"), c = at("zf-central"), l = at("zf-local");
                ordered += u >= d && d >= c && c >= l;
                de.push_back(d);
                zfc.push_back(c);
            }
            const double gain = mean(de) / mean(zfc) - 1.0;
            pass = pass && ordered * 5 >= int(spec.seeds.size()) * 4 && gain >= 0.05;
            detail += fmt("N_T=%zu: ordered %d/%zu, de-admm over zf-central %+.1f%%; ", n, ordered,
                          spec.seeds.size(), 100.0 * gain);
        }
        detail += fmt("%zu failed rows", res.failed());
        return {pass, detail};
    }

    Outcome robustness()
    {
        const auto spec = config("robustness");
        const auto res = bench::run_experiment(spec);
        audit.add(res);
        const auto rates = index_rates(res);
        const Index n = spec.n_tx.front();
        bool above = res.failed() == 0;
        double best = -1.0, at_one = 0.0, se_one = 0.0;
        std::string worst_gap;
        double min_margin = 1e300;
        for (double b : spec.beta)
            for (double a : spec.alpha)
            {
                std::vector<double> de, zfc;
                for (auto seed : spec.seeds)
                {
                    de.push_back(rates.at({n, seed, a, b, "de-admm"}));
                    zfc.push_back(rates.at({n, seed, a, b, "zf-central"}));
                }
                const double m = mean(de);
                const double margin = m - mean(zfc);
                above = above && margin >= 0.0;
                if (margin < min_margin)
                {
                    min_margin = margin;
                    worst_gap = fmt("(%.3g, %.3g)", a, b);
                }
                best = std::max(best, m);
                if (a == 1.0 && b == 1.0)
                {
                    at_one = m;
                    se_one = std::max(std_error(de), 0.0);
                }
            }
        const bool peak = best - at_one <= se_one;
        return {above && peak,
                fmt("smallest de-admm minus zf-central margin %.3f at %s; best mean %.3f, (1, 1) mean %.3f +- %.3f",
                    min_margin, worst_gap.c_str(), best, at_one, se_one)};
    }

    double a_row_kkt(const CVec &v, Index i, Complex anchor, double g, double rest, double tau,
                     const ARowSolution &sol)
    {
        const CVec &a = sol.row;
        const double off2 = a.squaredNorm() - std::norm(a(i));
        const double slack = g * (off2 + rest) - 2.0 * std::real(std::conj(anchor) * a(i)) + std::norm(anchor);
        double r = std::abs(slack) / (g * rest + std::norm(anchor));
        if (v.size() > 1)
            r = std::max(r, std::abs(off2 - tau) / tau);
        // Stationarity of 1/2 |a - v|^2 + zeta/2 * slack + beta/2 * (off2 - tau)
        const double k = 1.0 + sol.zeta * g + sol.beta;
        for (Index j = 0; j < Index(v.size()); ++j)
        {
            const Complex res = j == i ? a(i) - v(i) - sol.zeta * anchor : k * a(j) - v(j);
            r = std::max(r, std::abs(res) / (1.0 + std::abs(v(j))));
        }
        return r;
    }

    Outcome micro()
    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> ud(0.05, 3.0);
        double b_err = 0.0, w_grad = 0.0, a_kkt = 0.0, rp_res = 0.0;
        for (int trial = 0; trial < 1000; ++trial)
        {
            const CVec c = cjt::test::random_cvec(rng, 1 + trial % 9, ud(rng));
            const double eps = ud(rng);
            b_err = std::max(b_err, (project_ball(c, eps) - cjt::test::ball_oracle(c, eps)).norm());

            const Index n = 2 + trial % 15, u = 1 + trial % 5, o = trial % 6;
            const CMat h_in = cjt::test::random_cmat(rng, n, u);
            const CMat h_out = cjt::test::random_cmat(rng, n, o);
            SolverConfig cfg;
            cfg.rho1 = ud(rng);
            cfg.rho2 = ud(rng);
            LocalProblem prob;
            prob.h_in = h_in;
            prob.h_out = h_out;
            prob.unserved.resize(o);
            AdmmState s;
            s.r_p = precompute_rp(h_in, h_out, cfg.rho1, cfg.rho2);
            CMat m = 2.0 * CMat::Identity(n, n) + cfg.rho1 * h_in * h_in.adjoint();
            if (o > 0)
                m += cfg.rho2 * h_out * h_out.adjoint();
            rp_res = std::max(rp_res, (s.r_p * m - CMat::Identity(n, n)).norm());

            s.a = cjt::test::random_cmat(rng, u, u);
            s.b = cjt::test::random_cmat(rng, o, u);
            s.dual_lambda = cjt::test::random_cmat(rng, u, u);
            s.dual_mu = cjt::test::random_cmat(rng, o, u);
            admm_update_w(s, prob, cfg);
            CMat grad = 2.0 * s.w - cfg.rho1 * h_in * (s.a + s.dual_lambda - h_in.adjoint() * s.w);
            if (o > 0)
                grad -= cfg.rho2 * h_out * (s.b + s.dual_mu - h_out.adjoint() * s.w);
            w_grad = std::max(w_grad, grad.norm());

            const Index len = 2 + trial % 6, i = trial % len;
            const CVec v = cjt::test::random_cvec(rng, len);
            const Complex anchor = cjt::test::random_cvec(rng, 1)(0);
            const double g = ud(rng), rest = ud(rng), tau = ud(rng);
            const auto sol = solve_a_row(v, i, anchor, g, rest, tau, AUpdateMode::Paper);
            a_kkt = std::max(a_kkt, a_row_kkt(v, i, anchor, g, rest, tau, sol));
        }
        return {b_err < 1e-10 && w_grad < 1e-8 && a_kkt < 1e-8 && rp_res < 1e-10,
                fmt("B %.1e, w-gradient %.1e, A-KKT %.1e, R_p %.1e (1000 cases each)", b_err, w_grad, a_kkt,
                    rp_res)};
    }

    // Median over batches of the per-call time of f
    double time_per_call(const std::function<void()> &f, int reps)
    {
        std::vector<double> batches;
        for (int b = 0; b < 7; ++b)
        {
            const auto t0 = Clock::now();
            for (int k = 0; k < reps; ++k)
                f();
            batches.push_back(ms_since(t0) / reps);
        }
        return median(batches);
    }

    Outcome speed()
    {
        const auto spec = config("runtime");
        const auto res = bench::run_experiment(spec);
        audit.add(res);
        std::map<std::pair<Index, std::uint64_t>, std::pair<double, double>> times;
        for (const auto &r : res.rows)
        {
            if (r.scheme == "de-admm")
                times[{r.n_tx, r.seed}].first = r.time_solve_ms;
            else if (r.scheme == "reference")
                times[{r.n_tx, r.seed}].second = r.time_solve_ms;
        }
        double worst = 0.0;
        for (const auto &[key, t] : times)
            worst = std::max(worst, t.second > 0.0 ? t.first / t.second : 1e300);

        // Setup stage of one BS: local problem, R_p and the ZF start
        double setup[2];
        const Index sizes[] = {16, 32};
        for (int k = 0; k < 2; ++k)
        {
            const auto in = instance(spec, sizes[k], spec.n_ue, 1);
            const auto g = cjt::test::constant_targets(in.topology, 1.0);
            InterferenceBounds b;
            b.value = RMat::Constant(spec.n_ue, spec.n_bs, 1.0);
            const auto prob = make_local_problem(in.channels, g, b, in.noise.sigma2, in.topology, 1);
            volatile double sink = 0.0;
            setup[k] = time_per_call(
                [&] {
                    const CMat rp = precompute_rp(prob.h_in, prob.h_out, 0.5, 0.5);
                    const CMat w = local_zf_init(prob);
                    sink = sink + rp(0, 0).real() + w(0, 0).real();
                },
                2000);
        }
        const double ratio = setup[1] / setup[0];
        return {res.failed() == 0 && worst <= 0.2 && ratio >= 4.0 && ratio <= 16.0,
                fmt("worst single-pass/reference per-BS time %.3f over %zu instances; setup %.1f us -> %.1f us, "
                    "ratio %.2f",
                    worst, times.size(), 1e3 * setup[0], 1e3 * setup[1], ratio)};
    }
}

int main()
{
    const auto spec = config("sum_rate");
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, [&] { return udd_exactness(spec); }},
        {2, [&] { return de_trend(spec); }},
        {3, [&] { return exact_recovery(spec); }},
        {4, ordering},
        {5, robustness},
        {6, micro},
        {7, speed},
    };

    int failed = 0;
    for (const auto &[id, run] : criteria)
    {
        Outcome o;
        try
        {
            o = run();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
        std::fflush(stdout);
    }
    const bool clean = audit.foreign == 0 && audit.reads > 0;
    failed += !clean;
    std::printf("%s criterion 8: %zu BS solves, %zu channel reads, %zu foreign\n", clean ? "PASS" : "FAIL",
                audit.solves, audit.reads, audit.foreign);
    return failed == 0 ? 0 : 1;
}
