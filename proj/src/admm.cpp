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

#include "cjt/admm.hpp"

#include "cjt/errors.hpp"
#include "cjt/parallel.hpp"

#include <Eigen/Cholesky>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace cjt
{
    const char *to_string(AUpdateMode mode)
    {
        return mode == AUpdateMode::Paper ? "paper" : "strict";
    }

    AUpdateMode a_update_mode_from_string(const std::string &s)
    {
        if (s == "paper")
            return AUpdateMode::Paper;
        if (s == "strict")
            return AUpdateMode::Strict;
        throw InvalidArgument("Unknown A-update mode '" + s + "' (expected paper or strict).");
    }

    void SolverConfig::validate() const
    {
        if (!(rho1 > 0.0) || !(rho2 > 0.0))
            throw InvalidArgument("ADMM penalties must be positive.");
        if (q1 < 1 || q2 < 1)
            throw InvalidArgument("CCCP and ADMM iteration caps must be at least 1.");
        if (!(tol > 0.0))
            throw InvalidArgument("CCCP tolerance must be positive.");
        if (!(feasibility_tol > 0.0))
            throw InvalidArgument("Feasibility tolerance must be positive.");
    }

    LocalProblem make_local_problem(const ChannelSet &channels, const TargetSinr &gamma,
                                    const InterferenceBounds &bounds, double sigma2, const Topology &topology,
                                    Index bs)
    {
        if (bs >= topology.n_bs())
            throw IndexOutOfRange("BS index out of range.");
        if (channels.n_ue != topology.n_ue() || channels.n_bs != topology.n_bs() ||
            channels.n_tx != topology.n_tx())
            throw InvalidArgument("Channel set dimensions do not match the topology.");
        if (bounds.value.rows() != Eigen::Index(topology.n_ue()) ||
            bounds.value.cols() != Eigen::Index(topology.n_bs()))
            throw InvalidArgument("Bound matrix dimensions do not match the topology.");
        bounds.validate();
        gamma.validate(topology);
        if (!(sigma2 > 0.0))
            throw InvalidArgument("Noise variance must be positive.");

        LocalProblem prob;
        prob.bs = bs;
        prob.served = topology.served(bs);
        prob.unserved = topology.unserved(bs);
        prob.sigma2 = sigma2;

        auto read = [&](Index ue) -> const CVec & {
            prob.reads.push_back({ue, bs});
            return channels.at(ue, bs);
        };

        const Index n = topology.n_tx();
        prob.h_in.resize(n, prob.n_in());
        prob.h_out.resize(n, prob.n_out());
        prob.gamma.resize(prob.n_in());
        prob.tau.resize(prob.n_in());
        prob.foreign.resize(prob.n_in());
        prob.eps.resize(prob.n_out());

        for (Index k = 0; k < prob.n_in(); ++k)
        {
            const Index i = prob.served[k];
            prob.h_in.col(k) = read(i);
            prob.gamma(k) = gamma.at(topology, i, bs);
            prob.tau(k) = bounds.value(i, bs);
            double f = 0.0;
            for (Index q = 0; q < topology.n_bs(); ++q)
                if (q != bs)
                    f += bounds.value(i, q);
            prob.foreign(k) = f;
        }
        for (Index k = 0; k < prob.n_out(); ++k)
        {
            const Index i = prob.unserved[k];
            prob.h_out.col(k) = read(i);
            prob.eps(k) = bounds.value(i, bs);
        }
        return prob;
    }

    CMat precompute_rp(const CMat &h_in, const CMat &h_out, double rho1, double rho2)
    {
        if (!(rho1 > 0.0) || !(rho2 > 0.0))
            throw InvalidArgument("ADMM penalties must be positive.");
        const Eigen::Index n = std::max(h_in.rows(), h_out.rows());
        CMat m = CMat::Identity(n, n) * 2.0;
        if (h_in.cols() > 0)
            m.noalias() += rho1 * h_in * h_in.adjoint();
        if (h_out.cols() > 0)
            m.noalias() += rho2 * h_out * h_out.adjoint();
        Eigen::LLT<CMat> llt(m);
        if (llt.info() != Eigen::Success)
            throw NumericalFailure("ADMM solve matrix is not positive definite.");
        return llt.solve(CMat::Identity(n, n));
    }

    namespace
    {
        double sinr_slack(Complex a_ii, double off2, Complex anchor, double gamma, double rest)
        {
            return gamma * (off2 + rest) - 2.0 * std::real(std::conj(anchor) * a_ii) + std::norm(anchor);
        }

        double paper_zeta(Complex v_ii, double off2, Complex anchor, double gamma, double rest)
        {
            return sinr_slack(v_ii, off2, anchor, gamma, rest) / (2.0 * std::norm(anchor));
        }

        double off_norm2(const CVec &v, Index i)
        {
            return v.squaredNorm() - std::norm(v(i));
        }

        // Row with off-diagonals scaled by s and A_ii = v_ii + zeta * anchor
        CVec assemble(const CVec &v, Index i, double s, double zeta, Complex anchor)
        {
            CVec row = s * v;
            row(i) = v(i) + zeta * anchor;
            return row;
        }
    }

    ARowSolution solve_a_row(const CVec &v, Index i, Complex anchor, double gamma, double rest, double tau,
                             AUpdateMode mode)
    {
        if (i >= Index(v.size()))
            throw IndexOutOfRange("A-row index out of range.");
        if (std::abs(anchor) < 1e-12)
            throw DegenerateAnchor("CCCP anchor has a vanishing inner product with its channel.");

        const bool has_off = v.size() > 1;
        const double r2 = has_off ? off_norm2(v, i) : 0.0;
        const double r = std::sqrt(std::max(r2, 0.0));
        const Complex v_ii = v(i);
        ARowSolution out;

        if (mode == AUpdateMode::Paper)
        {
            double s = 1.0;
            if (has_off)
            {
                if (r < 1e-14)
                    throw DegenerateDirection("Off-diagonal A direction vanished.");
                s = std::sqrt(tau) / r;
            }
            const double off2 = s * s * r2;
            out.zeta = paper_zeta(v_ii, off2, anchor, gamma, rest);
            out.row = assemble(v, i, s, out.zeta, anchor);
            out.beta = has_off ? (s > 0.0 ? 1.0 / s - 1.0 - out.zeta * gamma
                                          : std::numeric_limits<double>::infinity())
                               : 0.0;
            return out;
        }

        const double slack_tol = 1e-12 * (gamma * rest + std::norm(anchor));

        // Neither constraint active
        if (sinr_slack(v_ii, r2, anchor, gamma, rest) <= 0.0 && r2 <= tau)
        {
            out.row = v;
            return out;
        }

        // Only the SINR constraint active: s = 1 / (1 + zeta gamma)
        {
            auto h = [&](double z) {
                const double s = 1.0 / (1.0 + z * gamma);
                return sinr_slack(v_ii + z * anchor, s * s * r2, anchor, gamma, rest);
            };
            if (h(0.0) > 0.0)
            {
                double lo = 0.0;
                double hi = 1.0;
                while (h(hi) > 0.0)
                    hi *= 2.0;
                for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it)
                {
                    const double mid = 0.5 * (lo + hi);
                    (h(mid) > 0.0 ? lo : hi) = mid;
                }
                const double z = hi;
                const double s = 1.0 / (1.0 + z * gamma);
                if (s * s * r2 <= tau * (1.0 + 1e-12) || r2 == 0.0)
                {
                    out.zeta = z;
                    out.row = assemble(v, i, s, z, anchor);
                    return out;
                }
            }
        }

        if (r > 0.0)
        {
            const double s = std::sqrt(tau) / r;
            // Only the tau constraint active
            if (s <= 1.0 && sinr_slack(v_ii, tau, anchor, gamma, rest) <= slack_tol)
            {
                out.beta = 1.0 / s - 1.0;
                out.row = assemble(v, i, s, 0.0, anchor);
                return out;
            }
            // Both active
            out.zeta = std::max(paper_zeta(v_ii, tau, anchor, gamma, rest), 0.0);
            out.beta = s > 0.0 ? std::max(1.0 / s - 1.0 - out.zeta * gamma, 0.0)
                               : std::numeric_limits<double>::infinity();
            out.row = assemble(v, i, s, out.zeta, anchor);
            return out;
        }

        throw NumericalFailure("A-update found no KKT point.");
    }

    CVec project_ball(const CVec &c, double eps)
    {
        if (eps < 0.0)
            throw InvalidArgument("Ball radius must be non-negative.");
        const double norm = c.norm();
        if (norm == 0.0)
            return c;
        return std::min(std::sqrt(eps) / norm, 1.0) * c;
    }

    void admm_update_A(AdmmState &s, const LocalProblem &prob, AUpdateMode mode, bool fallbacks)
    {
        const Index u = prob.n_in();
        const CMat v = prob.h_in.adjoint() * s.w - s.dual_lambda;
        s.zeta.resize(u);
        for (Index i = 0; i < u; ++i)
        {
            const CVec h = prob.h_in.col(i);
            Complex anchor = h.dot(s.w_anchor.col(i));
            if (fallbacks && std::abs(anchor) < 1e-12)
            {
                const double hn2 = h.squaredNorm();
                if (!(hn2 > 0.0))
                    throw ZeroChannel("Served UE " + std::to_string(prob.served[i]) + " has a zero channel.");
                s.w_anchor.col(i) = h / std::sqrt(hn2);
                anchor = h.dot(s.w_anchor.col(i));
            }

            const CVec row = v.row(i).transpose();
            const double rest = prob.foreign(i) + prob.sigma2;
            ARowSolution sol;
            try
            {
                sol = solve_a_row(row, i, anchor, prob.gamma(i), rest, prob.tau(i), mode);
            }
            catch (const DegenerateDirection &)
            {
                if (!fallbacks)
                    throw;
                sol.row = row;
                sol.zeta = paper_zeta(row(i), off_norm2(row, i), anchor, prob.gamma(i), rest);
                sol.row(i) = row(i) + sol.zeta * anchor;
            }
            s.a.row(i) = sol.row.transpose();
            s.zeta(i) = sol.zeta;
        }
    }

    void admm_update_B(AdmmState &s, const LocalProblem &prob)
    {
        if (prob.n_out() == 0)
            return;
        const CMat c = prob.h_out.adjoint() * s.w - s.dual_mu;
        for (Index i = 0; i < prob.n_out(); ++i)
            s.b.row(i) = project_ball(c.row(i).transpose(), prob.eps(i)).transpose();
    }

    void admm_update_w(AdmmState &s, const LocalProblem &prob, const SolverConfig &cfg)
    {
        CMat rhs = cfg.rho1 * prob.h_in * (s.a + s.dual_lambda);
        if (prob.n_out() > 0)
            rhs.noalias() += cfg.rho2 * prob.h_out * (s.b + s.dual_mu);
        s.w = s.r_p * rhs;
    }

    void admm_update_duals(AdmmState &s, const LocalProblem &prob)
    {
        s.dual_lambda += s.a - prob.h_in.adjoint() * s.w;
        if (prob.n_out() > 0)
            s.dual_mu += s.b - prob.h_out.adjoint() * s.w;
    }

    CMat local_zf_init(const LocalProblem &prob)
    {
        const CMat &h = prob.h_in;
        const Index u = prob.n_in();
        if (u == 0)
            return CMat(prob.n_tx(), 0);
        CMat gram = h.adjoint() * h;
        const double reg = 1e-10 * gram.trace().real() / double(u);
        gram += reg * CMat::Identity(u, u);
        CMat w = h * gram.ldlt().solve(CMat::Identity(u, u));
        for (Index i = 0; i < u; ++i)
        {
            const double g = std::abs(h.col(i).dot(w.col(i)));
            if (!(g > 0.0) || !std::isfinite(g))
                throw ZeroChannel("Served UE " + std::to_string(prob.served[i]) + " has a zero channel.");
            w.col(i) *= std::sqrt(prob.gamma(i) * prob.sigma2) / g;
        }
        return w;
    }

    double Violation::max() const
    {
        return std::max({sinr, tau, eps});
    }

    Violation subproblem_violation(const LocalProblem &prob, const CMat &w, const CMat &anchor)
    {
        Violation out;
        const CMat g_in = prob.h_in.adjoint() * w;
        for (Index i = 0; i < prob.n_in(); ++i)
        {
            const double off2 = g_in.row(i).squaredNorm() - std::norm(g_in(i, i));
            const Complex a = prob.h_in.col(i).dot(anchor.col(i));
            const double rest = prob.foreign(i) + prob.sigma2;
            const double slack = sinr_slack(g_in(i, i), off2, a, prob.gamma(i), rest);
            out.sinr = std::max(out.sinr, slack / (prob.gamma(i) * rest + std::norm(a)));
            out.tau = std::max(out.tau, (off2 - prob.tau(i)) / (prob.tau(i) + prob.sigma2));
        }
        if (prob.n_out() > 0)
        {
            const CMat g_out = prob.h_out.adjoint() * w;
            for (Index i = 0; i < prob.n_out(); ++i)
                out.eps = std::max(out.eps, (g_out.row(i).squaredNorm() - prob.eps(i)) / (prob.eps(i) + prob.sigma2));
        }
        return out;
    }

    LocalSolution cccp_admm_solve(const LocalProblem &prob, const SolverConfig &cfg, const CMat &w_init,
                                  std::ostream *trace)
    {
        cfg.validate();
        const Index n = prob.n_tx();
        const Index u = prob.n_in();
        const Index o = prob.n_out();

        AdmmState s;
        s.r_p = precompute_rp(prob.h_in, prob.h_out, cfg.rho1, cfg.rho2);
        s.w = w_init.size() == 0 ? local_zf_init(prob) : w_init;
        if (s.w.rows() != Eigen::Index(n) || s.w.cols() != Eigen::Index(u))
            throw InvalidArgument("Initial precoders must be N_T x |U_p|.");
        s.w_anchor = s.w;
        s.a = CMat::Zero(u, u);
        s.b = CMat::Zero(o, u);

        LocalSolution out;
        double change = std::numeric_limits<double>::infinity();
        Index l = 1;
        while (l <= cfg.q1 && change > cfg.tol)
        {
            s.dual_lambda = CMat::Zero(u, u);
            s.dual_mu = CMat::Zero(o, u);
            for (Index m = 1; m <= cfg.q2; ++m)
            {
                admm_update_A(s, prob, cfg.mode, true);
                admm_update_B(s, prob);
                admm_update_w(s, prob, cfg);
                admm_update_duals(s, prob);
                ++out.admm_iterations;

                if (trace)
                {
                    nlohmann::json j;
                    j["bs"] = prob.bs;
                    j["cccp"] = l;
                    j["admm"] = m;
                    j["objective"] = s.w.squaredNorm();
                    j["primal_a"] = (s.a - prob.h_in.adjoint() * s.w).norm();
                    j["primal_b"] = o > 0 ? (s.b - prob.h_out.adjoint() * s.w).norm() : 0.0;
                    *trace << j.dump() << '\n';
                }
            }
            if (!s.w.allFinite())
                throw NumericalFailure("ADMM iterate became non-finite at BS " + std::to_string(prob.bs) + ".");

            const double prev = s.w_anchor.squaredNorm();
            change = prev > 0.0 ? (s.w - s.w_anchor).squaredNorm() / prev : std::numeric_limits<double>::infinity();
            out.violation = subproblem_violation(prob, s.w, s.w_anchor);
            s.w_anchor = s.w;
            out.cccp_iterations = l;
            ++l;
        }
        out.last_change = change;
        out.w = s.w;

        if (cfg.check_feasibility && out.violation.max() > cfg.feasibility_tol)
            throw InfeasibleSubproblem("BS " + std::to_string(prob.bs) + " subproblem violation " +
                                       std::to_string(out.violation.max()) + " exceeds tolerance.");
        return out;
    }

    DecentralizedSolution decentralized_precoders(const ChannelSet &channels, const TargetSinr &gamma,
                                                  const InterferenceBounds &bounds, const NoiseModel &noise,
                                                  const Topology &topology, const SolverConfig &cfg,
                                                  unsigned jobs)
    {
        cfg.validate();
        const Index n_bs = topology.n_bs();
        std::vector<LocalProblem> problems(n_bs);
        for (Index p = 0; p < n_bs; ++p)
            problems[p] = make_local_problem(channels, gamma, bounds, noise.sigma2, topology, p);

        DecentralizedSolution out;
        out.local.resize(n_bs);
        parallel_for(n_bs, jobs, [&](Index p) {
            const auto t0 = std::chrono::steady_clock::now();
            out.local[p] = cccp_admm_solve(problems[p], cfg);
            out.local[p].wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        });

        out.precoders = PrecoderSet(topology);
        out.reads.resize(n_bs);
        for (Index p = 0; p < n_bs; ++p)
        {
            for (Index k = 0; k < problems[p].n_in(); ++k)
                out.precoders.at(topology, problems[p].served[k], p) = out.local[p].w.col(k);
            out.reads[p] = std::move(problems[p].reads);
        }
        return out;
    }
}
