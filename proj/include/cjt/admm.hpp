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

#ifndef CJT_ADMM_HPP
#define CJT_ADMM_HPP

#include "cjt/bounds.hpp"
#include "cjt/net_model.hpp"

#include <ostream>
#include <vector>

namespace cjt
{
    enum class AUpdateMode
    {
        // Closed form with both row constraints held at equality
        Paper,
        // Exact projection by KKT case analysis
        Strict
    };

    const char *to_string(AUpdateMode mode);
    AUpdateMode a_update_mode_from_string(const std::string &s);

    struct SolverConfig
    {
        double rho1 = 0.5;
        double rho2 = 0.5;
        Index q1 = 1;
        Index q2 = 1;
        double tol = 1e-8;
        AUpdateMode mode = AUpdateMode::Paper;
        // Throw InfeasibleSubproblem when the final relative constraint
        // violation exceeds feasibility_tol
        bool check_feasibility = false;
        double feasibility_tol = 1e-2;

        // Throws InvalidArgument
        void validate() const;
    };

    // One channel vector read while assembling a local problem
    struct ChannelRead
    {
        Index ue = 0;
        Index bs = 0;
    };

    // Everything BS p may consume: its own channels to all UEs, targets of
    // its served UEs and scalar bounds.
    struct LocalProblem
    {
        Index bs = 0;
        std::vector<Index> served;   // U_p, global UE ids
        std::vector<Index> unserved; // U \ U_p
        CMat h_in;                   // N_T x |U_p|
        CMat h_out;                  // N_T x |U \ U_p|
        RVec gamma;                  // per served UE
        RVec tau;                    // tau_ip per served UE
        RVec eps;                    // eps_ip per unserved UE
        RVec foreign;                // sum of tau_iq (q in T_i \ p) and eps_iq (q not in T_i)
        double sigma2 = 1.0;
        std::vector<ChannelRead> reads;

        Index n_tx() const { return Index(h_in.rows()); }
        Index n_in() const { return served.size(); }
        Index n_out() const { return unserved.size(); }
    };

    LocalProblem make_local_problem(const ChannelSet &channels, const TargetSinr &gamma,
                                    const InterferenceBounds &bounds, double sigma2, const Topology &topology,
                                    Index bs);

    struct AdmmState
    {
        CMat a;        // |U_p| x |U_p|, a(i, j) ~ h_ip^H w_jp
        CMat b;        // |U \ U_p| x |U_p|
        CMat dual_lambda;
        CMat dual_mu;
        CMat r_p;
        CMat w;        // N_T x |U_p|
        CMat w_anchor;
        RVec zeta;
    };

    // (2I + rho1 H_in H_in^H + rho2 H_out H_out^H)^{-1}
    CMat precompute_rp(const CMat &h_in, const CMat &h_out, double rho1, double rho2);

    struct ARowSolution
    {
        CVec row;
        double zeta = 0.0;
        // Multiplier of the tau constraint
        double beta = 0.0;
    };

    // Row i of the A-update. v = row of (H_in^H W - dual_lambda), anchor =
    // h_ip^H w_anchor, rest = foreign + sigma^2. Throws DegenerateAnchor or,
    // in paper mode, DegenerateDirection.
    ARowSolution solve_a_row(const CVec &v, Index i, Complex anchor, double gamma, double rest, double tau,
                             AUpdateMode mode);

    // Euclidean projection of c onto the ball of squared radius eps
    CVec project_ball(const CVec &c, double eps);

    // With fallbacks set, a vanished anchor is replaced by the unit-norm
    // matched filter and a vanished off-diagonal direction keeps the
    // unconstrained values.
    void admm_update_A(AdmmState &s, const LocalProblem &prob, AUpdateMode mode, bool fallbacks = false);
    void admm_update_B(AdmmState &s, const LocalProblem &prob);
    void admm_update_w(AdmmState &s, const LocalProblem &prob, const SolverConfig &cfg);
    void admm_update_duals(AdmmState &s, const LocalProblem &prob);

    // Column-wise regularized ZF on the local serving channels, scaled so
    // that |h_ip^H w_ip|^2 = gamma_ip sigma^2
    CMat local_zf_init(const LocalProblem &prob);

    struct Violation
    {
        double sinr = 0.0;
        double tau = 0.0;
        double eps = 0.0;
        double max() const;
    };

    // Relative violations of the convexified subproblem at (w, anchor)
    Violation subproblem_violation(const LocalProblem &prob, const CMat &w, const CMat &anchor);

    struct LocalSolution
    {
        CMat w;
        Index cccp_iterations = 0;
        Index admm_iterations = 0;
        double last_change = 0.0;
        Violation violation;
        double wall_ms = 0.0; // set by decentralized_precoders
    };

    // Outer CCCP loop around Q2 ADMM sweeps. An empty w_init means local ZF.
    // When trace is set, one JSON object per ADMM iteration is written.
    LocalSolution cccp_admm_solve(const LocalProblem &prob, const SolverConfig &cfg, const CMat &w_init = CMat(),
                                  std::ostream *trace = nullptr);

    // Result of solving every BS independently
    struct DecentralizedSolution
    {
        PrecoderSet precoders;
        std::vector<LocalSolution> local;
        std::vector<std::vector<ChannelRead>> reads; // per BS
    };

    DecentralizedSolution decentralized_precoders(const ChannelSet &channels, const TargetSinr &gamma,
                                                  const InterferenceBounds &bounds, const NoiseModel &noise,
                                                  const Topology &topology, const SolverConfig &cfg,
                                                  unsigned jobs = 1);
}

#endif
