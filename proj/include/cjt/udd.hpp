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

#ifndef CJT_UDD_HPP
#define CJT_UDD_HPP

#include "cjt/bounds.hpp"
#include "cjt/net_model.hpp"

#include <vector>

namespace cjt
{
    // Centralized power-minimization oracle built on uplink-downlink
    // duality. Every vector indexed by serving pair follows
    // Topology::pairs() order.

    struct UddConfig
    {
        double tol = 1e-10;
        Index max_iters = 5000;
        double damping = 1.0;
        // Switch to fallback_damping once this many iterations have run
        Index fallback_after = 200;
        double fallback_damping = 0.5;
    };

    struct MultiplierSet
    {
        RVec lambda;
        Index iterations = 0;
        double last_change = 0.0;

        double at(const Topology &t, Index ue, Index bs) const { return lambda(t.pair_at(ue, bs)); }
    };

    struct CouplingSolution
    {
        RMat f;
        RVec delta;
        std::vector<CVec> w_hat;
    };

    // Sum of lambda_iq over q in T_i, per UE
    RVec aggregate_multipliers(const RVec &lambda, const Topology &topology);

    // Throws NoConvergence after cfg.max_iters or on a non-finite iterate
    MultiplierSet solve_lambda_fixed_point(const ChannelSet &channels, const TargetSinr &gamma,
                                           const Topology &topology, const UddConfig &cfg = {});

    // w_hat_ip = (N_T I + sum_{j != i} c_j h_jp h_jp^H)^{-1} h_ip
    std::vector<CVec> compute_w_hat(const ChannelSet &channels, const RVec &lambda, const Topology &topology);

    RMat coupling_matrix(const ChannelSet &channels, const std::vector<CVec> &w_hat, const TargetSinr &gamma,
                         const Topology &topology);

    // delta = N_T sigma^2 F^{-1} 1. Throws SingularCoupling, or Infeasible
    // naming the first entry that is not strictly positive.
    RVec solve_delta(const RMat &f, double sigma2, Index n_tx);

    PrecoderSet udd_precoders(const std::vector<CVec> &w_hat, const RVec &delta, const Topology &topology);

    InterferenceBounds exact_bounds(const ChannelSet &channels, const std::vector<CVec> &w_hat, const RVec &delta,
                                    const Topology &topology);

    struct UddSolution
    {
        MultiplierSet multipliers;
        CouplingSolution coupling;
        PrecoderSet precoders;
        InterferenceBounds bounds;
    };

    UddSolution solve_udd(const ChannelSet &channels, const TargetSinr &gamma, const Topology &topology,
                          const NoiseModel &noise, const UddConfig &cfg = {});
}

#endif
