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

#ifndef CJT_BASELINES_HPP
#define CJT_BASELINES_HPP

#include "cjt/net_model.hpp"

#include <vector>

namespace cjt
{
    // ZF schemes give every UE unit total power split evenly over its
    // serving BSs; callers normalize to the budget.

    // Each BS nulls intra-cell interference from its own channels only
    PrecoderSet zf_decentralized(const ChannelSet &channels, const Topology &topology);

    // Each UE's precoder spans its serving BSs and nulls every other UE's
    // stacked channel over those BSs
    PrecoderSet zf_centralized(const ChannelSet &channels, const Topology &topology);

    struct WmmseConfig
    {
        double p_total = 10.0;
        Index max_iters = 500;
        // Stop once the relative sum-rate gain of one sweep drops below tol
        double tol = 1e-7;
        // Lower clamp on returned targets; WMMSE may switch a pair off
        double gamma_floor = 1e-4;

        void validate() const;
    };

    struct WmmseResult
    {
        PrecoderSet precoders;
        TargetSinr targets;
        std::vector<double> rate_trace; // sum rate after each sweep
        Index iterations = 0;
        bool converged = false;
    };

    // Sum-rate WMMSE under a total power budget with precoders restricted to
    // serving BSs; targets are the approximate per-pair SINRs at the result
    WmmseResult wmmse_targets(const ChannelSet &channels, const Topology &topology, const NoiseModel &noise,
                              const WmmseConfig &cfg = {});
}

#endif
