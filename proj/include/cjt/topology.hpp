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

#ifndef CJT_TOPOLOGY_HPP
#define CJT_TOPOLOGY_HPP

#include "cjt/types.hpp"

#include <optional>
#include <vector>

namespace cjt
{
    // One (UE, BS) serving relation, i.e. an entry with bs in T_ue
    struct ServingPair
    {
        Index ue = 0;
        Index bs = 0;

        bool operator==(const ServingPair &) const = default;
    };

    // BS/UE index sets of a CJT network. All indices are 0-based.
    //
    // Serving pairs are stacked BS-major and then in the order UEs appear in
    // U_p. A UE served by several BSs owns one slot per serving BS. This
    // ordering is shared by target SINRs, multipliers, the coupling matrix
    // and power scalings.
    class Topology
    {
    public:
        Topology() = default;

        // Throws IndexOutOfRange, UnservedUser or InvalidArgument
        static Topology build(Index n_bs, Index n_ue, Index n_tx,
                              const std::vector<std::vector<Index>> &serving);

        Index n_bs() const { return n_bs_; }
        Index n_ue() const { return n_ue_; }
        Index n_tx() const { return n_tx_; }

        // U_p in configured order
        const std::vector<Index> &served(Index bs) const { return serving_.at(bs); }
        // T_i in increasing BS order
        const std::vector<Index> &serving_bs(Index ue) const { return served_by_.at(ue); }
        // U \ U_p in increasing UE order
        const std::vector<Index> &unserved(Index bs) const { return unserved_.at(bs); }

        bool serves(Index bs, Index ue) const { return local_.at(bs).at(ue).has_value(); }

        // Position of ue inside U_p, if served
        std::optional<Index> local_index(Index bs, Index ue) const { return local_.at(bs).at(ue); }

        Index n_pairs() const { return pairs_.size(); }
        const std::vector<ServingPair> &pairs() const { return pairs_; }
        std::optional<Index> pair_index(Index ue, Index bs) const;
        // Same as pair_index but throws IndexOutOfRange for non-serving pairs
        Index pair_at(Index ue, Index bs) const;

        // Copy with a different antenna count and identical serving sets
        Topology with_n_tx(Index n_tx) const;

    private:
        Index n_bs_ = 0;
        Index n_ue_ = 0;
        Index n_tx_ = 0;
        std::vector<std::vector<Index>> serving_;
        std::vector<std::vector<Index>> served_by_;
        std::vector<std::vector<Index>> unserved_;
        std::vector<std::vector<std::optional<Index>>> local_;
        std::vector<ServingPair> pairs_;
        std::vector<std::optional<Index>> pair_lookup_; // ue * n_bs + bs
    };

    // Overlapping contiguous windows along a line of BSs: with boundaries
    // b_k = round(k * n_ue / (n_bs + 1)), BS p serves UEs [b_p, b_{p+2}).
    // For 3 BSs and 20 UEs this gives 0-9, 5-14 and 10-19.
    std::vector<std::vector<Index>> overlapping_line_layout(Index n_bs, Index n_ue);
}

#endif
