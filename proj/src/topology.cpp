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

#include "cjt/topology.hpp"

#include "cjt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cjt
{
    Topology Topology::build(Index n_bs, Index n_ue, Index n_tx,
                             const std::vector<std::vector<Index>> &serving)
    {
        if (n_bs == 0 || n_ue == 0 || n_tx == 0)
            throw InvalidArgument("Topology needs at least one BS, one UE and one antenna.");
        if (serving.size() != n_bs)
            throw InvalidArgument("Expected " + std::to_string(n_bs) + " serving lists, got " +
                                  std::to_string(serving.size()) + ".");

        Topology t;
        t.n_bs_ = n_bs;
        t.n_ue_ = n_ue;
        t.n_tx_ = n_tx;
        t.serving_ = serving;
        t.served_by_.assign(n_ue, {});
        t.unserved_.assign(n_bs, {});
        t.local_.assign(n_bs, std::vector<std::optional<Index>>(n_ue));
        t.pair_lookup_.assign(n_ue * n_bs, std::nullopt);

        for (Index p = 0; p < n_bs; ++p)
        {
            const auto &list = serving[p];
            for (Index k = 0; k < list.size(); ++k)
            {
                const Index i = list[k];
                if (i >= n_ue)
                    throw IndexOutOfRange("BS " + std::to_string(p) + " lists UE " + std::to_string(i) +
                                          " but there are only " + std::to_string(n_ue) + " UEs.");
                if (t.local_[p][i])
                    throw InvalidArgument("BS " + std::to_string(p) + " lists UE " + std::to_string(i) + " twice.");
                t.local_[p][i] = k;
                t.served_by_[i].push_back(p);
                t.pair_lookup_[i * n_bs + p] = t.pairs_.size();
                t.pairs_.push_back({i, p});
            }
            for (Index i = 0; i < n_ue; ++i)
                if (!t.local_[p][i])
                    t.unserved_[p].push_back(i);
        }

        for (Index i = 0; i < n_ue; ++i)
            if (t.served_by_[i].empty())
                throw UnservedUser("UE " + std::to_string(i) + " is not served by any BS.");

        return t;
    }

    std::optional<Index> Topology::pair_index(Index ue, Index bs) const
    {
        if (ue >= n_ue_ || bs >= n_bs_)
            throw IndexOutOfRange("Pair (" + std::to_string(ue) + ", " + std::to_string(bs) + ") is out of range.");
        return pair_lookup_[ue * n_bs_ + bs];
    }

    Index Topology::pair_at(Index ue, Index bs) const
    {
        auto k = pair_index(ue, bs);
        if (!k)
            throw IndexOutOfRange("UE " + std::to_string(ue) + " is not served by BS " + std::to_string(bs) + ".");
        return *k;
    }

    Topology Topology::with_n_tx(Index n_tx) const
    {
        if (n_tx == 0)
            throw InvalidArgument("Antenna count must be positive.");
        Topology t = *this;
        t.n_tx_ = n_tx;
        return t;
    }

    std::vector<std::vector<Index>> overlapping_line_layout(Index n_bs, Index n_ue)
    {
        if (n_bs == 0 || n_ue < n_bs + 1)
            throw InvalidArgument("Line layout needs n_ue >= n_bs + 1.");

        std::vector<Index> b(n_bs + 2);
        for (Index k = 0; k < b.size(); ++k)
            b[k] = static_cast<Index>(std::floor(double(k) * double(n_ue) / double(n_bs + 1) + 0.5));

        std::vector<std::vector<Index>> serving(n_bs);
        for (Index p = 0; p < n_bs; ++p)
            for (Index i = b[p]; i < b[p + 2]; ++i)
                serving[p].push_back(i);
        return serving;
    }
}
