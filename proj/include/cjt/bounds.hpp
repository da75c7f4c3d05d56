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

#ifndef CJT_BOUNDS_HPP
#define CJT_BOUNDS_HPP

#include "cjt/topology.hpp"
#include "cjt/types.hpp"

#include <string>

namespace cjt
{
    enum class BoundProvenance
    {
        Exact,
        DeterministicEquivalent,
        Scaled
    };

    const char *to_string(BoundProvenance p);

    // Inter-cell interference bounds in Watt. value(i, q) is tau_iq when q
    // serves i and eps_iq otherwise.
    struct InterferenceBounds
    {
        RMat value; // n_ue x n_bs
        BoundProvenance provenance = BoundProvenance::Exact;

        double tau(const Topology &t, Index ue, Index bs) const;
        double eps(const Topology &t, Index ue, Index bs) const;

        // Every entry multiplied by alpha, tagged Scaled
        InterferenceBounds scaled(double alpha) const;

        // Throws NumericalFailure on a negative or non-finite entry
        void validate() const;
    };
}

#endif
