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

#include "cjt/bounds.hpp"

#include "cjt/errors.hpp"

#include <cmath>

namespace cjt
{
    const char *to_string(BoundProvenance p)
    {
        switch (p)
        {
        case BoundProvenance::Exact:
            return "exact";
        case BoundProvenance::DeterministicEquivalent:
            return "deterministic-equivalent";
        case BoundProvenance::Scaled:
            return "scaled";
        }
        return "unknown";
    }

    double InterferenceBounds::tau(const Topology &t, Index ue, Index bs) const
    {
        if (!t.serves(bs, ue))
            throw IndexOutOfRange("tau is only defined for serving pairs.");
        return value(ue, bs);
    }

    double InterferenceBounds::eps(const Topology &t, Index ue, Index bs) const
    {
        if (t.serves(bs, ue))
            throw IndexOutOfRange("eps is only defined for non-serving pairs.");
        return value(ue, bs);
    }

    InterferenceBounds InterferenceBounds::scaled(double alpha) const
    {
        if (!(alpha >= 0.0) || !std::isfinite(alpha))
            throw InvalidArgument("Bound scaling must be finite and non-negative.");
        InterferenceBounds out = *this;
        out.value *= alpha;
        out.provenance = BoundProvenance::Scaled;
        return out;
    }

    void InterferenceBounds::validate() const
    {
        for (Eigen::Index i = 0; i < value.rows(); ++i)
            for (Eigen::Index q = 0; q < value.cols(); ++q)
                if (!std::isfinite(value(i, q)) || value(i, q) < 0.0)
                    throw NumericalFailure("Interference bound (" + std::to_string(i) + ", " +
                                           std::to_string(q) + ") is negative or not finite.");
    }
}
