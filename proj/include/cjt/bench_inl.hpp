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

#ifndef CJT_BENCH_INL_HPP
#define CJT_BENCH_INL_HPP

#include "cjt/errors.hpp"

#include <cmath>
#include <string>

namespace cjt::bench
{
    template <typename F>
    double match_rate(F &&rate, double target, double lo, double hi, double rel_tol)
    {
        if (!(lo > 0.0 && hi > lo && target > 0.0 && rel_tol > 0.0))
            throw InvalidArgument("match_rate needs 0 < lo < hi and positive target and tolerance.");
        if (rate(hi) < target * (1.0 - rel_tol))
            throw NumericalFailure("Rate " + std::to_string(target) + " is not reachable with power up to " +
                                   std::to_string(hi) + ".");
        if (rate(lo) >= target)
            return lo;
        // Geometric bisection, the power range spans many decades
        for (int k = 0; k < 200; ++k)
        {
            const double mid = std::sqrt(lo * hi);
            const double r = rate(mid);
            if (std::abs(r - target) <= rel_tol * target)
                return mid;
            (r < target ? lo : hi) = mid;
        }
        return hi;
    }
}

#endif
