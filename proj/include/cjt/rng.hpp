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

#ifndef CJT_RNG_HPP
#define CJT_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cjt
{
    // SplitMix64 finalizer; used to derive independent stream seeds
    constexpr std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    // Seed of the stream addressed by a tuple of counters, e.g.
    // (seed, realization, ue, bs). Distinct tuples give unrelated streams so
    // draws can be generated in any order or in parallel.
    inline std::uint64_t stream_seed(std::initializer_list<std::uint64_t> key)
    {
        std::uint64_t h = 0x243F6A8885A308D3ull;
        for (std::uint64_t k : key)
            h = splitmix64(h ^ splitmix64(k));
        return h;
    }

    inline std::mt19937_64 make_stream(std::initializer_list<std::uint64_t> key)
    {
        return std::mt19937_64(stream_seed(key));
    }

    // Fading draws of one channel realization
    struct RngKey
    {
        std::uint64_t seed = 0;
        std::uint64_t realization = 0;
    };
}

#endif
