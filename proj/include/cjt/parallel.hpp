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

#ifndef CJT_PARALLEL_HPP
#define CJT_PARALLEL_HPP

#include "cjt/types.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cjt
{
    // Runs f(0) ... f(n-1) on up to `jobs` threads. The first exception
    // thrown by any task is rethrown after all workers have joined.
    template <class F>
    void parallel_for(Index n, unsigned jobs, F &&f)
    {
        const unsigned workers = unsigned(std::min<Index>(std::max(1u, jobs), n));
        if (workers <= 1)
        {
            for (Index k = 0; k < n; ++k)
                f(k);
            return;
        }

        std::atomic<Index> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (Index k = next++; k < n; k = next++)
                {
                    try
                    {
                        f(k);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(error_mutex);
                        if (!error)
                            error = std::current_exception();
                    }
                }
            });
        for (auto &t : pool)
            t.join();
        if (error)
            std::rethrow_exception(error);
    }
}

#endif
