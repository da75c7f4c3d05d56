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

#ifndef CJT_TYPES_HPP
#define CJT_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

namespace cjt
{
    using Complex = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RVec = Eigen::VectorXd;
    using RMat = Eigen::MatrixXd;

    using Index = std::size_t;

    // Trace of the product A*B without forming it, O(n^2)
    inline Complex trace_of_product(const CMat &a, const CMat &b)
    {
        return (a.array() * b.transpose().array()).sum();
    }
}

#endif
