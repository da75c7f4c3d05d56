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

#ifndef CJT_ERRORS_HPP
#define CJT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cjt
{
    // Base of every error raised by the library
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

#define CJT_DEFINE_ERROR(Name)                \
    class Name : public Error                 \
    {                                         \
    public:                                   \
        using Error::Error;                   \
    };

    CJT_DEFINE_ERROR(InvalidArgument)
    CJT_DEFINE_ERROR(IndexOutOfRange)
    CJT_DEFINE_ERROR(UnservedUser)
    CJT_DEFINE_ERROR(NumericalFailure)
    CJT_DEFINE_ERROR(ZeroChannel)
    CJT_DEFINE_ERROR(ZeroPrecoder)
    CJT_DEFINE_ERROR(SingularSystem)
    CJT_DEFINE_ERROR(SingularCoupling)
    CJT_DEFINE_ERROR(UnstableDerivativeSystem)
    CJT_DEFINE_ERROR(DegenerateAnchor)
    CJT_DEFINE_ERROR(DegenerateDirection)
    CJT_DEFINE_ERROR(InfeasibleSubproblem)
    CJT_DEFINE_ERROR(IoError)
    CJT_DEFINE_ERROR(SpecError)

#undef CJT_DEFINE_ERROR

    // Fixed-point iteration hit its cap; the target SINRs are likely infeasible
    class NoConvergence : public Error
    {
    public:
        NoConvergence(const std::string &what, std::size_t iterations, double last_change)
            : Error(what), iterations_(iterations), last_change_(last_change) {}

        std::size_t iterations() const { return iterations_; }
        double last_change() const { return last_change_; }

    private:
        std::size_t iterations_;
        double last_change_;
    };

    // Power scalings with a non-positive entry: the targets cannot be met
    class Infeasible : public Error
    {
    public:
        Infeasible(const std::string &what, std::size_t index, double value)
            : Error(what), index_(index), value_(value) {}

        // Stacked serving-pair index of the first offending entry
        std::size_t index() const { return index_; }
        double value() const { return value_; }

    private:
        std::size_t index_;
        double value_;
    };
}

#endif
