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

#ifndef CJT_IO_HPP
#define CJT_IO_HPP

#include "cjt/bounds.hpp"
#include "cjt/de.hpp"
#include "cjt/net_model.hpp"
#include "cjt/topology.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace cjt::io
{
    using nlohmann::json;

    inline constexpr int schema_version = 1;

    // Complex data is stored as [re, im] pairs; matrices are arrays of rows
    json to_json(const CVec &v);
    json to_json(const CMat &m);
    json to_json(const RVec &v);
    json to_json(const RMat &m);
    CVec cvec_from_json(const json &j);
    CMat cmat_from_json(const json &j);
    RVec rvec_from_json(const json &j);
    RMat rmat_from_json(const json &j);

    json to_json(const Topology &t);
    Topology topology_from_json(const json &j);

    // Documents carry "schema" and "kind". Readers reject other versions or
    // kinds with IoError.
    json covariance_document(const Topology &t, const CovarianceSet &cov);
    json channel_document(const Topology &t, const ChannelSet &ch);
    json targets_document(const TargetSinr &gamma, double sigma2 = 0.0);
    json bounds_document(const InterferenceBounds &b);
    json precoders_document(const Topology &t, const PrecoderSet &w);
    json de_state_document(const DeState &s);

    struct CovarianceFile
    {
        Topology topology;
        CovarianceSet cov;
    };

    struct ChannelFile
    {
        Topology topology;
        ChannelSet channels;
    };

    struct TargetsFile
    {
        TargetSinr gamma;
        double sigma2 = 0.0; // 0 when the file does not carry one
    };

    CovarianceFile covariance_from_document(const json &j);
    ChannelFile channels_from_document(const json &j);
    TargetsFile targets_from_document(const json &j);
    InterferenceBounds bounds_from_document(const json &j);
    PrecoderSet precoders_from_document(const json &j, const Topology &t);
    DeState de_state_from_document(const json &j);

    // Throws IoError with the path in the message
    json read_json(const std::filesystem::path &path);
    void write_json(const std::filesystem::path &path, const json &j);
}

#endif
