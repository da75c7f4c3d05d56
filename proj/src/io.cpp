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

#include "cjt/io.hpp"

#include "cjt/errors.hpp"

#include <fstream>

namespace cjt::io
{
    namespace
    {
        void require_array(const json &j, const char *what)
        {
            if (!j.is_array())
                throw IoError(std::string("Expected an array for ") + what + ".");
        }

        Complex complex_from_json(const json &j)
        {
            if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
                throw IoError("Complex entries must be [re, im] pairs.");
            return {j[0].get<double>(), j[1].get<double>()};
        }

        json tagged(const char *kind)
        {
            return json{{"schema", schema_version}, {"kind", kind}};
        }

        void check_header(const json &j, const char *kind)
        {
            if (!j.is_object())
                throw IoError("Document is not a JSON object.");
            if (j.value("schema", -1) != schema_version)
                throw IoError("Unsupported schema version, expected " + std::to_string(schema_version) + ".");
            const std::string got = j.value("kind", std::string());
            if (got != kind)
                throw IoError("Expected a '" + std::string(kind) + "' document, found '" + got + "'.");
        }

        BoundProvenance provenance_from_string(const std::string &s)
        {
            for (auto p : {BoundProvenance::Exact, BoundProvenance::DeterministicEquivalent, BoundProvenance::Scaled})
                if (s == to_string(p))
                    return p;
            throw IoError("Unknown bound provenance '" + s + "'.");
        }

        // Reads a member, turning nlohmann's exceptions into IoError
        template <typename T>
        T member(const json &j, const char *key)
        {
            if (!j.contains(key))
                throw IoError(std::string("Missing field '") + key + "'.");
            try
            {
                return j.at(key).get<T>();
            }
            catch (const json::exception &e)
            {
                throw IoError(std::string("Field '") + key + "': " + e.what());
            }
        }
    }

    json to_json(const CVec &v)
    {
        json out = json::array();
        for (Eigen::Index k = 0; k < v.size(); ++k)
            out.push_back({v(k).real(), v(k).imag()});
        return out;
    }

    json to_json(const CMat &m)
    {
        json out = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
        {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                row.push_back({m(r, c).real(), m(r, c).imag()});
            out.push_back(std::move(row));
        }
        return out;
    }

    json to_json(const RVec &v)
    {
        return json(std::vector<double>(v.data(), v.data() + v.size()));
    }

    json to_json(const RMat &m)
    {
        json out = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
        {
            const RVec row = m.row(r).transpose();
            out.push_back(to_json(row));
        }
        return out;
    }

    CVec cvec_from_json(const json &j)
    {
        require_array(j, "a complex vector");
        CVec v(j.size());
        for (std::size_t k = 0; k < j.size(); ++k)
            v(k) = complex_from_json(j[k]);
        return v;
    }

    CMat cmat_from_json(const json &j)
    {
        require_array(j, "a complex matrix");
        const std::size_t rows = j.size();
        const std::size_t cols = rows ? j[0].size() : 0;
        CMat m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
        {
            require_array(j[r], "a matrix row");
            if (j[r].size() != cols)
                throw IoError("Ragged complex matrix.");
            for (std::size_t c = 0; c < cols; ++c)
                m(r, c) = complex_from_json(j[r][c]);
        }
        return m;
    }

    RVec rvec_from_json(const json &j)
    {
        require_array(j, "a real vector");
        RVec v(j.size());
        for (std::size_t k = 0; k < j.size(); ++k)
        {
            if (!j[k].is_number())
                throw IoError("Real vectors must hold numbers.");
            v(k) = j[k].get<double>();
        }
        return v;
    }

    RMat rmat_from_json(const json &j)
    {
        require_array(j, "a real matrix");
        const std::size_t rows = j.size();
        const std::size_t cols = rows ? j[0].size() : 0;
        RMat m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
        {
            const RVec row = rvec_from_json(j[r]);
            if (std::size_t(row.size()) != cols)
                throw IoError("Ragged real matrix.");
            m.row(r) = row.transpose();
        }
        return m;
    }

    json to_json(const Topology &t)
    {
        json serving = json::array();
        for (Index p = 0; p < t.n_bs(); ++p)
            serving.push_back(t.served(p));
        return {{"n_bs", t.n_bs()}, {"n_ue", t.n_ue()}, {"n_tx", t.n_tx()}, {"serving", serving}};
    }

    Topology topology_from_json(const json &j)
    {
        return Topology::build(member<Index>(j, "n_bs"), member<Index>(j, "n_ue"), member<Index>(j, "n_tx"),
                               member<std::vector<std::vector<Index>>>(j, "serving"));
    }

    json covariance_document(const Topology &t, const CovarianceSet &cov)
    {
        json out = tagged("covariance");
        out["topology"] = to_json(t);
        json theta = json::array();
        for (Index i = 0; i < cov.n_ue; ++i)
        {
            json row = json::array();
            for (Index p = 0; p < cov.n_bs; ++p)
                row.push_back(to_json(cov.at(i, p)));
            theta.push_back(std::move(row));
        }
        out["theta"] = std::move(theta);
        return out;
    }

    CovarianceFile covariance_from_document(const json &j)
    {
        check_header(j, "covariance");
        CovarianceFile f;
        f.topology = topology_from_json(member<json>(j, "topology"));
        const auto &t = f.topology;
        const json theta = member<json>(j, "theta");
        if (!theta.is_array() || theta.size() != t.n_ue())
            throw IoError("'theta' must hold one row per UE.");
        f.cov = CovarianceSet(t.n_ue(), t.n_bs(), t.n_tx());
        for (Index i = 0; i < t.n_ue(); ++i)
        {
            if (!theta[i].is_array() || theta[i].size() != t.n_bs())
                throw IoError("'theta' rows must hold one matrix per BS.");
            for (Index p = 0; p < t.n_bs(); ++p)
            {
                CMat m = cmat_from_json(theta[i][p]);
                if (Index(m.rows()) != t.n_tx() || Index(m.cols()) != t.n_tx())
                    throw IoError("Covariance of UE " + std::to_string(i) + " at BS " + std::to_string(p) +
                                  " is not n_tx x n_tx.");
                f.cov.at(i, p) = std::move(m);
            }
        }
        return f;
    }

    json channel_document(const Topology &t, const ChannelSet &ch)
    {
        json out = tagged("channels");
        out["topology"] = to_json(t);
        json h = json::array();
        for (Index i = 0; i < ch.n_ue; ++i)
        {
            json row = json::array();
            for (Index p = 0; p < ch.n_bs; ++p)
                row.push_back(to_json(ch.at(i, p)));
            h.push_back(std::move(row));
        }
        out["h"] = std::move(h);
        return out;
    }

    ChannelFile channels_from_document(const json &j)
    {
        check_header(j, "channels");
        ChannelFile f;
        f.topology = topology_from_json(member<json>(j, "topology"));
        const auto &t = f.topology;
        const json h = member<json>(j, "h");
        if (!h.is_array() || h.size() != t.n_ue())
            throw IoError("'h' must hold one row per UE.");
        f.channels = ChannelSet(t.n_ue(), t.n_bs(), t.n_tx());
        for (Index i = 0; i < t.n_ue(); ++i)
        {
            if (!h[i].is_array() || h[i].size() != t.n_bs())
                throw IoError("'h' rows must hold one vector per BS.");
            for (Index p = 0; p < t.n_bs(); ++p)
            {
                CVec v = cvec_from_json(h[i][p]);
                if (Index(v.size()) != t.n_tx())
                    throw IoError("Channel vector length differs from n_tx.");
                f.channels.at(i, p) = std::move(v);
            }
        }
        return f;
    }

    json targets_document(const TargetSinr &gamma, double sigma2)
    {
        json out = tagged("targets");
        out["gamma"] = gamma.gamma;
        if (sigma2 > 0.0)
            out["sigma2"] = sigma2;
        return out;
    }

    TargetsFile targets_from_document(const json &j)
    {
        check_header(j, "targets");
        TargetsFile f;
        f.gamma.gamma = member<std::vector<double>>(j, "gamma");
        if (j.contains("sigma2"))
            f.sigma2 = member<double>(j, "sigma2");
        return f;
    }

    json bounds_document(const InterferenceBounds &b)
    {
        json out = tagged("bounds");
        out["provenance"] = to_string(b.provenance);
        out["value"] = to_json(b.value);
        return out;
    }

    InterferenceBounds bounds_from_document(const json &j)
    {
        check_header(j, "bounds");
        InterferenceBounds b;
        b.provenance = provenance_from_string(member<std::string>(j, "provenance"));
        b.value = rmat_from_json(member<json>(j, "value"));
        return b;
    }

    json precoders_document(const Topology &t, const PrecoderSet &w)
    {
        json out = tagged("precoders");
        json pairs = json::array();
        for (Index k = 0; k < t.n_pairs(); ++k)
            pairs.push_back({{"ue", t.pairs()[k].ue}, {"bs", t.pairs()[k].bs}, {"w", to_json(w.w[k])}});
        out["pairs"] = std::move(pairs);
        return out;
    }

    PrecoderSet precoders_from_document(const json &j, const Topology &t)
    {
        check_header(j, "precoders");
        const json pairs = member<json>(j, "pairs");
        if (!pairs.is_array())
            throw IoError("'pairs' must be an array.");
        PrecoderSet w(t);
        std::vector<bool> seen(t.n_pairs(), false);
        for (const auto &e : pairs)
        {
            const Index k = t.pair_at(member<Index>(e, "ue"), member<Index>(e, "bs"));
            w.w[k] = cvec_from_json(member<json>(e, "w"));
            seen[k] = true;
        }
        for (Index k = 0; k < t.n_pairs(); ++k)
            if (!seen[k])
                throw IoError("Missing precoder for serving pair " + std::to_string(k) + ".");
        return w;
    }

    json de_state_document(const DeState &s)
    {
        json out = tagged("de-state");
        out["lambda_bar"] = to_json(s.lambda_bar);
        out["m_bar"] = to_json(s.m_bar);
        json t = json::array();
        for (const auto &m : s.t_mat)
            t.push_back(to_json(m));
        out["t"] = std::move(t);
        json d = json::array();
        for (const auto &x : s.derivative)
            d.push_back({{"l", to_json(x.l)}, {"u", to_json(x.u)}, {"m_prime", to_json(x.m_prime)}});
        out["derivative"] = std::move(d);
        out["f_bar"] = to_json(s.f_bar);
        out["delta_bar"] = to_json(s.delta_bar);
        out["bounds"] = bounds_document(s.bounds);
        return out;
    }

    DeState de_state_from_document(const json &j)
    {
        check_header(j, "de-state");
        DeState s;
        s.lambda_bar = rvec_from_json(member<json>(j, "lambda_bar"));
        s.m_bar = rmat_from_json(member<json>(j, "m_bar"));
        for (const auto &m : member<json>(j, "t"))
            s.t_mat.push_back(cmat_from_json(m));
        for (const auto &x : member<json>(j, "derivative"))
            s.derivative.push_back({rmat_from_json(member<json>(x, "l")), rmat_from_json(member<json>(x, "u")),
                                    rmat_from_json(member<json>(x, "m_prime"))});
        s.f_bar = rmat_from_json(member<json>(j, "f_bar"));
        s.delta_bar = rvec_from_json(member<json>(j, "delta_bar"));
        s.bounds = bounds_from_document(member<json>(j, "bounds"));
        return s;
    }

    json read_json(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw IoError("Cannot open " + path.string() + " for reading.");
        try
        {
            return json::parse(in);
        }
        catch (const json::parse_error &e)
        {
            throw IoError(path.string() + ": " + e.what());
        }
    }

    void write_json(const std::filesystem::path &path, const json &j)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError("Cannot open " + path.string() + " for writing.");
        // Full round-trip precision for doubles is nlohmann's default
        out << j.dump(1) << '\n';
        if (!out)
            throw IoError("Write to " + path.string() + " failed.");
    }
}
