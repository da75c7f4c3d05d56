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

#include "cjt/bench.hpp"

#include "cjt/errors.hpp"
#include "cjt/parallel.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>

namespace cjt::bench
{
    namespace
    {
        constexpr std::pair<Scheme, const char *> scheme_names[] = {
            {Scheme::Udd, "udd"},
            {Scheme::DeAdmm, "de-admm"},
            {Scheme::Reference, "reference"},
            {Scheme::ExactAdmm, "exact-admm"},
            {Scheme::ZfCentral, "zf-central"},
            {Scheme::ZfLocal, "zf-local"},
            {Scheme::Wmmse, "wmmse"},
        };
    }

    const char *to_string(Scheme s)
    {
        for (auto [k, name] : scheme_names)
            if (k == s)
                return name;
        return "?";
    }

    Scheme scheme_from_string(const std::string &s)
    {
        for (auto [k, name] : scheme_names)
            if (s == name)
                return k;
        throw SpecError("Unknown scheme '" + s + "'.");
    }

    // ---------------------------------------------------------------- parsing

    namespace
    {
        struct Value
        {
            enum Kind
            {
                Number,
                Text,
                Bool,
                List
            } kind = Number;
            double number = 0.0;
            bool integral = false;
            std::string text;
            bool flag = false;
            std::vector<Value> items;
        };

        class LineParser
        {
        public:
            LineParser(const std::string &s, const std::string &where) : s_(s), where_(where) {}

            [[noreturn]] void fail(const std::string &msg) const { throw SpecError(where_ + ": " + msg); }

            void ws()
            {
                while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t'))
                    ++pos_;
            }

            bool at_end()
            {
                ws();
                return pos_ >= s_.size() || s_[pos_] == '#';
            }

            bool eat(char c)
            {
                ws();
                if (pos_ < s_.size() && s_[pos_] == c)
                {
                    ++pos_;
                    return true;
                }
                return false;
            }

            std::string key()
            {
                ws();
                const std::size_t start = pos_;
                while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                            s_[pos_] == '.' || s_[pos_] == '-'))
                    ++pos_;
                if (pos_ == start)
                    fail("expected a key");
                return s_.substr(start, pos_ - start);
            }

            // Appends to out so that ranges can expand in place
            void value(std::vector<Value> &out)
            {
                ws();
                if (pos_ >= s_.size())
                    fail("missing value");
                const char c = s_[pos_];
                if (c == '[')
                {
                    ++pos_;
                    Value list;
                    list.kind = Value::List;
                    if (!eat(']'))
                    {
                        do
                        {
                            ws();
                            if (pos_ < s_.size() && s_[pos_] == ']')
                                break; // trailing comma
                            value(list.items);
                        } while (eat(','));
                        if (!eat(']'))
                            fail("expected ',' or ']'");
                    }
                    out.push_back(std::move(list));
                    return;
                }
                if (c == '"')
                {
                    ++pos_;
                    Value v;
                    v.kind = Value::Text;
                    while (pos_ < s_.size() && s_[pos_] != '"')
                    {
                        if (s_[pos_] == '\\' && pos_ + 1 < s_.size())
                            ++pos_;
                        v.text += s_[pos_++];
                    }
                    if (pos_ >= s_.size())
                        fail("unterminated string");
                    ++pos_;
                    out.push_back(std::move(v));
                    return;
                }
                if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c)))
                {
                    number(out);
                    return;
                }
                const std::string word = key();
                Value v;
                if (word == "true" || word == "false")
                {
                    v.kind = Value::Bool;
                    v.flag = word == "true";
                }
                else
                {
                    v.kind = Value::Text;
                    v.text = word;
                }
                out.push_back(std::move(v));
            }

        private:
            double parse_double(std::size_t start, std::size_t end, bool &integral)
            {
                const std::string tok = s_.substr(start, end - start);
                double x = 0.0;
                const char *b = tok.data();
                const char *e = tok.data() + tok.size();
                if (*b == '+')
                    ++b;
                auto [p, ec] = std::from_chars(b, e, x);
                if (ec != std::errc() || p != e)
                    fail("malformed number '" + tok + "'");
                integral = tok.find_first_of(".eE") == std::string::npos;
                return x;
            }

            void number(std::vector<Value> &out)
            {
                const std::size_t start = pos_;
                auto scan = [&] {
                    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+'))
                        ++pos_;
                    while (pos_ < s_.size())
                    {
                        const char c = s_[pos_];
                        if (c == '.' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '.')
                            break;
                        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' ||
                            ((c == '-' || c == '+') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))
                            ++pos_;
                        else
                            break;
                    }
                };
                scan();
                bool integral = false;
                const double lo = parse_double(start, pos_, integral);
                if (pos_ + 1 < s_.size() && s_[pos_] == '.' && s_[pos_ + 1] == '.')
                {
                    pos_ += 2;
                    const std::size_t hi_start = pos_;
                    scan();
                    bool hi_integral = false;
                    const double hi = parse_double(hi_start, pos_, hi_integral);
                    if (!integral || !hi_integral || lo < 0 || hi < lo)
                        fail("ranges need non-negative integers a..b with a <= b");
                    if (hi - lo > 1e6)
                        fail("range too long");
                    for (double k = lo; k <= hi; k += 1.0)
                    {
                        Value v;
                        v.number = k;
                        v.integral = true;
                        out.push_back(v);
                    }
                    return;
                }
                Value v;
                v.number = lo;
                v.integral = integral;
                out.push_back(v);
            }

            const std::string &s_;
            std::string where_;
            std::size_t pos_ = 0;
        };

        struct Field
        {
            std::string where;
            std::vector<Value> values; // more than one only for a bare range
        };

        [[noreturn]] void bad(const Field &f, const std::string &msg) { throw SpecError(f.where + ": " + msg); }

        const Value &scalar(const Field &f)
        {
            if (f.values.size() != 1 || f.values[0].kind == Value::List)
                bad(f, "expected a single value");
            return f.values[0];
        }

        double as_double(const Field &f)
        {
            const Value &v = scalar(f);
            if (v.kind != Value::Number || !std::isfinite(v.number))
                bad(f, "expected a finite number");
            return v.number;
        }

        std::uint64_t as_u64(const Value &v, const Field &f)
        {
            if (v.kind != Value::Number || !v.integral || v.number < 0 || v.number > 9.0e15)
                bad(f, "expected a non-negative integer");
            return static_cast<std::uint64_t>(v.number);
        }

        Index as_index(const Field &f) { return as_u64(scalar(f), f); }

        bool as_bool(const Field &f)
        {
            const Value &v = scalar(f);
            if (v.kind != Value::Bool)
                bad(f, "expected true or false");
            return v.flag;
        }

        std::string as_text(const Field &f)
        {
            const Value &v = scalar(f);
            if (v.kind != Value::Text)
                bad(f, "expected a string");
            return v.text;
        }

        // A bare scalar or range counts as a list
        std::vector<Value> items(const Field &f)
        {
            if (f.values.size() == 1 && f.values[0].kind == Value::List)
                return f.values[0].items;
            return f.values;
        }

        std::vector<double> as_doubles(const Field &f)
        {
            std::vector<double> out;
            for (const auto &v : items(f))
            {
                if (v.kind != Value::Number || !std::isfinite(v.number))
                    bad(f, "expected a list of numbers");
                out.push_back(v.number);
            }
            return out;
        }

        std::vector<std::uint64_t> as_u64s(const Field &f)
        {
            std::vector<std::uint64_t> out;
            for (const auto &v : items(f))
                out.push_back(as_u64(v, f));
            return out;
        }

        std::vector<std::string> as_texts(const Field &f)
        {
            std::vector<std::string> out;
            for (const auto &v : items(f))
            {
                if (v.kind != Value::Text)
                    bad(f, "expected a list of strings");
                out.push_back(v.text);
            }
            return out;
        }

        void solver_key(SolverConfig &c, const std::string &k, const Field &f)
        {
            if (k == "rho1")
                c.rho1 = as_double(f);
            else if (k == "rho2")
                c.rho2 = as_double(f);
            else if (k == "q1")
                c.q1 = as_index(f);
            else if (k == "q2")
                c.q2 = as_index(f);
            else if (k == "tol")
                c.tol = as_double(f);
            else if (k == "mode")
            {
                try
                {
                    c.mode = a_update_mode_from_string(as_text(f));
                }
                catch (const InvalidArgument &e)
                {
                    bad(f, e.what());
                }
            }
            else if (k == "check_feasibility")
                c.check_feasibility = as_bool(f);
            else if (k == "feasibility_tol")
                c.feasibility_tol = as_double(f);
            else
                bad(f, "unknown solver key '" + k + "'");
        }

        void assign(ExperimentSpec &s, const std::string &key, const Field &f)
        {
            const auto dot = key.find('.');
            if (dot != std::string::npos)
            {
                const std::string group = key.substr(0, dot);
                const std::string k = key.substr(dot + 1);
                if (group == "solver")
                    return solver_key(s.solver, k, f);
                if (group == "reference")
                    return solver_key(s.reference, k, f);
                if (group == "placement")
                {
                    auto &p = s.placement;
                    if (k == "cell_radius")
                        p.cell_radius = as_double(f);
                    else if (k == "site_spacing")
                        p.site_spacing = as_double(f);
                    else if (k == "min_distance")
                        p.min_distance = as_double(f);
                    else if (k == "pathloss_exponent")
                        p.pathloss_exponent = as_double(f);
                    else if (k == "reference_gain")
                        p.reference_gain = as_double(f);
                    else if (k == "seed")
                        s.placement_seed = as_index(f);
                    else
                        bad(f, "unknown placement key '" + k + "'");
                    return;
                }
                if (group == "wmmse")
                {
                    if (k == "p_total")
                        s.wmmse.p_total = as_double(f);
                    else if (k == "max_iters")
                        s.wmmse.max_iters = as_index(f);
                    else if (k == "tol")
                        s.wmmse.tol = as_double(f);
                    else if (k == "gamma_floor")
                        s.wmmse.gamma_floor = as_double(f);
                    else
                        bad(f, "unknown wmmse key '" + k + "'");
                    return;
                }
                if (group == "udd")
                {
                    if (k == "tol")
                        s.udd.tol = as_double(f);
                    else if (k == "max_iters")
                        s.udd.max_iters = as_index(f);
                    else
                        bad(f, "unknown udd key '" + k + "'");
                    return;
                }
                if (group == "de")
                {
                    if (k == "outer_tol")
                        s.de.outer_tol = as_double(f);
                    else if (k == "inner_tol")
                        s.de.inner_tol = as_double(f);
                    else if (k == "max_outer")
                        s.de.max_outer = as_index(f);
                    else if (k == "max_inner")
                        s.de.max_inner = as_index(f);
                    else
                        bad(f, "unknown de key '" + k + "'");
                    return;
                }
                bad(f, "unknown section '" + group + "'");
            }

            if (key == "n_bs")
                s.n_bs = as_index(f);
            else if (key == "n_ue")
                s.n_ue = as_index(f);
            else if (key == "n_tx")
            {
                s.n_tx.clear();
                for (auto v : as_u64s(f))
                    s.n_tx.push_back(v);
            }
            else if (key == "serving")
            {
                s.serving.clear();
                for (const auto &row : items(f))
                {
                    if (row.kind != Value::List)
                        bad(f, "serving must be a list of UE lists");
                    std::vector<Index> ues;
                    for (const auto &v : row.items)
                        ues.push_back(as_u64(v, f));
                    s.serving.push_back(std::move(ues));
                }
            }
            else if (key == "schemes")
            {
                s.schemes.clear();
                for (const auto &name : as_texts(f))
                {
                    try
                    {
                        s.schemes.push_back(scheme_from_string(name));
                    }
                    catch (const SpecError &e)
                    {
                        bad(f, e.what());
                    }
                }
            }
            else if (key == "seeds")
                s.seeds = as_u64s(f);
            else if (key == "snr_db")
                s.snr_db = as_double(f);
            else if (key == "noise_mode")
            {
                try
                {
                    s.noise_mode = noise_normalization_from_string(as_text(f));
                }
                catch (const InvalidArgument &e)
                {
                    bad(f, e.what());
                }
            }
            else if (key == "sigma2")
                s.sigma2 = as_double(f);
            else if (key == "p_total")
                s.p_total = as_double(f);
            else if (key == "alpha")
                s.alpha = as_doubles(f);
            else if (key == "beta")
                s.beta = as_doubles(f);
            else if (key == "corr")
                s.corr = as_double(f);
            else if (key == "targets")
            {
                const std::string t = as_text(f);
                if (t == "wmmse")
                    s.targets = TargetSource::Wmmse;
                else if (t == "constant")
                    s.targets = TargetSource::Constant;
                else
                    bad(f, "targets must be wmmse or constant");
            }
            else if (key == "target_sinr")
                s.target_sinr = as_double(f);
            else if (key == "mode")
            {
                const std::string m = as_text(f);
                if (m == "rate")
                    s.mode = CompareMode::Rate;
                else if (m == "power")
                    s.mode = CompareMode::Power;
                else
                    bad(f, "mode must be rate or power");
            }
            else if (key == "rate_tol")
                s.rate_tol = as_double(f);
            else if (key == "record_timing")
                s.record_timing = as_bool(f);
            else if (key == "output")
                s.output = as_text(f);
            else
                bad(f, "unknown key '" + key + "'");
        }

        std::string strip_cr(std::string line)
        {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            return line;
        }
    }

    ExperimentSpec parse_spec(std::istream &in, const std::string &name)
    {
        ExperimentSpec spec;
        std::set<std::string> seen;
        std::string section;
        std::string line;
        for (std::size_t no = 1; std::getline(in, line); ++no)
        {
            line = strip_cr(line);
            const std::string where = name + ":" + std::to_string(no);
            LineParser p(line, where);
            if (p.at_end())
                continue;
            if (p.eat('['))
            {
                section = p.key();
                if (!p.eat(']') || !p.at_end())
                    p.fail("malformed section header");
                continue;
            }
            const std::string key = (section.empty() ? "" : section + ".") + p.key();
            if (!p.eat('='))
                p.fail("expected '=' after key");
            Field f{where, {}};
            p.value(f.values);
            if (!p.at_end())
                p.fail("trailing characters after value");
            if (!seen.insert(key).second)
                p.fail("duplicate key '" + key + "'");
            assign(spec, key, f);
        }
        spec.validate();
        return spec;
    }

    ExperimentSpec load_spec(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw SpecError("Cannot open spec " + path.string() + ".");
        return parse_spec(in, path.string());
    }

    void apply_override(ExperimentSpec &spec, const std::string &assignment)
    {
        LineParser p(assignment, "override '" + assignment + "'");
        const std::string key = p.key();
        if (!p.eat('='))
            p.fail("expected key=value");
        Field f{"override '" + assignment + "'", {}};
        p.value(f.values);
        if (!p.at_end())
            p.fail("trailing characters after value");
        assign(spec, key, f);
        spec.validate();
    }

    void ExperimentSpec::validate() const
    {
        auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
        if (n_tx.empty() || schemes.empty() || seeds.empty() || alpha.empty() || beta.empty())
            throw SpecError("n_tx, schemes, seeds, alpha and beta must be non-empty.");
        if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
            throw SpecError("Seeds must be distinct.");
        if (std::set<Scheme>(schemes.begin(), schemes.end()).size() != schemes.size())
            throw SpecError("Schemes must be distinct.");
        for (Index n : n_tx)
            if (n == 0)
                throw SpecError("Antenna counts must be positive.");
        for (double a : alpha)
            if (!positive(a))
                throw SpecError("alpha entries must be positive.");
        for (double b : beta)
            if (!positive(b))
                throw SpecError("beta entries must be positive.");
        if (!positive(p_total))
            throw SpecError("p_total must be positive.");
        if (sigma2 && !positive(*sigma2))
            throw SpecError("sigma2 must be positive.");
        if (!std::isfinite(snr_db))
            throw SpecError("snr_db must be finite.");
        if (!(corr >= 0.0 && corr < 1.0))
            throw SpecError("corr must lie in [0, 1).");
        if (!positive(target_sinr))
            throw SpecError("target_sinr must be positive.");
        if (!(rate_tol > 0.0 && rate_tol < 1.0))
            throw SpecError("rate_tol must lie in (0, 1).");
        if (!positive(placement.cell_radius) || !positive(placement.site_spacing) ||
            !positive(placement.min_distance) || !positive(placement.reference_gain) ||
            !std::isfinite(placement.pathloss_exponent))
            throw SpecError("Placement parameters must be positive and finite.");
        try
        {
            Topology::build(n_bs, n_ue, n_tx.front(), serving.empty() ? overlapping_line_layout(n_bs, n_ue) : serving);
            solver.validate();
            reference.validate();
            wmmse.validate();
        }
        catch (const Error &e)
        {
            throw SpecError(e.what());
        }
    }

    // -------------------------------------------------------------- execution

    Index ExperimentResult::failed() const
    {
        return std::count_if(rows.begin(), rows.end(), [](const ResultRow &r) { return !r.ok(); });
    }

    Index ExperimentResult::foreign_reads() const
    {
        Index n = 0;
        for (const auto &r : rows)
            n += r.foreign_reads;
        return n;
    }

    namespace
    {
        using Clock = std::chrono::steady_clock;

        double ms_since(Clock::time_point t0)
        {
            return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        }

        struct DeKey
        {
            Index n_tx;
            std::uint64_t cov_seed;
            std::vector<double> gamma;
            double sigma2;

            auto operator<=>(const DeKey &) const = default;
        };

        class DeCache
        {
        public:
            // Second member is the compute time, 0 on a hit
            std::pair<std::shared_ptr<const DeState>, double> get(const DeKey &key,
                                                                  const std::function<DeState()> &make)
            {
                {
                    std::lock_guard lock(mu_);
                    if (auto it = map_.find(key); it != map_.end())
                    {
                        ++hits_;
                        return {it->second, 0.0};
                    }
                }
                const auto t0 = Clock::now();
                auto state = std::make_shared<const DeState>(make());
                const double ms = ms_since(t0);
                std::lock_guard lock(mu_);
                ++misses_;
                auto [it, inserted] = map_.emplace(key, state);
                return {it->second, ms};
            }

            Index hits() const { return hits_; }
            Index misses() const { return misses_; }

        private:
            std::mutex mu_;
            std::map<DeKey, std::shared_ptr<const DeState>> map_;
            Index hits_ = 0;
            Index misses_ = 0;
        };

        // Everything one (n_tx, seed) cell needs, built once
        struct CellInput
        {
            Topology topology;
            CovarianceSet cov;
            ChannelSet channels;
            NoiseModel noise;
            std::uint64_t cov_seed = 0;
        };

        class CellRunner
        {
        public:
            CellRunner(const ExperimentSpec &spec, DeCache &cache, unsigned inner_jobs)
                : spec_(spec), cache_(cache), inner_jobs_(inner_jobs)
            {
            }

            std::vector<ResultRow> run(const Topology &base, Index n_tx, std::uint64_t seed)
            {
                std::vector<ResultRow> rows;
                auto push_all = [&](const std::string &msg) {
                    for (double b : spec_.beta)
                        for (double a : spec_.alpha)
                            for (Scheme s : spec_.schemes)
                            {
                                ResultRow r = blank(s, n_tx, seed, a, b);
                                r.error = msg;
                                rows.push_back(std::move(r));
                            }
                };

                try
                {
                    setup(base, n_tx, seed);
                }
                catch (const Error &e)
                {
                    push_all(e.what());
                    return rows;
                }

                // Rows that do not depend on (alpha, beta) are solved once
                std::map<Scheme, ResultRow> fixed;
                for (Scheme s : spec_.schemes)
                    if (s == Scheme::Udd || s == Scheme::ZfCentral || s == Scheme::ZfLocal || s == Scheme::Wmmse)
                        fixed[s] = guarded(s, n_tx, seed, 1.0, 1.0);

                for (double b : spec_.beta)
                    for (double a : spec_.alpha)
                        for (Scheme s : spec_.schemes)
                        {
                            if (auto it = fixed.find(s); it != fixed.end())
                            {
                                ResultRow r = it->second;
                                r.alpha = a;
                                r.beta = b;
                                rows.push_back(std::move(r));
                            }
                            else
                                rows.push_back(guarded(s, n_tx, seed, a, b));
                        }
                return rows;
            }

        private:
            ResultRow blank(Scheme s, Index n_tx, std::uint64_t seed, double a, double b) const
            {
                ResultRow r;
                r.scheme = to_string(s);
                r.n_tx = n_tx;
                r.seed = seed;
                r.alpha = a;
                r.beta = b;
                return r;
            }

            void setup(const Topology &base, Index n_tx, std::uint64_t seed)
            {
                in_ = CellInput{};
                wmmse_.reset();
                wmmse_ms_ = 0.0;
                anchor_rate_.reset();
                in_.topology = base.with_n_tx(n_tx);
                in_.cov_seed = spec_.placement_seed.value_or(seed);
                in_.cov = synth_covariance(in_.topology, spec_.corr, spec_.placement, in_.cov_seed);
                in_.channels = draw_channel(in_.cov, {seed, 0});
                if (spec_.sigma2)
                {
                    in_.noise.sigma2 = *spec_.sigma2;
                    in_.noise.snr_db = spec_.snr_db;
                    in_.noise.mode = spec_.noise_mode;
                }
                else
                    in_.noise = calibrate_noise(in_.channels, in_.topology, spec_.snr_db, spec_.noise_mode);
            }

            const WmmseResult &wmmse()
            {
                if (!wmmse_)
                {
                    const auto t0 = Clock::now();
                    wmmse_ = wmmse_targets(in_.channels, in_.topology, in_.noise, spec_.wmmse);
                    wmmse_ms_ = ms_since(t0);
                    if (!wmmse_->converged)
                        spdlog::warn("WMMSE hit its iteration cap at n_tx={}", in_.topology.n_tx());
                }
                return *wmmse_;
            }

            TargetSinr targets(double beta)
            {
                TargetSinr g;
                if (spec_.targets == TargetSource::Wmmse)
                    g = wmmse().targets;
                else
                    g.gamma.assign(in_.topology.n_pairs(), spec_.target_sinr);
                return beta == 1.0 ? g : g.scaled(beta);
            }

            double rate_at(const PrecoderSet &w, double p)
            {
                return sum_rate(sinr_true(normalize_power(w, p), in_.channels, in_.topology, in_.noise));
            }

            double anchor_rate()
            {
                if (!anchor_rate_)
                    anchor_rate_ = rate_at(zf_centralized(in_.channels, in_.topology), spec_.p_total);
                return *anchor_rate_;
            }

            void finish(ResultRow &r, const PrecoderSet &w)
            {
                double p = spec_.p_total;
                if (spec_.mode == CompareMode::Power)
                    p = match_rate([&](double x) { return rate_at(w, x); }, anchor_rate(), spec_.p_total * 1e-6,
                                   spec_.p_total * 1e6, spec_.rate_tol);
                const PrecoderSet scaled = normalize_power(w, p);
                const RVec g = sinr_true(scaled, in_.channels, in_.topology, in_.noise);
                r.sinr.assign(g.data(), g.data() + g.size());
                r.sum_rate = sum_rate(g);
                r.total_power = total_power(scaled);
                if (!std::isfinite(r.sum_rate) || !std::isfinite(r.total_power))
                    throw NumericalFailure("Non-finite rate or power.");
            }

            void decentralized(ResultRow &r, const TargetSinr &g, const InterferenceBounds &bounds,
                               const SolverConfig &cfg)
            {
                const auto sol = decentralized_precoders(in_.channels, g, bounds, in_.noise, in_.topology, cfg,
                                                         inner_jobs_);
                double slowest = 0.0;
                for (Index p = 0; p < sol.local.size(); ++p)
                {
                    slowest = std::max(slowest, sol.local[p].wall_ms);
                    for (const auto &read : sol.reads[p])
                    {
                        ++r.channel_reads;
                        if (read.bs != p)
                            ++r.foreign_reads;
                    }
                }
                r.time_solve_ms = slowest;
                finish(r, sol.precoders);
            }

            ResultRow solve(Scheme s, Index n_tx, std::uint64_t seed, double a, double b)
            {
                ResultRow r = blank(s, n_tx, seed, a, b);
                // Target generation is not charged to any scheme's timing
                TargetSinr g;
                if (s == Scheme::Udd)
                    g = targets(1.0);
                else if (s == Scheme::ExactAdmm || s == Scheme::DeAdmm || s == Scheme::Reference)
                    g = targets(b);
                const auto t0 = Clock::now();
                switch (s)
                {
                case Scheme::ZfLocal:
                {
                    const auto w = zf_decentralized(in_.channels, in_.topology);
                    r.time_solve_ms = ms_since(t0);
                    finish(r, w);
                    break;
                }
                case Scheme::ZfCentral:
                {
                    const auto w = zf_centralized(in_.channels, in_.topology);
                    r.time_solve_ms = ms_since(t0);
                    finish(r, w);
                    break;
                }
                case Scheme::Wmmse:
                {
                    const auto &w = wmmse().precoders;
                    r.time_solve_ms = wmmse_ms_;
                    finish(r, w);
                    break;
                }
                case Scheme::Udd:
                {
                    const auto sol = solve_udd(in_.channels, g, in_.topology, in_.noise, spec_.udd);
                    r.time_solve_ms = ms_since(t0);
                    finish(r, sol.precoders);
                    break;
                }
                case Scheme::ExactAdmm:
                {
                    const auto oracle = solve_udd(in_.channels, g, in_.topology, in_.noise, spec_.udd);
                    r.time_bounds_ms = ms_since(t0);
                    decentralized(r, g, a == 1.0 ? oracle.bounds : oracle.bounds.scaled(a), spec_.reference);
                    break;
                }
                case Scheme::DeAdmm:
                case Scheme::Reference:
                {
                    auto [state, ms] =
                        cache_.get({n_tx, in_.cov_seed, g.gamma, in_.noise.sigma2}, [&] {
                            return de_interference_bounds(in_.cov, g, in_.noise.sigma2, in_.topology, spec_.de);
                        });
                    r.time_bounds_ms = ms;
                    const auto &cfg = s == Scheme::DeAdmm ? spec_.solver : spec_.reference;
                    decentralized(r, g, a == 1.0 ? state->bounds : state->bounds.scaled(a), cfg);
                    break;
                }
                }
                if (!spec_.record_timing)
                    r.time_bounds_ms = r.time_solve_ms = 0.0;
                return r;
            }

            ResultRow guarded(Scheme s, Index n_tx, std::uint64_t seed, double a, double b)
            {
                try
                {
                    return solve(s, n_tx, seed, a, b);
                }
                catch (const Error &e)
                {
                    spdlog::warn("{} n_tx={} seed={} alpha={} beta={}: {}", to_string(s), n_tx, seed, a, b, e.what());
                    ResultRow r = blank(s, n_tx, seed, a, b);
                    r.error = e.what();
                    return r;
                }
            }

            const ExperimentSpec &spec_;
            DeCache &cache_;
            unsigned inner_jobs_;
            CellInput in_;
            std::optional<WmmseResult> wmmse_;
            double wmmse_ms_ = 0.0;
            std::optional<double> anchor_rate_;
        };
    }

    ExperimentResult run_experiment(const ExperimentSpec &spec, unsigned jobs, std::uint64_t seed_offset)
    {
        spec.validate();
        if (jobs == 0)
            jobs = 1;
        const Topology base = Topology::build(spec.n_bs, spec.n_ue, spec.n_tx.front(),
                                              spec.serving.empty() ? overlapping_line_layout(spec.n_bs, spec.n_ue)
                                                                   : spec.serving);

        std::vector<std::pair<Index, std::uint64_t>> cells;
        for (Index n : spec.n_tx)
            for (auto s : spec.seeds)
                cells.emplace_back(n, s + seed_offset);

        // Spare workers go to the per-BS solves when there are few cells
        const unsigned inner = cells.size() >= jobs ? 1u : jobs;
        DeCache cache;
        std::vector<std::vector<ResultRow>> per_cell(cells.size());
        parallel_for(cells.size(), cells.size() >= jobs ? jobs : 1u, [&](Index k) {
            CellRunner runner(spec, cache, inner);
            per_cell[k] = runner.run(base, cells[k].first, cells[k].second);
            spdlog::debug("finished n_tx={} seed={}", cells[k].first, cells[k].second);
        });

        ExperimentResult out;
        for (auto &rows : per_cell)
            for (auto &r : rows)
                out.rows.push_back(std::move(r));
        out.de_cache_hits = cache.hits();
        out.de_cache_misses = cache.misses();
        return out;
    }

    // ----------------------------------------------------------------- output

    namespace
    {
        std::string fmt9(double x)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.9g", x);
            return buf;
        }
    }

    void emit_csv(const std::vector<ResultRow> &rows, const std::filesystem::path &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError("Cannot open " + path.string() + " for writing.");
        out << "scheme,n_tx,seed,alpha,beta,sum_rate,total_power,time_bounds_ms,time_solve_ms\n";
        for (const auto &r : rows)
        {
            if (!r.ok())
                continue;
            out << r.scheme << ',' << r.n_tx << ',' << r.seed << ',' << fmt9(r.alpha) << ',' << fmt9(r.beta) << ','
                << fmt9(r.sum_rate) << ',' << fmt9(r.total_power) << ',' << fmt9(r.time_bounds_ms) << ','
                << fmt9(r.time_solve_ms) << '\n';
        }
        if (!out)
            throw IoError("Write to " + path.string() + " failed.");
    }

    void emit_json(const std::vector<ResultRow> &rows, const std::filesystem::path &path)
    {
        using nlohmann::json;
        json list = json::array();
        for (const auto &r : rows)
        {
            json j{{"scheme", r.scheme},
                   {"n_tx", r.n_tx},
                   {"seed", r.seed},
                   {"alpha", r.alpha},
                   {"beta", r.beta},
                   {"sum_rate", r.sum_rate},
                   {"total_power", r.total_power},
                   {"sinr", r.sinr},
                   {"time_bounds_ms", r.time_bounds_ms},
                   {"time_solve_ms", r.time_solve_ms},
                   {"channel_reads", r.channel_reads},
                   {"foreign_reads", r.foreign_reads}};
            if (!r.ok())
                j["error"] = r.error;
            list.push_back(std::move(j));
        }
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError("Cannot open " + path.string() + " for writing.");
        out << json{{"schema", 1}, {"kind", "results"}, {"rows", list}}.dump(1) << '\n';
        if (!out)
            throw IoError("Write to " + path.string() + " failed.");
    }

    std::vector<ResultRow> read_json_rows(const std::filesystem::path &path)
    {
        using nlohmann::json;
        std::ifstream in(path);
        if (!in)
            throw IoError("Cannot open " + path.string() + " for reading.");
        std::vector<ResultRow> rows;
        try
        {
            const json doc = json::parse(in);
            if (doc.value("schema", -1) != 1 || doc.value("kind", std::string()) != "results")
                throw IoError(path.string() + ": not a schema 1 results document.");
            for (const auto &j : doc.at("rows"))
            {
                ResultRow r;
                r.scheme = j.at("scheme").get<std::string>();
                r.n_tx = j.at("n_tx").get<Index>();
                r.seed = j.at("seed").get<std::uint64_t>();
                r.alpha = j.at("alpha").get<double>();
                r.beta = j.at("beta").get<double>();
                r.sum_rate = j.at("sum_rate").get<double>();
                r.total_power = j.at("total_power").get<double>();
                r.sinr = j.at("sinr").get<std::vector<double>>();
                r.time_bounds_ms = j.at("time_bounds_ms").get<double>();
                r.time_solve_ms = j.at("time_solve_ms").get<double>();
                r.channel_reads = j.at("channel_reads").get<Index>();
                r.foreign_reads = j.at("foreign_reads").get<Index>();
                r.error = j.value("error", std::string());
                rows.push_back(std::move(r));
            }
        }
        catch (const json::exception &e)
        {
            throw IoError(path.string() + ": " + e.what());
        }
        return rows;
    }
}
