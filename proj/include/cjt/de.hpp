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

#ifndef CJT_DE_HPP
#define CJT_DE_HPP

#include "cjt/bounds.hpp"
#include "cjt/net_model.hpp"

#include <utility>
#include <vector>

namespace cjt
{
    // Large-system approximations of the centralized oracle that depend on
    // channel covariances only. Nothing in this header takes a ChannelSet.

    struct DeConfig
    {
        double outer_tol = 1e-10;
        double inner_tol = 1e-12;
        Index max_outer = 5000;
        Index max_inner = 10000;
        double damping = 1.0;
        Index fallback_after = 200;
        double fallback_damping = 0.5;
        // L_q must have spectral radius below this before the derivative solve
        double spectral_guard = 1.0 - 1e-6;
    };

    struct DeFixedPoint
    {
        RVec lambda_bar; // serving pairs
        RMat m_bar;      // n_ue x n_bs, every (UE, BS) pair
        Index iterations = 0;
        double last_change = 0.0;
    };

    // Derivative system of one BS q. Column i of u and m_prime holds u_iq and
    // m'_{., i, q}.
    struct DeDerivative
    {
        RMat l;
        RMat u;
        RMat m_prime;
    };

    struct DeState
    {
        RVec lambda_bar;
        RMat m_bar;
        std::vector<CMat> t_mat;
        std::vector<DeDerivative> derivative;
        RMat f_bar;
        RVec delta_bar;
        InterferenceBounds bounds;
    };

    // Nested iteration: each outer step sets lambda_bar = gamma / m_bar and
    // solves the m_bar equations to cfg.inner_tol. Throws NoConvergence.
    DeFixedPoint de_fixed_point(const CovarianceSet &cov, const TargetSinr &gamma, const Topology &topology,
                                const DeConfig &cfg = {});

    // m_bar equations evaluated once at the given point, for residual checks
    RMat de_m_map(const CovarianceSet &cov, const RVec &lambda_bar, const RMat &m_bar, const Topology &topology);

    // T_q = ((1/N_T) sum_k c_k Theta_kq / (1 + c_k m_kq) + I)^{-1} for every q
    std::vector<CMat> de_t_matrix(const CovarianceSet &cov, const RVec &lambda_bar, const RMat &m_bar,
                                  const Topology &topology);

    // Solves (I - L_q) m' = u_iq for every UE i. Throws
    // UnstableDerivativeSystem if the spectral radius of L_q exceeds the guard.
    DeDerivative de_m_prime(const CovarianceSet &cov, const RVec &lambda_bar, const RMat &m_bar, const CMat &t_q,
                            const Topology &topology, Index q, const DeConfig &cfg = {});

    // Off-diagonal coupling entry shared by every row (i, p) and column (j, q)
    double de_coupling_offdiag(const RVec &c, const RMat &m_bar, const std::vector<DeDerivative> &derivative,
                               Index n_tx, Index i, Index j, Index q);

    // (F_bar, delta_bar). Throws SingularCoupling or Infeasible.
    std::pair<RMat, RVec> de_coupling_and_delta(const RVec &lambda_bar, const RMat &m_bar,
                                                const std::vector<DeDerivative> &derivative,
                                                const TargetSinr &gamma, double sigma2, const Topology &topology);

    // tau_bar / eps_bar from delta_bar, multiplied by alpha. Tagged Scaled
    // when alpha != 1.
    InterferenceBounds de_bounds(const DeState &state, const Topology &topology, double alpha = 1.0);

    // Covariances, targets and noise in, populated state with bounds out
    DeState de_interference_bounds(const CovarianceSet &cov, const TargetSinr &gamma, double sigma2,
                                   const Topology &topology, const DeConfig &cfg = {}, double alpha = 1.0);
}

#endif
