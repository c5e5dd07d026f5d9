// SPDX-License-Identifier: Apache-2.0
//
// prdoa: partial-relaxation direction-of-arrival estimation
// Copyright (C) 2026 The prdoa authors
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

// Random problem generators and small helpers shared by the unit and acceptance tests

#ifndef PRDOA_TESTS_SUPPORT_HPP
#define PRDOA_TESTS_SUPPORT_HPP

#include <prdoa/prdoa.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace prdoa_test
{
    using prdoa::cplx;

    inline Eigen::VectorXcd random_cvec(Eigen::Index n, std::mt19937_64 &rng, double scale = 1.0)
    {
        std::normal_distribution<double> nd(0.0, scale);
        Eigen::VectorXcd v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = cplx(nd(rng), nd(rng));
        return v;
    }

    // X X^H / T with X an M x T Gaussian matrix plus a few strong directions
    inline Eigen::MatrixXcd random_covariance(Eigen::Index M, std::mt19937_64 &rng, Eigen::Index T = 0)
    {
        if (T == 0)
            T = 3 * M;
        Eigen::MatrixXcd X(M, T);
        for (Eigen::Index t = 0; t < T; ++t)
            X.col(t) = random_cvec(M, rng);
        std::uniform_real_distribution<double> ud(0.5, 10.0);
        for (int s = 0; s < 2; ++s)
        {
            const Eigen::VectorXcd u = random_cvec(M, rng).normalized();
            const Eigen::RowVectorXcd w = random_cvec(T, rng).transpose() * std::sqrt(ud(rng));
            X += u * w;
        }
        return X * X.adjoint() / static_cast<double>(T);
    }

    inline prdoa::SampleCovariance random_sample_covariance(Eigen::Index M, std::size_t N, std::mt19937_64 &rng,
                                                            Eigen::Index T = 0)
    {
        return prdoa::SampleCovariance(random_covariance(M, rng, T), N);
    }

    // Random D - rho z z^H, optionally with repeated diagonal entries and zeroed z entries
    inline prdoa::RankOneMod random_mod(Eigen::Index K, std::mt19937_64 &rng, bool duplicates = false, bool zeros = false)
    {
        std::uniform_real_distribution<double> ud(-5.0, 5.0), ur(0.1, 3.0);
        prdoa::RankOneMod m;
        m.d.resize(K);
        for (Eigen::Index k = 0; k < K; ++k)
            m.d(k) = ud(rng);
        m.rho = ur(rng);
        m.z = random_cvec(K, rng);
        std::uniform_int_distribution<Eigen::Index> pick(0, K - 1);
        if (duplicates)
        {
            const Eigen::Index a = pick(rng), b = pick(rng);
            m.d(b) = m.d(a);
            if (K > 3)
                m.d(pick(rng)) = m.d(a);
        }
        if (zeros)
        {
            m.z(pick(rng)) = 0.0;
            if (K > 4)
                m.z(pick(rng)) = 0.0;
        }
        return m;
    }

    inline std::vector<double> sorted_desc(std::vector<double> v)
    {
        std::sort(v.begin(), v.end(), std::greater<>());
        return v;
    }

    inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

    inline double max_rel_err(const std::vector<double> &a, const std::vector<double> &b)
    {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            m = std::max(m, rel_err(a[i], b[i]));
        return m;
    }
}

#endif
