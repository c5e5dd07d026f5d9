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

#ifndef PRDOA_PEAK_SEARCH_HPP
#define PRDOA_PEAK_SEARCH_HPP

#include "array_model.hpp"
#include "errors.hpp"
#include "estimators.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace prdoa
{
    struct DoaEstimate
    {
        std::vector<double> angles; // ascending, degrees
        std::vector<double> values; // spectrum (or objective) value at each angle
        bool fallback_used = false; // fewer than n separated local minima were found
        std::size_t failures = 0;   // failed directions in the source spectrum
    };

    struct PeakOptions
    {
        std::optional<double> min_separation; // degrees; default is two grid cells
        bool refine = false;                  // parabolic interpolation around each minimum
    };

    namespace detail
    {
        // Leftmost index of every strict local minimum; a plateau counts if it is below both outer neighbours
        inline std::vector<std::size_t> local_minima(const std::vector<double> &v)
        {
            std::vector<std::size_t> out;
            const std::size_t G = v.size();
            std::size_t i = 1;
            while (i + 1 < G)
            {
                std::size_t j = i;
                while (j + 1 < G && v[j + 1] == v[i])
                    ++j;
                if (j + 1 < G && std::isfinite(v[i]) && v[i] < v[i - 1] && v[i] < v[j + 1])
                    out.push_back(i);
                i = j + 1;
            }
            return out;
        }

        inline double parabolic_offset(double left, double mid, double right)
        {
            const double curv = left - 2.0 * mid + right;
            if (!(curv > 0.0))
                return 0.0;
            return std::clamp(0.5 * (left - right) / curv, -0.5, 0.5);
        }
    }

    // N deepest separated local minima of a null-spectrum
    inline DoaEstimate find_n_minima(const SpectrumResult &spec, std::size_t n, const PeakOptions &opt = {})
    {
        const auto &grid = spec.grid;
        const auto &v = spec.values;
        const std::size_t G = grid.size();
        if (G < 3 || v.size() != G)
            throw InvalidArgument("find_n_minima: need at least 3 grid points with matching values");
        if (n < 1 || n > G)
            throw InvalidArgument("find_n_minima: n must be in [1, grid size]");

        const double min_sep = opt.min_separation.value_or(2.0 * std::abs(grid[1] - grid[0]));
        if (!(min_sep >= 0.0))
            throw InvalidArgument("find_n_minima: min_separation must be nonnegative");

        DoaEstimate est;
        est.failures = spec.failures;

        auto by_depth = [&](std::size_t a, std::size_t b)
        {
            if (v[a] != v[b])
                return v[a] < v[b];
            return a < b;
        };
        std::vector<std::size_t> accepted;
        auto separated = [&](std::size_t idx)
        {
            for (std::size_t a : accepted)
                if (a == idx || std::abs(grid[a] - grid[idx]) < min_sep)
                    return false;
            return true;
        };

        std::vector<std::size_t> minima = detail::local_minima(v);
        std::stable_sort(minima.begin(), minima.end(), by_depth);
        for (std::size_t idx : minima)
        {
            if (accepted.size() == n)
                break;
            if (separated(idx))
                accepted.push_back(idx);
        }

        if (accepted.size() < n)
        {
            est.fallback_used = true;
            std::vector<std::size_t> all(G);
            std::iota(all.begin(), all.end(), std::size_t{0});
            std::stable_sort(all.begin(), all.end(), by_depth);
            for (std::size_t idx : all)
            {
                if (accepted.size() == n)
                    break;
                if (separated(idx))
                    accepted.push_back(idx);
            }
            // Exclusion zones too wide for the grid: take any unused point
            for (std::size_t idx : all)
            {
                if (accepted.size() == n)
                    break;
                if (std::find(accepted.begin(), accepted.end(), idx) == accepted.end())
                    accepted.push_back(idx);
            }
        }

        std::sort(accepted.begin(), accepted.end());
        for (std::size_t idx : accepted)
        {
            double angle = grid[idx];
            if (opt.refine && idx > 0 && idx + 1 < G && std::isfinite(v[idx - 1]) && std::isfinite(v[idx + 1]))
            {
                const double off = detail::parabolic_offset(v[idx - 1], v[idx], v[idx + 1]);
                angle += off * (off < 0.0 ? grid[idx] - grid[idx - 1] : grid[idx + 1] - grid[idx]);
            }
            est.angles.push_back(angle);
            est.values.push_back(v[idx]);
        }
        return est;
    }

    inline DoaEstimate find_n_minima(const SpectrumResult &spec, std::size_t n, double min_separation)
    {
        PeakOptions opt;
        opt.min_separation = min_separation;
        return find_n_minima(spec, n, opt);
    }

    // tr(P_A^perp R) for A = [a(t1), a(t2)], the two-source deterministic ML cost
    inline double dml2_objective(const SampleCovariance &r, const Eigen::VectorXcd &a1, const Eigen::VectorXcd &a2)
    {
        const double g11 = a1.squaredNorm(), g22 = a2.squaredNorm();
        const cplx g12 = a1.dot(a2);
        const Eigen::VectorXcd Ra1 = r.r_hat() * a1, Ra2 = r.r_hat() * a2;
        const double h11 = a1.dot(Ra1).real(), h22 = a2.dot(Ra2).real();
        const cplx h12 = a1.dot(Ra2);
        const double det = g11 * g22 - std::norm(g12);
        const double fit = (g22 * h11 + g11 * h22 - 2.0 * (g12 * std::conj(h12)).real()) / det;
        return r.r_hat().trace().real() - fit;
    }

    // Exhaustive two-source DML search over all grid pairs t1 < t2
    inline DoaEstimate dml_grid2(const SampleCovariance &r, const SteeringGrid &grid)
    {
        if (r.n_sources() != 2)
            throw Unsupported("dml_grid2: only defined for two sources");
        const Eigen::Index G = grid.size();
        if (G < 2)
            throw InvalidArgument("dml_grid2: grid needs at least two points");

        const Eigen::MatrixXcd &A = grid.steering;
        const Eigen::MatrixXcd RA = r.r_hat() * A;
        Eigen::VectorXd h_diag(G);
        for (Eigen::Index g = 0; g < G; ++g)
            h_diag(g) = A.col(g).dot(RA.col(g)).real();
        const double tr = r.r_hat().trace().real();

        // Maximize tr(G^-1 H) with G = A^H A, H = A^H R A over the 2x2 blocks
        double best = -std::numeric_limits<double>::infinity();
        Eigen::Index bi = 0, bj = 1;
        Eigen::RowVectorXcd grow, hrow;
        for (Eigen::Index i = 0; i + 1 < G; ++i)
        {
            const Eigen::Index rest = G - i - 1;
            grow.noalias() = A.col(i).adjoint() * A.rightCols(rest);
            hrow.noalias() = A.col(i).adjoint() * RA.rightCols(rest);
            const double g11 = grid.norm2(i), h11 = h_diag(i);
            for (Eigen::Index k = 0; k < rest; ++k)
            {
                const Eigen::Index j = i + 1 + k;
                const double g22 = grid.norm2(j);
                const cplx g12 = grow(k), h12 = hrow(k);
                const double det = g11 * g22 - std::norm(g12);
                if (!(det > 1e-12 * g11 * g22))
                    continue;
                const double fit = (g22 * h11 + g11 * h_diag(j) - 2.0 * (g12 * std::conj(h12)).real()) / det;
                if (fit > best)
                {
                    best = fit;
                    bi = i;
                    bj = j;
                }
            }
        }

        DoaEstimate est;
        est.angles = {grid.angles[static_cast<std::size_t>(bi)], grid.angles[static_cast<std::size_t>(bj)]};
        if (est.angles[0] > est.angles[1])
            std::swap(est.angles[0], est.angles[1]);
        est.values = {tr - best, tr - best};
        return est;
    }
}

#endif
