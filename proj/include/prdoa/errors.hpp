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

#ifndef PRDOA_ERRORS_HPP
#define PRDOA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace prdoa
{
    // Bad argument value (non-finite angle, negative loading, malformed grid, ...)
    struct InvalidArgument : std::invalid_argument
    {
        using std::invalid_argument::invalid_argument;
    };

    // Scenario violates the signal model (N >= M, unsorted DOAs, ...)
    struct InvalidScenario : std::invalid_argument
    {
        using std::invalid_argument::invalid_argument;
    };

    // Secular function evaluated exactly at one of its poles
    struct PoleEvaluation : std::domain_error
    {
        using std::domain_error::domain_error;
    };

    // A secular root coincides with a pole, so the eigenvector (D - x I)^-1 z is undefined
    struct DegenerateEigenvector : std::domain_error
    {
        using std::domain_error::domain_error;
    };

    // Covariance cannot be inverted; load it with diagonal_load() first
    struct SingularCovariance : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    // Operation not available for this configuration (e.g. dml_grid2 with N != 2)
    struct Unsupported : std::logic_error
    {
        using std::logic_error::logic_error;
    };

    // Iteration cap hit. Carries the best iterate seen so far.
    struct ConvergenceFailure : std::runtime_error
    {
        double best_iterate;
        int iterations;

        ConvergenceFailure(const std::string &what, double best, int iters)
            : std::runtime_error(what), best_iterate(best), iterations(iters) {}
    };

    // Plan or scenario file could not be parsed
    struct ConfigError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };
}

#endif
