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

#ifndef PRDOA_PRDOA_HPP
#define PRDOA_PRDOA_HPP

#include "errors.hpp"
#include "array_model.hpp"
#include "rank_one_eig.hpp"
#include "estimators.hpp"
#include "peak_search.hpp"
#include "mc_bench.hpp"

#endif
