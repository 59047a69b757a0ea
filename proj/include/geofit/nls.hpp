/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/nls.hpp
 *
 * Copyright 2026 The geofit3d authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#ifndef GEOFIT_NLS_HPP
#define GEOFIT_NLS_HPP

#include "geofit/core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace geofit {

/**
 * A box-bounded nonlinear least-squares problem, minimizing d(p)' d(p).
 * The Jacobian evaluator is optional; central finite differences are used
 * when it is absent. Empty bound vectors mean unconstrained; entries may be
 * +-infinity, and lower == upper freezes a parameter.
 */
struct LeastSquaresProblem
{
    std::function<VecX(const VecX&)> residual;
    std::function<MatX(const VecX&)> jacobian; ///< optional
    VecX lower;
    VecX upper;
    VecX start;
};

enum class StopReason
{
    gradient,         ///< projected gradient norm below tolerance
    step,             ///< step norm below tolerance
    objective_change, ///< relative objective decrease below tolerance
    max_iterations
};

std::string to_string(StopReason reason);

struct SolveOptions
{
    int max_iterations = 100;
    double objective_tol = 1e-10; ///< relative decrease of d'd per accepted step
    double gradient_tol = 1e-10;  ///< projected gradient infinity norm
    double step_tol = 1e-12;      ///< accepted step norm
    double initial_radius = 1.0;
    double fd_relative_step = 1e-7; ///< for the finite-difference fallback
    /// Called after every accepted iterate with (parameters, objective).
    std::function<void(const VecX&, double)> iterate_hook;
};

struct SolveReport
{
    VecX solution;
    double objective = 0.0; ///< d'd at the solution
    int iterations = 0;
    StopReason reason = StopReason::max_iterations;
    std::vector<double> objective_trace; ///< objective at start and after each accepted step
};

/**
 * Bounded trust-region solver (dogleg steps, reflective clipping at active
 * bounds). The objective trace is non-increasing and every accepted iterate
 * is feasible. Throws numeric_error if the residual is non-finite at the
 * start or the Jacobian becomes non-finite at an accepted iterate.
 */
SolveReport solve(const LeastSquaresProblem& problem, const SolveOptions& options = {});

/**
 * Maximum relative deviation between the analytic Jacobian and central
 * finite differences at p, using max(1, |entry|) as denominator. The point
 * must be strictly inside the bounds by at least `step`.
 */
double check_jacobian(const LeastSquaresProblem& problem, const VecX& p, double step);

} /* namespace geofit */

#endif /* GEOFIT_NLS_HPP */
