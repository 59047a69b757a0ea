/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/ortho_fit.hpp
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

#ifndef GEOFIT_ORTHO_FIT_HPP
#define GEOFIT_ORTHO_FIT_HPP

#include "geofit/fit_result.hpp"
#include "geofit/landmarks.hpp"
#include "geofit/shape_model.hpp"

#include <optional>

namespace geofit {

struct OrthoFitConfig
{
    double tikhonov_weight = 1e-3;  ///< weight on |alpha/sigma|^2 in the linear solves
    double coeff_bound_sigmas = 2.0; ///< box bound k: |alpha_i| <= k * sigma_i
    std::optional<Vec3> init_rotation;
    int max_outer_iters = 100;
    SolveOptions solver;
    /// Landmark error (as % of interocular) above which rotation restarts run.
    double restart_threshold_percent = 5.0;
};

/**
 * Coefficient-and-translation solution of one linear subproblem, together
 * with a flag recording whether the system was rank deficient (resolved by
 * the minimum-norm convention in that case).
 */
struct OrthoLinearSolution
{
    VecX alpha;
    Vec2 t2d = Vec2::Zero();
    bool rank_deficient = false;
};

/**
 * Design matrix of the separable structure: residual = A * [alpha; t2d] - y.
 * Row pair i is s * [ P R Q_i | I_2 ]. The scale multiplies every entry,
 * including the translation block.
 */
MatX assemble_A(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r, double s);

/// Right-hand side: y = s (I_L kron [P R]) mean_L - stacked observations.
VecX assemble_y(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r, double s);

/**
 * Minimum-norm least-squares solve of A [alpha; t2d] = y. With weight > 0,
 * minimizes |A p - y|^2 + weight * |alpha / sigma|^2 (translation is never
 * regularized). Singular values below 1e-10 of the largest are truncated.
 */
OrthoLinearSolution solve_linear(const MatX& a, const VecX& y, const VecX& sigma,
                                 double tikhonov_weight);

/**
 * Residual of the reduced problem at (r, s): the full residual evaluated at
 * the optimal linear parameters for this rotation and scale. Length 2L; the
 * Tikhonov term of config affects the linear solution but only the data
 * residual is returned.
 */
VecX reduced_residual(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r,
                      double s, const OrthoFitConfig& config);

struct OrthoJacobian
{
    MatX matrix; ///< 2L x 4, columns d/dr1, d/dr2, d/dr3, d/ds
    bool used_finite_differences = false;
};

/**
 * Analytic Jacobian of the reduced (unregularized) residual with respect to
 * [r1, r2, r3, s], via the pseudoinverse derivative. Falls back to central
 * differences when the design matrix loses column rank.
 */
OrthoJacobian jacobian_ortho(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r,
                             double s);

/**
 * Separable nonlinear least-squares fit: optimizes (r, s) on the reduced
 * problem with analytic Jacobian, then recovers (alpha, t2d) linearly.
 * Coefficients are clamped to the configured sigma box with one translation
 * re-solve. Throws std::invalid_argument for fewer than two landmarks.
 */
FitResult fit_landmarks_ortho(const ShapeModel& model, const Landmarks2D& landmarks,
                              const OrthoFitConfig& config = {});

/**
 * Alternating least squares baseline: alternates a scaled-orthographic
 * Procrustes pose update with the linear shape solve, accepting a round only
 * if the objective does not increase.
 */
FitResult fit_landmarks_ortho_als(const ShapeModel& model, const Landmarks2D& landmarks,
                                  const OrthoFitConfig& config = {});

/// Scale initialization: observed bounding-box diagonal over the projected
/// mean shape's diagonal at rotation r.
double initial_scale(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r);

} /* namespace geofit */

#endif /* GEOFIT_ORTHO_FIT_HPP */
