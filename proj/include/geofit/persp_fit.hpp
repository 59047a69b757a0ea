/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/persp_fit.hpp
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

#ifndef GEOFIT_PERSP_FIT_HPP
#define GEOFIT_PERSP_FIT_HPP

#include "geofit/fit_result.hpp"
#include "geofit/landmarks.hpp"
#include "geofit/shape_model.hpp"

#include <optional>

namespace geofit {

struct PerspFitConfig
{
    double tikhonov_weight = 1e-3;
    double coeff_bound_sigmas = 2.0;
    std::optional<Vec3> init_rotation;
    double init_distance = 1.0; ///< metres; seeds f0 = ortho_scale * init_distance
    Vec2 principal_point = Vec2::Zero();
    int max_outer_iters = 100;
    SolveOptions solver;
    /// Distance probing for estimate_distance: refits at estimate / factor and
    /// estimate * factor; flat objectives flag the estimate as low confidence.
    double distance_probe_factor = 1.25;
    double flat_landmark_threshold_percent = 0.02;
};

/**
 * Design matrix of the DLT-linearized problem: the stacked collinearity
 * residuals are B * [alpha; t3d] - z. Block row i is
 * skew([x_i;1]) * K(f) * [ R Q_i | I_3 ].
 */
MatX assemble_B(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r, double f,
                const Vec2& principal_point);

/// Right-hand side: z = -D (I_L kron [K R]) mean_L.
VecX assemble_z(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r, double f,
                const Vec2& principal_point);

struct PerspJacobian
{
    MatX matrix; ///< 3L x 4, columns d/dr1, d/dr2, d/dr3, d/df
    bool used_finite_differences = false;
};

/**
 * Analytic Jacobian of the reduced DLT residual with respect to
 * [r1, r2, r3, f]; central-difference fallback when B loses column rank.
 */
PerspJacobian jacobian_persp_dlt(const ShapeModel& model, const Landmarks2D& landmarks,
                                 const Vec3& r, double f, const Vec2& principal_point);

/**
 * Two-stage perspective fit: (1) separable optimization of (r, f) on the
 * reduced DLT objective with linear recovery of (alpha, t3d); (2) bounded
 * refinement of the true reprojection objective over all S+7 parameters with
 * an analytic chain-rule Jacobian. Requires at least 4 landmarks.
 */
FitResult fit_landmarks_persp(const ShapeModel& model, const Landmarks2D& landmarks,
                              const PerspFitConfig& config = {});

/// fit_landmarks_persp with the subject-camera distance frozen at k metres.
FitResult fit_landmarks_persp_fixed_tz(const ShapeModel& model, const Landmarks2D& landmarks,
                                       double k, const PerspFitConfig& config = {});

struct DistanceEstimate
{
    double t_z = 0.0;
    bool low_confidence = false; ///< objective nearly flat in the distance
    FitResult fit;
};

/**
 * Subject-camera distance recovered as the t_z of the unconstrained fit,
 * with a flatness probe that flags near-orthographic (uninformative) cases.
 */
DistanceEstimate estimate_distance(const ShapeModel& model, const Landmarks2D& landmarks,
                                   const PerspFitConfig& config = {});

} /* namespace geofit */

#endif /* GEOFIT_PERSP_FIT_HPP */
