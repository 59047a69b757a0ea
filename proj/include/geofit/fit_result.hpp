/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/fit_result.hpp
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

#ifndef GEOFIT_FIT_RESULT_HPP
#define GEOFIT_FIT_RESULT_HPP

#include "geofit/camera.hpp"
#include "geofit/nls.hpp"

namespace geofit {

enum class CameraKind
{
    orthographic,
    perspective
};

/**
 * Outcome of a landmark / contour fit. `pose` is meaningful for orthographic
 * fits, `camera` for perspective ones; `residuals` holds the stacked image
 * reprojection residuals at the returned parameters and `objective` their
 * squared norm (regularization terms are not included here).
 */
struct FitResult
{
    CameraKind camera_kind = CameraKind::orthographic;
    VecX alpha;
    OrthoPose pose;
    PerspCamera camera;
    VecX residuals;
    double objective = 0.0;
    SolveReport report;
    bool rank_deficient = false;
    int restarts_used = 0;
    int stage2_iterations = 0;          ///< perspective refinement only
    bool correspondence_warning = false; ///< contour loop ended without pairs
    int contour_rounds = 0;
};

} /* namespace geofit */

#endif /* GEOFIT_FIT_RESULT_HPP */
