/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/metrics.hpp
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

#ifndef GEOFIT_METRICS_HPP
#define GEOFIT_METRICS_HPP

#include "geofit/core.hpp"
#include "geofit/landmarks.hpp"
#include "geofit/shape_model.hpp"

#include <vector>

namespace geofit {

/// Similarity transform x -> scale * rotation * x + translation.
struct SimilarityTransform
{
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    double scale = 1.0;

    Vec3 apply(const Vec3& x) const { return scale * (rotation * x) + translation; }
};

struct ProcrustesResult
{
    VecX aligned;  ///< transformed source, interleaved 3N
    SimilarityTransform transform;
    double residual = 0.0; ///< sum of squared distances after alignment
};

/**
 * Least-squares similarity alignment of source onto target (rotation,
 * translation and optionally uniform scale; reflections are never returned).
 * Both inputs are interleaved 3N vectors with equal vertex counts >= 3;
 * degenerate (collinear) configurations raise std::invalid_argument.
 */
ProcrustesResult procrustes_align(const VecX& source, const VecX& target, bool with_scale = true);

/**
 * Mean per-vertex Euclidean distance between a reconstruction and ground
 * truth with the same vertex correspondence, after Procrustes alignment of
 * the reconstruction onto the truth. Metres.
 */
double surface_distance(const VecX& reconstruction, const VecX& truth, bool with_scale = true);

/**
 * Mean Euclidean distance between observed and projected landmark positions
 * as a percentage of the given interocular distance (pixels).
 */
double landmark_distance(const Landmarks2D& observed, const std::vector<Vec2>& projected,
                         double interocular_px);

/// Same metric computed from a stacked residual vector [dx1, dy1, ...].
double landmark_error_percent(const VecX& residuals, double interocular_px);

/**
 * Interocular distance in pixels: the distance between the model's first two
 * canonical landmarks (the designated eye vertices) as observed in the
 * landmark set. Falls back to 40% of the observed bounding-box diagonal when
 * the eye vertices are not among the observations.
 */
double interocular_distance(const ShapeModel& model, const Landmarks2D& landmarks);

} /* namespace geofit */

#endif /* GEOFIT_METRICS_HPP */
