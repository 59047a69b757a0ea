/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/landmarks.hpp
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

#ifndef GEOFIT_LANDMARKS_HPP
#define GEOFIT_LANDMARKS_HPP

#include "geofit/camera.hpp"
#include "geofit/shape_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace geofit {

/// One observed 2D point with known model correspondence.
struct LandmarkObservation
{
    std::uint32_t vertex_index = 0;
    Vec2 position = Vec2::Zero(); ///< pixels
};

/**
 * An ordered list of 2D landmark observations. Vertex indices must be
 * distinct; validity against a concrete model is checked by the fitters.
 */
struct Landmarks2D
{
    std::vector<LandmarkObservation> entries;

    std::size_t count() const { return entries.size(); }
    std::vector<std::uint32_t> vertex_indices() const;
    /// Stacked observation vector [x_1, y_1, ..., x_L, y_L].
    VecX stacked() const;

    void validate(std::size_t num_vertices) const;
};

/// CSV with header "vertex_index,x,y", one landmark per line, LF endings.
Landmarks2D load_landmarks(const std::string& path);
void save_landmarks(const Landmarks2D& landmarks, const std::string& path);

/// Project the given model vertices of a synthesized shape to 2D.
Landmarks2D project_landmarks(const VecX& vertices, const std::vector<std::uint32_t>& indices,
                              const OrthoPose& pose);
Landmarks2D project_landmarks(const VecX& vertices, const std::vector<std::uint32_t>& indices,
                              const PerspCamera& camera);

} /* namespace geofit */

#endif /* GEOFIT_LANDMARKS_HPP */
