/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/core.hpp
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

#ifndef GEOFIT_CORE_HPP
#define GEOFIT_CORE_HPP

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace geofit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;

/**
 * Error thrown when a model, landmark or edge file does not conform to its
 * format. Carries the byte offset (or line number for text formats) at which
 * the inconsistency was detected.
 */
class format_error : public std::runtime_error
{
public:
    format_error(const std::string& message, std::uint64_t offset)
        : std::runtime_error(message + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset)
    {
    }

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Error thrown when an optimisation produces non-finite values or cannot
/// reach a feasible iterate.
class numeric_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} /* namespace geofit */

#endif /* GEOFIT_CORE_HPP */
