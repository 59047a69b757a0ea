/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/camera.hpp
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

#ifndef GEOFIT_CAMERA_HPP
#define GEOFIT_CAMERA_HPP

#include "geofit/core.hpp"

namespace geofit {

/**
 * Scaled orthographic (weak perspective) pose: an axis-angle rotation, a 2D
 * translation in model units and a positive scale in pixels per model unit.
 *
 * The projection of a point v is s*P*R(r)*v + s*t2d, i.e. the scale also
 * multiplies the translation, so t2d lives in pre-scale model units.
 */
struct OrthoPose
{
    Vec3 rotation = Vec3::Zero(); ///< axis-angle, radians * unit axis
    Vec2 t2d = Vec2::Zero();      ///< translation in model units
    double scale = 1.0;           ///< pixels per model unit, > 0
};

/**
 * Pinhole camera: axis-angle rotation and 3D translation relating model to
 * camera coordinates, plus focal length and principal point in pixels.
 * The subject must be in front of the camera (t_z > 0).
 */
struct PerspCamera
{
    Vec3 rotation = Vec3::Zero();
    Vec3 t3d = Vec3::Zero();
    double focal = 1.0; ///< pixels, > 0
    Vec2 principal_point = Vec2::Zero();

    /// Intrinsic matrix K(f) with the stored focal length and principal point.
    Mat3 intrinsics() const;
};

/// Cross-product matrix: skew(a) * b == a x b.
Mat3 skew(const Vec3& a);

/**
 * Axis-angle to rotation matrix (Rodrigues). The rotation angle is |r| about
 * the axis r/|r|; r = 0 yields the identity.
 */
Mat3 rodrigues(const Vec3& r);

/**
 * Analytic derivative of rodrigues() with respect to component r[axis],
 * axis in {0,1,2}. Uses the exact limit skew(e_axis) for |r| below 1e-9,
 * where the general expression loses precision.
 */
Mat3 rodrigues_derivative(const Vec3& r, int axis);

/// Inverse of rodrigues(): recover an axis-angle vector with angle in [0, pi].
Vec3 axis_angle(const Mat3& rotation);

/// Scaled orthographic projection of a single 3D point.
Vec2 sop_project(const Vec3& v, const OrthoPose& pose);

/**
 * Pinhole projection of a single 3D point. Throws numeric_error if the
 * camera-space depth of the point is not positive.
 */
Vec2 pinhole_project(const Vec3& v, const PerspCamera& camera);

/// Camera-space depth (third component of R*v + t3d) of a point.
double pinhole_depth(const Vec3& v, const PerspCamera& camera);

/**
 * Collinearity residual of one observation: skew([x;1]) * K * (R*v + t3d).
 * Zero exactly when v projects onto x with positive depth.
 */
Vec3 dlt_rows(const Vec2& x, const PerspCamera& camera, const Vec3& v);

} /* namespace geofit */

#endif /* GEOFIT_CAMERA_HPP */
