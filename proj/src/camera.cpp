/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: src/camera.cpp
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
#include "geofit/camera.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <string>

namespace geofit {

Mat3 PerspCamera::intrinsics() const
{
    Mat3 k = Mat3::Zero();
    k(0, 0) = focal;
    k(1, 1) = focal;
    k(0, 2) = principal_point.x();
    k(1, 2) = principal_point.y();
    k(2, 2) = 1.0;
    return k;
}

Mat3 skew(const Vec3& a)
{
    Mat3 m;
    m << 0.0, -a.z(), a.y(), //
        a.z(), 0.0, -a.x(),  //
        -a.y(), a.x(), 0.0;
    return m;
}

Mat3 rodrigues(const Vec3& r)
{
    const double theta = r.norm();
    if (theta == 0.0)
    {
        return Mat3::Identity();
    }
    const Vec3 axis = r / theta;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return c * Mat3::Identity() + s * skew(axis) + (1.0 - c) * (axis * axis.transpose());
}

Mat3 rodrigues_derivative(const Vec3& r, int axis)
{
    if (axis < 0 || axis > 2)
    {
        throw std::invalid_argument("rodrigues_derivative: axis must be 0, 1 or 2");
    }
    const Vec3 e = Vec3::Unit(axis);
    const double norm2 = r.squaredNorm();
    if (r.norm() < 1e-9)
    {
        return skew(e);
    }
    const Mat3 rot = rodrigues(r);
    const Vec3 cross_term = r.cross((Mat3::Identity() - rot) * e);
    return ((r[axis] * skew(r) + skew(cross_term)) / norm2) * rot;
}

Vec3 axis_angle(const Mat3& rotation)
{
    const double cos_theta = std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
    const double theta = std::acos(cos_theta);
    if (theta < 1e-12)
    {
        return Vec3::Zero();
    }
    if (theta > 3.14159265358979323846 - 1e-6)
    {
        // near pi the skew part vanishes; recover the axis from R + I
        const Mat3 sym = 0.5 * (rotation + Mat3::Identity());
        Eigen::Index k = 0;
        sym.diagonal().maxCoeff(&k);
        Vec3 axis = sym.col(k) / std::sqrt(std::max(sym(k, k), 1e-300));
        axis.normalize();
        // fix the sign using the (tiny) skew part
        const Vec3 w(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                     rotation(1, 0) - rotation(0, 1));
        if (w.dot(axis) < 0.0)
        {
            axis = -axis;
        }
        return theta * axis;
    }
    const Vec3 w(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                 rotation(1, 0) - rotation(0, 1));
    return (theta / (2.0 * std::sin(theta))) * w;
}

Vec2 sop_project(const Vec3& v, const OrthoPose& pose)
{
    const Vec3 rotated = rodrigues(pose.rotation) * v;
    return pose.scale * (rotated.head<2>() + pose.t2d);
}

double pinhole_depth(const Vec3& v, const PerspCamera& camera)
{
    return (rodrigues(camera.rotation) * v + camera.t3d).z();
}

Vec2 pinhole_project(const Vec3& v, const PerspCamera& camera)
{
    const Vec3 w = rodrigues(camera.rotation) * v + camera.t3d;
    if (!(w.z() > 0.0))
    {
        throw numeric_error("pinhole_project: point at depth " + std::to_string(w.z()) +
                            " is behind the camera");
    }
    return Vec2(camera.focal * w.x() / w.z() + camera.principal_point.x(),
                camera.focal * w.y() / w.z() + camera.principal_point.y());
}

Vec3 dlt_rows(const Vec2& x, const PerspCamera& camera, const Vec3& v)
{
    const Vec3 x_h(x.x(), x.y(), 1.0);
    const Vec3 w = rodrigues(camera.rotation) * v + camera.t3d;
    return skew(x_h) * (camera.intrinsics() * w);
}

} /* namespace geofit */
