/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: src/metrics.cpp
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
#include "geofit/metrics.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace geofit {

ProcrustesResult procrustes_align(const VecX& source, const VecX& target, bool with_scale)
{
    if (source.size() != target.size())
    {
        throw std::invalid_argument("procrustes_align: vertex counts differ");
    }
    if (source.size() % 3 != 0 || source.size() < 9)
    {
        throw std::invalid_argument("procrustes_align: need at least 3 vertices");
    }
    const Eigen::Index n = source.size() / 3;

    using Map = Eigen::Map<const Eigen::Matrix<double, 3, Eigen::Dynamic>>;
    Map src(source.data(), 3, n);
    Map dst(target.data(), 3, n);

    const Vec3 c_src = src.rowwise().mean();
    const Vec3 c_dst = dst.rowwise().mean();
    const MatX src_c = src.colwise() - c_src;
    const MatX dst_c = dst.colwise() - c_dst;

    const double src_var = src_c.squaredNorm();
    if (src_var <= 0.0)
    {
        throw std::invalid_argument("procrustes_align: degenerate source (all points equal)");
    }
    const Mat3 cov = dst_c * src_c.transpose() / static_cast<double>(n);
    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    // collinear points make the problem rank deficient
    if (svd.singularValues()[1] <= 1e-14 * std::max(svd.singularValues()[0], 1e-300))
    {
        throw std::invalid_argument("procrustes_align: degenerate (collinear) configuration");
    }
    Vec3 d = Vec3::Ones();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0)
    {
        d[2] = -1.0; // flip the least-significant direction, never a reflection
    }
    SimilarityTransform t;
    t.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
    if (with_scale)
    {
        t.scale = (svd.singularValues().dot(d)) * static_cast<double>(n) / src_var;
    }
    t.translation = c_dst - t.scale * (t.rotation * c_src);

    ProcrustesResult out;
    out.transform = t;
    out.aligned.resize(source.size());
    double residual = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const Vec3 mapped = t.apply(src.col(i));
        out.aligned.segment<3>(3 * i) = mapped;
        residual += (mapped - Vec3(dst.col(i))).squaredNorm();
    }
    out.residual = residual;
    return out;
}

double surface_distance(const VecX& reconstruction, const VecX& truth, bool with_scale)
{
    const ProcrustesResult aligned = procrustes_align(reconstruction, truth, with_scale);
    const Eigen::Index n = truth.size() / 3;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        sum += (aligned.aligned.segment<3>(3 * i) - truth.segment<3>(3 * i)).norm();
    }
    return sum / static_cast<double>(n);
}

double landmark_distance(const Landmarks2D& observed, const std::vector<Vec2>& projected,
                         double interocular_px)
{
    if (observed.count() != projected.size())
    {
        throw std::invalid_argument("landmark_distance: count mismatch");
    }
    if (observed.count() == 0)
    {
        throw std::invalid_argument("landmark_distance: empty landmark set");
    }
    if (!(interocular_px > 0.0))
    {
        throw std::invalid_argument("landmark_distance: interocular distance must be positive");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < projected.size(); ++i)
    {
        sum += (observed.entries[i].position - projected[i]).norm();
    }
    return 100.0 * (sum / static_cast<double>(projected.size())) / interocular_px;
}

double landmark_error_percent(const VecX& residuals, double interocular_px)
{
    if (residuals.size() == 0 || residuals.size() % 2 != 0)
    {
        throw std::invalid_argument("landmark_error_percent: need a non-empty 2L residual vector");
    }
    if (!(interocular_px > 0.0))
    {
        throw std::invalid_argument("landmark_error_percent: interocular distance must be positive");
    }
    double sum = 0.0;
    const Eigen::Index pairs = residuals.size() / 2;
    for (Eigen::Index i = 0; i < pairs; ++i)
    {
        sum += residuals.segment<2>(2 * i).norm();
    }
    return 100.0 * (sum / static_cast<double>(pairs)) / interocular_px;
}

double interocular_distance(const ShapeModel& model, const Landmarks2D& landmarks)
{
    if (model.landmark_indices.size() >= 2)
    {
        const Vec2* eye[2] = {nullptr, nullptr};
        for (const auto& e : landmarks.entries)
        {
            if (e.vertex_index == model.landmark_indices[0])
            {
                eye[0] = &e.position;
            }
            if (e.vertex_index == model.landmark_indices[1])
            {
                eye[1] = &e.position;
            }
        }
        if (eye[0] && eye[1])
        {
            const double d = (*eye[0] - *eye[1]).norm();
            if (d > 0.0)
            {
                return d;
            }
        }
    }
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = Vec2::Constant(-std::numeric_limits<double>::infinity());
    for (const auto& e : landmarks.entries)
    {
        lo = lo.cwiseMin(e.position);
        hi = hi.cwiseMax(e.position);
    }
    const double diag = (hi - lo).norm();
    return diag > 0.0 ? 0.4 * diag : 1.0;
}

} /* namespace geofit */
