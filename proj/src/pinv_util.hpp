/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: src/pinv_util.hpp
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

#ifndef GEOFIT_PINV_UTIL_HPP
#define GEOFIT_PINV_UTIL_HPP

#include "geofit/core.hpp"

#include <Eigen/SVD>

namespace geofit {
namespace detail {

/// Rank-revealing pseudoinverse; singular values below rel_tol * s_max drop.
struct Pinv
{
    MatX pinv;          ///< n x m
    Eigen::Index rank = 0;
    bool truncated = false; ///< a nonzero singular value was dropped

    VecX solve(const VecX& rhs) const { return pinv * rhs; }
};

inline Pinv pseudo_inverse(const MatX& a, double rel_tol = 1e-10)
{
    Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VecX& sv = svd.singularValues();
    const double cutoff = sv.size() ? rel_tol * sv[0] : 0.0;
    Pinv out;
    VecX inv_sv = VecX::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
    {
        if (sv[i] > cutoff && sv[i] > 0.0)
        {
            inv_sv[i] = 1.0 / sv[i];
            ++out.rank;
        }
        else if (sv[i] > 0.0)
        {
            out.truncated = true;
        }
    }
    out.pinv = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
    return out;
}

/**
 * Derivative of the reduced residual d(x) = A A+ y - y given the derivatives
 * of A and y with respect to one scalar parameter. Uses the product rule with
 * the classic three-term derivative of the pseudoinverse.
 */
inline VecX reduced_residual_derivative(const MatX& a, const MatX& a_pinv, const VecX& y,
                                        const MatX& da, const VecX& dy)
{
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    const MatX range_proj = MatX::Identity(m, m) - a * a_pinv;  // I - A A+
    const MatX null_proj = MatX::Identity(n, n) - a_pinv * a;   // I - A+ A
    const MatX dpinv = -a_pinv * da * a_pinv +
                       a_pinv * a_pinv.transpose() * da.transpose() * range_proj +
                       null_proj * da.transpose() * (a_pinv.transpose() * a_pinv);
    return (a * dpinv + da * a_pinv) * y + a * (a_pinv * dy) - dy;
}

} /* namespace detail */
} /* namespace geofit */

#endif /* GEOFIT_PINV_UTIL_HPP */
