/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: src/persp_fit.cpp
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
#include "geofit/persp_fit.hpp"

#include "geofit/metrics.hpp"
#include "geofit/ortho_fit.hpp"
#include "pinv_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geofit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinFocal = 1e-6;
constexpr double kMinDepth = 1e-6;

Mat3 intrinsics(double f, const Vec2& pp)
{
    Mat3 k = Mat3::Zero();
    k(0, 0) = f;
    k(1, 1) = f;
    k(0, 2) = pp.x();
    k(1, 2) = pp.y();
    k(2, 2) = 1.0;
    return k;
}

const Mat3 kFocalGradient = [] {
    Mat3 m = Mat3::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    return m;
}();

/// Landmark slices plus the Tikhonov augmentation for the DLT reduction.
struct PerspAssembly
{
    MatX basis;
    VecX mean;
    std::vector<Mat3> cross; // skew([x_i; 1])
    VecX sigma;
    Vec2 principal_point;
    double weight = 0.0;
    Eigen::Index num_landmarks = 0;
    Eigen::Index num_modes = 0;

    static PerspAssembly make(const ShapeModel& model, const Landmarks2D& landmarks,
                              const Vec2& principal_point, double weight)
    {
        landmarks.validate(model.num_vertices());
        PerspAssembly a;
        const auto sub = landmark_submatrix(model, landmarks.vertex_indices());
        a.basis = sub.basis;
        a.mean = sub.mean;
        a.sigma = model.sigma;
        a.principal_point = principal_point;
        a.weight = weight;
        a.num_landmarks = static_cast<Eigen::Index>(landmarks.count());
        a.num_modes = static_cast<Eigen::Index>(model.num_modes());
        a.cross.reserve(landmarks.count());
        for (const auto& e : landmarks.entries)
        {
            a.cross.push_back(skew(Vec3(e.position.x(), e.position.y(), 1.0)));
        }
        return a;
    }

    Eigen::Index rows() const { return 3 * num_landmarks + (weight > 0.0 ? num_modes : 0); }
    Eigen::Index cols() const { return num_modes + 3; }

    // axis: 0..2 rotation, 3 focal length, -1 value
    MatX matrix(const Vec3& r, double f, int axis) const
    {
        MatX out = MatX::Zero(rows(), cols());
        Mat3 k;
        Mat3 rot;
        if (axis == 3)
        {
            k = kFocalGradient;
            rot = rodrigues(r);
        }
        else if (axis >= 0)
        {
            k = intrinsics(f, principal_point);
            rot = rodrigues_derivative(r, axis);
        }
        else
        {
            k = intrinsics(f, principal_point);
            rot = rodrigues(r);
        }
        const Mat3 kr = k * rot;
        for (Eigen::Index i = 0; i < num_landmarks; ++i)
        {
            const Mat3 dk = cross[static_cast<std::size_t>(i)] * k;
            out.block(3 * i, 0, 3, num_modes) =
                cross[static_cast<std::size_t>(i)] * kr * basis.middleRows(3 * i, 3);
            if (axis < 0 || axis == 3)
            {
                out.block<3, 3>(3 * i, num_modes) = dk;
            }
        }
        if (weight > 0.0 && axis < 0)
        {
            const double w = std::sqrt(weight);
            for (Eigen::Index kcol = 0; kcol < num_modes; ++kcol)
            {
                out(3 * num_landmarks + kcol, kcol) = w / sigma[kcol];
            }
        }
        return out;
    }

    VecX rhs(const Vec3& r, double f, int axis) const
    {
        VecX out = VecX::Zero(rows());
        Mat3 k;
        Mat3 rot;
        if (axis == 3)
        {
            k = kFocalGradient;
            rot = rodrigues(r);
        }
        else if (axis >= 0)
        {
            k = intrinsics(f, principal_point);
            rot = rodrigues_derivative(r, axis);
        }
        else
        {
            k = intrinsics(f, principal_point);
            rot = rodrigues(r);
        }
        const Mat3 kr = k * rot;
        for (Eigen::Index i = 0; i < num_landmarks; ++i)
        {
            out.segment<3>(3 * i) =
                -(cross[static_cast<std::size_t>(i)] * (kr * mean.segment<3>(3 * i)));
        }
        return out;
    }
};

struct ReducedEval
{
    MatX b;
    VecX z;
    detail::Pinv pinv;
    VecX solution;
    VecX residual;
};

ReducedEval evaluate_reduced(const PerspAssembly& assembly, const Vec3& r, double f)
{
    ReducedEval e;
    e.b = assembly.matrix(r, f, -1);
    e.z = assembly.rhs(r, f, -1);
    e.pinv = detail::pseudo_inverse(e.b);
    e.solution = e.pinv.solve(e.z);
    e.residual = e.b * e.solution - e.z;
    return e;
}

MatX analytic_reduced_jacobian(const PerspAssembly& assembly, const Vec3& r, double f,
                               const ReducedEval& e)
{
    MatX jac(assembly.rows(), 4);
    for (int axis = 0; axis < 4; ++axis)
    {
        const MatX db = assembly.matrix(r, f, axis);
        const VecX dz = assembly.rhs(r, f, axis);
        jac.col(axis) = detail::reduced_residual_derivative(e.b, e.pinv.pinv, e.z, db, dz);
    }
    return jac;
}

MatX fd_reduced_jacobian(const PerspAssembly& assembly, const Vec3& r, double f)
{
    MatX jac(assembly.rows(), 4);
    VecX p(4);
    p << r.x(), r.y(), r.z(), f;
    for (int axis = 0; axis < 4; ++axis)
    {
        const double h = 1e-7 * std::max(1.0, std::abs(p[axis]));
        VecX pf = p;
        VecX pb = p;
        pf[axis] += h;
        pb[axis] -= h;
        jac.col(axis) = (evaluate_reduced(assembly, Vec3(pf[0], pf[1], pf[2]), pf[3]).residual -
                         evaluate_reduced(assembly, Vec3(pb[0], pb[1], pb[2]), pb[3]).residual) /
                        (2.0 * h);
    }
    return jac;
}

/**
 * Stage-2 state: the full reprojection problem over [r, t3d, f, alpha'] with
 * alpha in unit-variance form so the coefficient box is a cube.
 */
struct Refinement
{
    const PerspAssembly& assembly;
    VecX obs; // 2L stacked

    Eigen::Index params() const { return 7 + assembly.num_modes; }
    Eigen::Index rows() const
    {
        return 2 * assembly.num_landmarks + (assembly.weight > 0.0 ? assembly.num_modes : 0);
    }

    VecX residual(const VecX& p) const
    {
        const Vec3 r(p[0], p[1], p[2]);
        const Vec3 t(p[3], p[4], p[5]);
        const double f = p[6];
        const Mat3 rot = rodrigues(r);
        VecX out(rows());
        for (Eigen::Index i = 0; i < assembly.num_landmarks; ++i)
        {
            const Vec3 v = assembly.basis.middleRows(3 * i, 3) *
                               (assembly.sigma.asDiagonal() * p.tail(assembly.num_modes)) +
                           assembly.mean.segment<3>(3 * i);
            const Vec3 w = rot * v + t;
            if (!(w.z() > 0.0))
            {
                return VecX::Constant(rows(), std::numeric_limits<double>::quiet_NaN());
            }
            out[2 * i] = obs[2 * i] -
                         (f * w.x() / w.z() + assembly.principal_point.x());
            out[2 * i + 1] = obs[2 * i + 1] -
                             (f * w.y() / w.z() + assembly.principal_point.y());
        }
        if (assembly.weight > 0.0)
        {
            out.tail(assembly.num_modes) =
                std::sqrt(assembly.weight) * p.tail(assembly.num_modes);
        }
        return out;
    }

    MatX jacobian(const VecX& p) const
    {
        const Vec3 r(p[0], p[1], p[2]);
        const Vec3 t(p[3], p[4], p[5]);
        const double f = p[6];
        const Mat3 rot = rodrigues(r);
        Mat3 drot[3];
        for (int axis = 0; axis < 3; ++axis)
        {
            drot[axis] = rodrigues_derivative(r, axis);
        }
        MatX jac = MatX::Zero(rows(), params());
        for (Eigen::Index i = 0; i < assembly.num_landmarks; ++i)
        {
            const MatX basis_sigma =
                assembly.basis.middleRows(3 * i, 3) * assembly.sigma.asDiagonal(); // 3 x S
            const Vec3 v = basis_sigma * p.tail(assembly.num_modes) +
                           assembly.mean.segment<3>(3 * i);
            const Vec3 w = rot * v + t;
            Eigen::Matrix<double, 2, 3> dproj_dw;
            dproj_dw << f / w.z(), 0.0, -f * w.x() / (w.z() * w.z()), //
                0.0, f / w.z(), -f * w.y() / (w.z() * w.z());
            for (int axis = 0; axis < 3; ++axis)
            {
                jac.block<2, 1>(2 * i, axis) = -(dproj_dw * (drot[axis] * v));
            }
            jac.block<2, 3>(2 * i, 3) = -dproj_dw;
            jac(2 * i, 6) = -w.x() / w.z();
            jac(2 * i + 1, 6) = -w.y() / w.z();
            jac.block(2 * i, 7, 2, assembly.num_modes) = -(dproj_dw * (rot * basis_sigma));
        }
        if (assembly.weight > 0.0)
        {
            const double w = std::sqrt(assembly.weight);
            for (Eigen::Index k = 0; k < assembly.num_modes; ++k)
            {
                jac(2 * assembly.num_landmarks + k, 7 + k) = w;
            }
        }
        return jac;
    }
};

struct Stage1Result
{
    Vec3 r;
    double f = 1.0;
    VecX alpha;
    Vec3 t3d;
    bool rank_deficient = false;
    SolveReport report;
};

Stage1Result run_stage1(const PerspAssembly& assembly, const ShapeModel& model,
                        const Landmarks2D& landmarks, const PerspFitConfig& config)
{
    const Vec3 r0 = config.init_rotation.value_or(Vec3::Zero());
    const double s0 = initial_scale(model, landmarks, r0);
    const double f0 = std::max(kMinFocal, s0 * config.init_distance);

    LeastSquaresProblem problem;
    problem.start = VecX(4);
    problem.start << r0.x(), r0.y(), r0.z(), f0;
    problem.lower = VecX(4);
    problem.lower << -kInf, -kInf, -kInf, kMinFocal;
    problem.upper = VecX::Constant(4, kInf);
    problem.residual = [&assembly](const VecX& p) {
        return evaluate_reduced(assembly, Vec3(p[0], p[1], p[2]), p[3]).residual;
    };
    problem.jacobian = [&assembly](const VecX& p) {
        const Vec3 r(p[0], p[1], p[2]);
        const ReducedEval e = evaluate_reduced(assembly, r, p[3]);
        if (e.pinv.rank < e.b.cols())
        {
            return fd_reduced_jacobian(assembly, r, p[3]);
        }
        return analytic_reduced_jacobian(assembly, r, p[3], e);
    };
    SolveOptions options = config.solver;
    options.max_iterations = config.max_outer_iters;

    Stage1Result out;
    out.report = solve(problem, options);
    out.r = Vec3(out.report.solution[0], out.report.solution[1], out.report.solution[2]);
    out.f = out.report.solution[3];
    const ReducedEval e = evaluate_reduced(assembly, out.r, out.f);
    out.alpha = e.solution.head(assembly.num_modes);
    out.t3d = e.solution.tail<3>();
    out.rank_deficient = e.pinv.truncated || e.pinv.rank < e.b.cols();
    return out;
}

FitResult run_stage2(const PerspAssembly& assembly, const Landmarks2D& landmarks,
                     const Stage1Result& stage1, std::optional<double> fixed_tz,
                     const PerspFitConfig& config)
{
    Refinement refinement{assembly, landmarks.stacked()};

    Vec3 t3d = stage1.t3d;
    double f = stage1.f;
    VecX alpha = stage1.alpha;
    if (fixed_tz)
    {
        // rescale focal length and translation to the requested distance;
        // projections of on-axis geometry are preserved exactly
        if (stage1.t3d.z() > kMinDepth)
        {
            const double c = *fixed_tz / stage1.t3d.z();
            t3d *= c;
            f *= c;
        }
        else
        {
            t3d = Vec3(0.0, 0.0, *fixed_tz);
        }
        t3d.z() = *fixed_tz;
    }
    else if (!(t3d.z() > kMinDepth))
    {
        // degenerate linear recovery; restart from the configured distance
        t3d = Vec3(0.0, 0.0, std::max(config.init_distance, 10.0 * kMinDepth));
    }
    f = std::max(f, kMinFocal);

    const Eigen::Index s = assembly.num_modes;
    VecX p0(7 + s);
    p0 << stage1.r.x(), stage1.r.y(), stage1.r.z(), t3d.x(), t3d.y(), t3d.z(), f,
        (alpha.array() / assembly.sigma.array()).matrix();

    const double box = config.coeff_bound_sigmas;
    VecX lower = VecX::Constant(7 + s, -kInf);
    VecX upper = VecX::Constant(7 + s, kInf);
    lower[5] = fixed_tz ? *fixed_tz : kMinDepth;
    upper[5] = fixed_tz ? *fixed_tz : kInf;
    lower[6] = kMinFocal;
    lower.tail(s).setConstant(-box);
    upper.tail(s).setConstant(box);
    for (Eigen::Index i = 0; i < s; ++i)
    {
        p0[7 + i] = std::clamp(p0[7 + i], -box, box);
    }

    LeastSquaresProblem problem;
    problem.start = p0;
    problem.lower = lower;
    problem.upper = upper;
    problem.residual = [&refinement](const VecX& p) { return refinement.residual(p); };
    problem.jacobian = [&refinement](const VecX& p) { return refinement.jacobian(p); };

    SolveOptions options = config.solver;
    options.max_iterations = config.max_outer_iters;
    const SolveReport report = solve(problem, options);

    const VecX& p = report.solution;
    FitResult result;
    result.camera_kind = CameraKind::perspective;
    result.camera.rotation = Vec3(p[0], p[1], p[2]);
    result.camera.t3d = Vec3(p[3], p[4], p[5]);
    result.camera.focal = p[6];
    result.camera.principal_point = assembly.principal_point;
    result.alpha = (p.tail(s).array() * assembly.sigma.array()).matrix();
    result.residuals = refinement.residual(p).head(2 * assembly.num_landmarks);
    result.objective = result.residuals.squaredNorm();
    result.report = report;
    result.stage2_iterations = report.iterations;
    result.rank_deficient = stage1.rank_deficient;
    return result;
}

} // namespace

MatX assemble_B(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r, double f,
                const Vec2& principal_point)
{
    return PerspAssembly::make(model, landmarks, principal_point, 0.0).matrix(r, f, -1);
}

VecX assemble_z(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r, double f,
                const Vec2& principal_point)
{
    return PerspAssembly::make(model, landmarks, principal_point, 0.0).rhs(r, f, -1);
}

PerspJacobian jacobian_persp_dlt(const ShapeModel& model, const Landmarks2D& landmarks,
                                 const Vec3& r, double f, const Vec2& principal_point)
{
    const auto assembly = PerspAssembly::make(model, landmarks, principal_point, 0.0);
    const ReducedEval e = evaluate_reduced(assembly, r, f);
    PerspJacobian out;
    // the third row of every skew block is dependent, so B never has full row
    // rank; column rank is what the analytic path needs
    if (e.pinv.rank < e.b.cols())
    {
        out.matrix = fd_reduced_jacobian(assembly, r, f);
        out.used_finite_differences = true;
    }
    else
    {
        out.matrix = analytic_reduced_jacobian(assembly, r, f, e);
    }
    return out;
}

FitResult fit_landmarks_persp(const ShapeModel& model, const Landmarks2D& landmarks,
                              const PerspFitConfig& config)
{
    if (landmarks.count() < 4)
    {
        throw std::invalid_argument("fit_landmarks_persp: under-determined, need >= 4 landmarks");
    }
    const auto assembly =
        PerspAssembly::make(model, landmarks, config.principal_point, config.tikhonov_weight);
    const Stage1Result stage1 = run_stage1(assembly, model, landmarks, config);
    return run_stage2(assembly, landmarks, stage1, std::nullopt, config);
}

FitResult fit_landmarks_persp_fixed_tz(const ShapeModel& model, const Landmarks2D& landmarks,
                                       double k, const PerspFitConfig& config)
{
    if (!(k > 0.0))
    {
        throw std::invalid_argument("fit_landmarks_persp_fixed_tz: distance must be positive");
    }
    if (landmarks.count() < 4)
    {
        throw std::invalid_argument(
            "fit_landmarks_persp_fixed_tz: under-determined, need >= 4 landmarks");
    }
    const auto assembly =
        PerspAssembly::make(model, landmarks, config.principal_point, config.tikhonov_weight);
    const Stage1Result stage1 = run_stage1(assembly, model, landmarks, config);
    return run_stage2(assembly, landmarks, stage1, k, config);
}

DistanceEstimate estimate_distance(const ShapeModel& model, const Landmarks2D& landmarks,
                                   const PerspFitConfig& config)
{
    DistanceEstimate out;
    out.fit = fit_landmarks_persp(model, landmarks, config);
    out.t_z = out.fit.camera.t3d.z();

    // probe the ambiguity direction: refit with the distance pinned on both
    // sides of the estimate and compare landmark errors
    const double interocular = interocular_distance(model, landmarks);
    const double base = landmark_error_percent(out.fit.residuals, interocular);
    double max_increase = 0.0;
    for (const double factor :
         {1.0 / config.distance_probe_factor, config.distance_probe_factor})
    {
        const double k = out.t_z * factor;
        if (!(k > 0.0))
        {
            continue;
        }
        const FitResult probe = fit_landmarks_persp_fixed_tz(model, landmarks, k, config);
        const double err = landmark_error_percent(probe.residuals, interocular);
        max_increase = std::max(max_increase, err - base);
    }
    out.low_confidence = max_increase < config.flat_landmark_threshold_percent;
    return out;
}

} /* namespace geofit */
