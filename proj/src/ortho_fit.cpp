/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: src/ortho_fit.cpp
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
#include "geofit/ortho_fit.hpp"

#include "geofit/metrics.hpp"
#include "pinv_util.hpp"

#include <Eigen/Geometry>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace geofit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/**
 * Cached landmark slices plus the Tikhonov weight. When the weight is
 * positive every matrix/vector carries S extra rows sqrt(w) [diag(1/sigma) 0]
 * so the plain pseudoinverse machinery minimizes the regularized objective.
 */
struct OrthoAssembly
{
    MatX basis;  // 3L x S
    VecX mean;   // 3L
    VecX obs;    // 2L
    VecX sigma;  // S
    double weight = 0.0;
    Eigen::Index num_landmarks = 0;
    Eigen::Index num_modes = 0;

    static OrthoAssembly make(const ShapeModel& model, const Landmarks2D& landmarks,
                              double weight)
    {
        landmarks.validate(model.num_vertices());
        OrthoAssembly a;
        const auto sub = landmark_submatrix(model, landmarks.vertex_indices());
        a.basis = sub.basis;
        a.mean = sub.mean;
        a.obs = landmarks.stacked();
        a.sigma = model.sigma;
        a.weight = weight;
        a.num_landmarks = static_cast<Eigen::Index>(landmarks.count());
        a.num_modes = static_cast<Eigen::Index>(model.num_modes());
        return a;
    }

    Eigen::Index rows() const { return 2 * num_landmarks + (weight > 0.0 ? num_modes : 0); }
    Eigen::Index cols() const { return num_modes + 2; }

    // axis: 0..2 for the rotation components, 3 for scale, -1 for the value
    MatX matrix(const Vec3& r, double s, int axis) const
    {
        const Mat3 rot = rodrigues(r);
        MatX out = MatX::Zero(rows(), cols());
        Eigen::Matrix<double, 2, 3> pr;
        double translation_entry = 0.0;
        if (axis < 0)
        {
            pr = s * rot.topRows<2>();
            translation_entry = s;
        }
        else if (axis == 3)
        {
            pr = rot.topRows<2>();
            translation_entry = 1.0;
        }
        else
        {
            pr = s * rodrigues_derivative(r, axis).topRows<2>();
            translation_entry = 0.0;
        }
        for (Eigen::Index i = 0; i < num_landmarks; ++i)
        {
            out.block(2 * i, 0, 2, num_modes) = pr * basis.middleRows(3 * i, 3);
            out(2 * i, num_modes) = translation_entry;
            out(2 * i + 1, num_modes + 1) = translation_entry;
        }
        if (weight > 0.0 && axis < 0)
        {
            const double w = std::sqrt(weight);
            for (Eigen::Index k = 0; k < num_modes; ++k)
            {
                out(2 * num_landmarks + k, k) = w / sigma[k];
            }
        }
        return out;
    }

    VecX rhs(const Vec3& r, double s, int axis) const
    {
        const Mat3 rot = rodrigues(r);
        VecX out = VecX::Zero(rows());
        Eigen::Matrix<double, 2, 3> pr;
        bool subtract_obs = false;
        if (axis < 0)
        {
            pr = s * rot.topRows<2>();
            subtract_obs = true;
        }
        else if (axis == 3)
        {
            pr = rot.topRows<2>();
        }
        else
        {
            pr = s * rodrigues_derivative(r, axis).topRows<2>();
        }
        for (Eigen::Index i = 0; i < num_landmarks; ++i)
        {
            out.segment<2>(2 * i) = pr * mean.segment<3>(3 * i);
        }
        if (subtract_obs)
        {
            out.head(2 * num_landmarks) -= obs;
        }
        return out;
    }
};

struct ReducedEval
{
    MatX a;
    VecX y;
    detail::Pinv pinv;
    VecX solution;
    VecX residual; // augmented when weight > 0
};

ReducedEval evaluate_reduced(const OrthoAssembly& assembly, const Vec3& r, double s)
{
    ReducedEval e;
    e.a = assembly.matrix(r, s, -1);
    e.y = assembly.rhs(r, s, -1);
    e.pinv = detail::pseudo_inverse(e.a);
    e.solution = e.pinv.solve(e.y);
    e.residual = e.a * e.solution - e.y;
    return e;
}

MatX analytic_reduced_jacobian(const OrthoAssembly& assembly, const Vec3& r, double s,
                               const ReducedEval& e)
{
    MatX jac(assembly.rows(), 4);
    for (int axis = 0; axis < 4; ++axis)
    {
        const MatX da = assembly.matrix(r, s, axis);
        const VecX dy = assembly.rhs(r, s, axis);
        jac.col(axis) = detail::reduced_residual_derivative(e.a, e.pinv.pinv, e.y, da, dy);
    }
    return jac;
}

MatX fd_reduced_jacobian(const OrthoAssembly& assembly, const Vec3& r, double s)
{
    MatX jac(assembly.rows(), 4);
    VecX p(4);
    p << r.x(), r.y(), r.z(), s;
    for (int axis = 0; axis < 4; ++axis)
    {
        const double h = 1e-7 * std::max(1.0, std::abs(p[axis]));
        VecX pf = p;
        VecX pb = p;
        pf[axis] += h;
        pb[axis] -= h;
        const VecX rf =
            evaluate_reduced(assembly, Vec3(pf[0], pf[1], pf[2]), pf[3]).residual;
        const VecX rb =
            evaluate_reduced(assembly, Vec3(pb[0], pb[1], pb[2]), pb[3]).residual;
        jac.col(axis) = (rf - rb) / (2.0 * h);
    }
    return jac;
}

// Clamp alpha to the sigma box and, if anything moved, re-fit the translation
// so the stored residual matches the returned parameters.
void clamp_and_refit(const OrthoAssembly& assembly, const Vec3& r, double s, double bound_sigmas,
                     VecX& alpha, Vec2& t2d)
{
    bool clamped = false;
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
    {
        const double limit = bound_sigmas * assembly.sigma[i];
        if (alpha[i] > limit)
        {
            alpha[i] = limit;
            clamped = true;
        }
        else if (alpha[i] < -limit)
        {
            alpha[i] = -limit;
            clamped = true;
        }
    }
    if (!clamped)
    {
        return;
    }
    // residual rows: s(PR(Q_i a + mean_i) + t) - x_i; optimal t is the mean gap
    const Mat3 rot = rodrigues(r);
    const auto pr = rot.topRows<2>();
    Vec2 gap = Vec2::Zero();
    for (Eigen::Index i = 0; i < assembly.num_landmarks; ++i)
    {
        const Vec3 v = assembly.basis.middleRows(3 * i, 3) * alpha + assembly.mean.segment<3>(3 * i);
        gap += assembly.obs.segment<2>(2 * i) / s - pr * v;
    }
    t2d = gap / static_cast<double>(assembly.num_landmarks);
}

VecX data_residual(const OrthoAssembly& assembly, const Vec3& r, double s, const VecX& alpha,
                   const Vec2& t2d)
{
    const Mat3 rot = rodrigues(r);
    const auto pr = rot.topRows<2>();
    VecX d(2 * assembly.num_landmarks);
    for (Eigen::Index i = 0; i < assembly.num_landmarks; ++i)
    {
        const Vec3 v = assembly.basis.middleRows(3 * i, 3) * alpha + assembly.mean.segment<3>(3 * i);
        d.segment<2>(2 * i) = s * (pr * v + t2d) - assembly.obs.segment<2>(2 * i);
    }
    return d;
}

struct SnlsOutcome
{
    SolveReport report;
    Vec3 r;
    double s = 1.0;
};

SnlsOutcome run_snls(const OrthoAssembly& assembly, const Vec3& r0, double s0,
                     const OrthoFitConfig& config)
{
    LeastSquaresProblem problem;
    problem.start = VecX(4);
    problem.start << r0.x(), r0.y(), r0.z(), s0;
    problem.lower = VecX(4);
    problem.lower << -kInf, -kInf, -kInf, 1e-12;
    problem.upper = VecX::Constant(4, kInf);
    problem.residual = [&assembly](const VecX& p) {
        return evaluate_reduced(assembly, Vec3(p[0], p[1], p[2]), p[3]).residual;
    };
    problem.jacobian = [&assembly](const VecX& p) {
        const Vec3 r(p[0], p[1], p[2]);
        const ReducedEval e = evaluate_reduced(assembly, r, p[3]);
        if (e.pinv.rank < e.a.cols())
        {
            return fd_reduced_jacobian(assembly, r, p[3]);
        }
        return analytic_reduced_jacobian(assembly, r, p[3], e);
    };
    SolveOptions options = config.solver;
    options.max_iterations = config.max_outer_iters;
    SnlsOutcome out;
    out.report = solve(problem, options);
    out.r = Vec3(out.report.solution[0], out.report.solution[1], out.report.solution[2]);
    out.s = out.report.solution[3];
    return out;
}

FitResult finish_fit(const OrthoAssembly& assembly, const SnlsOutcome& snls,
                     const OrthoFitConfig& config)
{
    const ReducedEval e = evaluate_reduced(assembly, snls.r, snls.s);
    VecX alpha = e.solution.head(assembly.num_modes);
    Vec2 t2d(e.solution[assembly.num_modes], e.solution[assembly.num_modes + 1]);
    clamp_and_refit(assembly, snls.r, snls.s, config.coeff_bound_sigmas, alpha, t2d);

    FitResult result;
    result.camera_kind = CameraKind::orthographic;
    result.alpha = alpha;
    result.pose.rotation = snls.r;
    result.pose.scale = snls.s;
    result.pose.t2d = t2d;
    result.residuals = data_residual(assembly, snls.r, snls.s, alpha, t2d);
    result.objective = result.residuals.squaredNorm();
    result.report = snls.report;
    result.rank_deficient = e.pinv.truncated || e.pinv.rank < e.a.cols();
    return result;
}

} // namespace

MatX assemble_A(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r, double s)
{
    return OrthoAssembly::make(model, landmarks, 0.0).matrix(r, s, -1);
}

VecX assemble_y(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r, double s)
{
    return OrthoAssembly::make(model, landmarks, 0.0).rhs(r, s, -1);
}

OrthoLinearSolution solve_linear(const MatX& a, const VecX& y, const VecX& sigma,
                                 double tikhonov_weight)
{
    if (a.rows() != y.size())
    {
        throw std::invalid_argument("solve_linear: matrix and rhs row counts differ");
    }
    const Eigen::Index s = sigma.size();
    if (a.cols() != s + 2)
    {
        throw std::invalid_argument("solve_linear: expected S+2 columns");
    }
    MatX work = a;
    VecX rhs = y;
    if (tikhonov_weight > 0.0)
    {
        work.conservativeResize(a.rows() + s, Eigen::NoChange);
        work.bottomRows(s).setZero();
        const double w = std::sqrt(tikhonov_weight);
        for (Eigen::Index k = 0; k < s; ++k)
        {
            work(a.rows() + k, k) = w / sigma[k];
        }
        rhs.conservativeResize(a.rows() + s);
        rhs.tail(s).setZero();
    }
    const detail::Pinv pinv = detail::pseudo_inverse(work);
    const VecX p = pinv.solve(rhs);
    OrthoLinearSolution out;
    out.alpha = p.head(s);
    out.t2d = Vec2(p[s], p[s + 1]);
    out.rank_deficient = pinv.truncated || pinv.rank < work.cols();
    return out;
}

VecX reduced_residual(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r,
                      double s, const OrthoFitConfig& config)
{
    const auto assembly = OrthoAssembly::make(model, landmarks, config.tikhonov_weight);
    return evaluate_reduced(assembly, r, s).residual.head(2 * assembly.num_landmarks);
}

OrthoJacobian jacobian_ortho(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r,
                             double s)
{
    const auto assembly = OrthoAssembly::make(model, landmarks, 0.0);
    const ReducedEval e = evaluate_reduced(assembly, r, s);
    OrthoJacobian out;
    if (e.pinv.rank < e.a.cols())
    {
        out.matrix = fd_reduced_jacobian(assembly, r, s);
        out.used_finite_differences = true;
    }
    else
    {
        out.matrix = analytic_reduced_jacobian(assembly, r, s, e);
    }
    return out;
}

double initial_scale(const ShapeModel& model, const Landmarks2D& landmarks, const Vec3& r)
{
    const auto sub = landmark_submatrix(model, landmarks.vertex_indices());
    const Mat3 rot = rodrigues(r);
    const auto pr = rot.topRows<2>();
    Vec2 obs_lo = Vec2::Constant(kInf);
    Vec2 obs_hi = Vec2::Constant(-kInf);
    Vec2 mdl_lo = Vec2::Constant(kInf);
    Vec2 mdl_hi = Vec2::Constant(-kInf);
    for (std::size_t i = 0; i < landmarks.count(); ++i)
    {
        obs_lo = obs_lo.cwiseMin(landmarks.entries[i].position);
        obs_hi = obs_hi.cwiseMax(landmarks.entries[i].position);
        const Vec2 proj = pr * sub.mean.segment<3>(3 * static_cast<Eigen::Index>(i));
        mdl_lo = mdl_lo.cwiseMin(proj);
        mdl_hi = mdl_hi.cwiseMax(proj);
    }
    const double obs_diag = (obs_hi - obs_lo).norm();
    const double mdl_diag = (mdl_hi - mdl_lo).norm();
    if (obs_diag <= 0.0 || mdl_diag <= 0.0)
    {
        return 1.0;
    }
    return obs_diag / mdl_diag;
}

FitResult fit_landmarks_ortho(const ShapeModel& model, const Landmarks2D& landmarks,
                              const OrthoFitConfig& config)
{
    if (landmarks.count() < 2)
    {
        throw std::invalid_argument("fit_landmarks_ortho: under-determined, need >= 2 landmarks");
    }
    const auto assembly = OrthoAssembly::make(model, landmarks, config.tikhonov_weight);

    const Vec3 r0 = config.init_rotation.value_or(Vec3::Zero());
    SnlsOutcome best = run_snls(assembly, r0, initial_scale(model, landmarks, r0), config);
    FitResult result = finish_fit(assembly, best, config);

    const double interocular = interocular_distance(model, landmarks);
    if (landmark_error_percent(result.residuals, interocular) > config.restart_threshold_percent &&
        !config.init_rotation)
    {
        const double quarter = 3.14159265358979323846 / 4.0;
        const Vec3 retries[3] = {Vec3(0, quarter, 0), Vec3(0, -quarter, 0), Vec3(quarter, 0, 0)};
        int used = 0;
        for (const auto& r_retry : retries)
        {
            ++used;
            SnlsOutcome attempt =
                run_snls(assembly, r_retry, initial_scale(model, landmarks, r_retry), config);
            FitResult candidate = finish_fit(assembly, attempt, config);
            if (candidate.objective < result.objective)
            {
                result = candidate;
            }
        }
        result.restarts_used = used;
    }
    return result;
}

namespace {

// Closest scaled-orthographic pose to a 2D/3D point correspondence set.
void sop_procrustes(const MatX& points3, const MatX& points2, Vec3& r_out, double& s_out)
{
    const Vec3 c3 = points3.rowwise().mean();
    const Vec2 c2 = points2.rowwise().mean();
    const MatX v = points3.colwise() - c3; // 3 x L
    const MatX x = points2.colwise() - c2; // 2 x L
    // unconstrained 2x3 map, then nearest scaled partial rotation
    const detail::Pinv pinv = detail::pseudo_inverse(v.transpose());
    const MatX m = (pinv.pinv * x.transpose()).transpose(); // 2 x 3
    Eigen::JacobiSVD<MatX> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double s = 0.5 * (svd.singularValues()[0] + svd.singularValues()[1]);
    if (!(s > 1e-12))
    {
        return; // degenerate; keep previous pose
    }
    const MatX top = svd.matrixU() * svd.matrixV().transpose(); // 2 x 3 orthonormal rows
    const Vec3 row0 = top.row(0).transpose();
    const Vec3 row1 = top.row(1).transpose();
    Mat3 rot;
    rot.row(0) = row0;
    rot.row(1) = row1;
    rot.row(2) = row0.cross(row1);
    r_out = axis_angle(rot);
    s_out = s;
}

} // namespace

FitResult fit_landmarks_ortho_als(const ShapeModel& model, const Landmarks2D& landmarks,
                                  const OrthoFitConfig& config)
{
    if (landmarks.count() < 2)
    {
        throw std::invalid_argument("fit_landmarks_ortho_als: under-determined, need >= 2 landmarks");
    }
    const auto assembly = OrthoAssembly::make(model, landmarks, config.tikhonov_weight);
    const Eigen::Index num_landmarks = assembly.num_landmarks;

    struct State
    {
        Vec3 r;
        double s;
        VecX alpha;
        Vec2 t2d;
        double objective; // includes the Tikhonov term, like the SNLS reduction
    };
    auto linear_step = [&](const Vec3& r, double s) {
        const ReducedEval e = evaluate_reduced(assembly, r, s);
        State st;
        st.r = r;
        st.s = s;
        st.alpha = e.solution.head(assembly.num_modes);
        st.t2d = Vec2(e.solution[assembly.num_modes], e.solution[assembly.num_modes + 1]);
        st.objective = e.residual.squaredNorm();
        return st;
    };

    const Vec3 r0 = config.init_rotation.value_or(Vec3::Zero());
    State state = linear_step(r0, initial_scale(model, landmarks, r0));

    SolveReport report;
    report.objective_trace.push_back(state.objective);
    report.reason = StopReason::max_iterations;

    int rounds = 0;
    while (rounds < config.max_outer_iters)
    {
        ++rounds;
        MatX points3(3, num_landmarks);
        MatX points2(2, num_landmarks);
        for (Eigen::Index i = 0; i < num_landmarks; ++i)
        {
            points3.col(i) =
                assembly.basis.middleRows(3 * i, 3) * state.alpha + assembly.mean.segment<3>(3 * i);
            points2.col(i) = assembly.obs.segment<2>(2 * i);
        }
        Vec3 r_new = state.r;
        double s_new = state.s;
        sop_procrustes(points3, points2, r_new, s_new);
        const State candidate = linear_step(r_new, s_new);
        if (candidate.objective > state.objective)
        {
            report.reason = StopReason::objective_change;
            break;
        }
        const double decrease = state.objective - candidate.objective;
        state = candidate;
        report.objective_trace.push_back(state.objective);
        if (decrease < 1e-10 * std::max(state.objective, 1e-300))
        {
            report.reason = StopReason::objective_change;
            break;
        }
    }
    report.iterations = rounds;
    report.solution = VecX(4);
    report.solution << state.r.x(), state.r.y(), state.r.z(), state.s;
    report.objective = state.objective;

    VecX alpha = state.alpha;
    Vec2 t2d = state.t2d;
    clamp_and_refit(assembly, state.r, state.s, config.coeff_bound_sigmas, alpha, t2d);

    FitResult result;
    result.camera_kind = CameraKind::orthographic;
    result.alpha = alpha;
    result.pose.rotation = state.r;
    result.pose.scale = state.s;
    result.pose.t2d = t2d;
    result.residuals = data_residual(assembly, state.r, state.s, alpha, t2d);
    result.objective = result.residuals.squaredNorm();
    result.report = report;
    return result;
}

} /* namespace geofit */
