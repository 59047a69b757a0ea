/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: src/nls.cpp
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
#include "geofit/nls.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace geofit {

std::string to_string(StopReason reason)
{
    switch (reason)
    {
    case StopReason::gradient:
        return "gradient";
    case StopReason::step:
        return "step";
    case StopReason::objective_change:
        return "objective_change";
    case StopReason::max_iterations:
        return "max_iterations";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool all_finite(const VecX& v)
{
    return v.allFinite();
}

std::string snapshot(const VecX& p)
{
    std::ostringstream ss;
    ss << "[";
    for (Eigen::Index i = 0; i < p.size(); ++i)
    {
        ss << (i ? ", " : "") << p[i];
    }
    ss << "]";
    return ss.str();
}

struct Bounds
{
    VecX lo;
    VecX hi;

    static Bounds resolve(const LeastSquaresProblem& problem)
    {
        const Eigen::Index n = problem.start.size();
        Bounds b;
        b.lo = problem.lower.size() ? problem.lower : VecX::Constant(n, -kInf);
        b.hi = problem.upper.size() ? problem.upper : VecX::Constant(n, kInf);
        if (b.lo.size() != n || b.hi.size() != n)
        {
            throw std::invalid_argument("solve: bound vectors must match the parameter count");
        }
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (b.lo[i] > b.hi[i])
            {
                throw std::invalid_argument("solve: lower bound exceeds upper bound");
            }
            if (problem.start[i] < b.lo[i] || problem.start[i] > b.hi[i])
            {
                throw std::invalid_argument("solve: start point violates bounds");
            }
        }
        return b;
    }

    VecX clamp(const VecX& p) const
    {
        return p.cwiseMax(lo).cwiseMin(hi);
    }
};

MatX finite_difference_jacobian(const std::function<VecX(const VecX&)>& residual, const VecX& p,
                                const Bounds& bounds, double rel_step)
{
    const Eigen::Index m = residual(p).size();
    MatX jac(m, p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j)
    {
        if (bounds.lo[j] == bounds.hi[j])
        {
            jac.col(j).setZero();
            continue;
        }
        const double h = rel_step * std::max(1.0, std::abs(p[j]));
        double forward = std::min(p[j] + h, bounds.hi[j]);
        double backward = std::max(p[j] - h, bounds.lo[j]);
        if (forward == backward)
        {
            jac.col(j).setZero();
            continue;
        }
        VecX pf = p;
        VecX pb = p;
        pf[j] = forward;
        pb[j] = backward;
        jac.col(j) = (residual(pf) - residual(pb)) / (forward - backward);
    }
    return jac;
}

// Dogleg step for min |J h + d|^2 subject to |h| <= radius, over the free
// columns of J.
VecX dogleg_step(const MatX& jac, const VecX& d, double radius)
{
    const VecX grad = jac.transpose() * d; // half the objective gradient
    const double grad_norm = grad.norm();
    if (grad_norm == 0.0)
    {
        return VecX::Zero(jac.cols());
    }

    Eigen::JacobiSVD<MatX> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    const VecX gn = svd.solve(-d);

    if (gn.allFinite() && gn.norm() <= radius)
    {
        return gn;
    }

    // Cauchy point: minimizer along -grad
    const VecX jg = jac * grad;
    const double jg2 = jg.squaredNorm();
    VecX cauchy;
    if (jg2 > 0.0)
    {
        cauchy = -(grad.squaredNorm() / jg2) * grad;
    }
    else
    {
        cauchy = -(radius / grad_norm) * grad;
    }
    if (cauchy.norm() >= radius || !gn.allFinite())
    {
        return (radius / cauchy.norm()) * cauchy;
    }

    // Interpolate between the Cauchy point and the Gauss-Newton step so that
    // the result lies on the trust-region boundary.
    const VecX diff = gn - cauchy;
    const double a = diff.squaredNorm();
    const double b = 2.0 * cauchy.dot(diff);
    const double c = cauchy.squaredNorm() - radius * radius;
    double tau = 1.0;
    const double disc = b * b - 4.0 * a * c;
    if (a > 0.0 && disc >= 0.0)
    {
        tau = (-b + std::sqrt(disc)) / (2.0 * a);
        tau = std::clamp(tau, 0.0, 1.0);
    }
    return cauchy + tau * diff;
}

} // namespace

SolveReport solve(const LeastSquaresProblem& problem, const SolveOptions& options)
{
    if (!problem.residual)
    {
        throw std::invalid_argument("solve: residual evaluator required");
    }
    if (problem.start.size() == 0)
    {
        throw std::invalid_argument("solve: empty start point");
    }
    const Bounds bounds = Bounds::resolve(problem);
    const Eigen::Index n = problem.start.size();

    auto eval_jacobian = [&](const VecX& p) -> MatX {
        if (problem.jacobian)
        {
            return problem.jacobian(p);
        }
        return finite_difference_jacobian(problem.residual, p, bounds, options.fd_relative_step);
    };

    VecX p = problem.start;
    VecX d = problem.residual(p);
    if (!all_finite(d))
    {
        throw numeric_error("solve: non-finite residual at start point " + snapshot(p));
    }
    double objective = d.squaredNorm();

    SolveReport report;
    report.objective_trace.push_back(objective);

    MatX jac = eval_jacobian(p);
    if (!jac.allFinite())
    {
        throw numeric_error("solve: non-finite Jacobian at start point " + snapshot(p));
    }

    // Projected gradient of d'd: zero out components that push against an
    // active bound (clamped iterates sit exactly on the bound value).
    auto projected_gradient = [&](const VecX& point, const MatX& jmat, const VecX& res) {
        VecX g = 2.0 * jmat.transpose() * res;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const bool at_lo = point[i] <= bounds.lo[i];
            const bool at_hi = point[i] >= bounds.hi[i];
            if ((at_lo && g[i] > 0.0) || (at_hi && g[i] < 0.0) || bounds.lo[i] == bounds.hi[i])
            {
                g[i] = 0.0;
            }
        }
        return g;
    };

    double radius = options.initial_radius;
    int iter = 0;
    while (true)
    {
        const VecX pgrad = projected_gradient(p, jac, d);
        if (pgrad.lpNorm<Eigen::Infinity>() < options.gradient_tol)
        {
            report.reason = StopReason::gradient;
            break;
        }
        if (iter >= options.max_iterations)
        {
            report.reason = StopReason::max_iterations;
            break;
        }
        ++iter;

        // Free set: parameters neither frozen nor blocked at a bound.
        std::vector<Eigen::Index> free_idx;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (bounds.lo[i] != bounds.hi[i] && pgrad[i] != 0.0)
            {
                free_idx.push_back(i);
            }
            else if (bounds.lo[i] != bounds.hi[i] && !(p[i] <= bounds.lo[i]) &&
                     !(p[i] >= bounds.hi[i]))
            {
                free_idx.push_back(i);
            }
        }
        if (free_idx.empty())
        {
            report.reason = StopReason::gradient;
            break;
        }
        MatX jfree(jac.rows(), static_cast<Eigen::Index>(free_idx.size()));
        for (std::size_t k = 0; k < free_idx.size(); ++k)
        {
            jfree.col(static_cast<Eigen::Index>(k)) = jac.col(free_idx[k]);
        }

        const VecX h_free = dogleg_step(jfree, d, radius);
        VecX h = VecX::Zero(n);
        for (std::size_t k = 0; k < free_idx.size(); ++k)
        {
            h[free_idx[k]] = h_free[static_cast<Eigen::Index>(k)];
        }
        const VecX candidate = bounds.clamp(p + h);
        const VecX step = candidate - p;
        const double step_norm = step.norm();
        if (step_norm == 0.0)
        {
            radius *= 0.25;
            if (radius < 1e-300)
            {
                report.reason = StopReason::step;
                break;
            }
            continue;
        }

        const double predicted = objective - (d + jac * step).squaredNorm();
        VecX d_new = problem.residual(candidate);
        const bool finite = all_finite(d_new);
        const double objective_new = finite ? d_new.squaredNorm() : kInf;
        const double ratio =
            (predicted > 0.0 && finite) ? (objective - objective_new) / predicted : -1.0;

        if (!finite || objective_new >= objective)
        {
            radius *= 0.25;
            if (radius < 1e-300)
            {
                report.reason = StopReason::step;
                break;
            }
            continue;
        }

        // accepted
        p = candidate;
        d = d_new;
        const double decrease = objective - objective_new;
        objective = objective_new;
        report.objective_trace.push_back(objective);
        if (options.iterate_hook)
        {
            options.iterate_hook(p, objective);
        }

        if (ratio > 0.75)
        {
            radius *= 2.0;
        }
        else if (ratio < 0.25)
        {
            radius *= 0.25;
        }

        jac = eval_jacobian(p);
        if (!jac.allFinite())
        {
            throw numeric_error("solve: non-finite Jacobian at accepted iterate " + snapshot(p));
        }

        if (step_norm < options.step_tol)
        {
            report.reason = StopReason::step;
            break;
        }
        if (decrease < options.objective_tol * std::max(objective, 1e-300))
        {
            report.reason = StopReason::objective_change;
            break;
        }
    }

    report.solution = p;
    report.objective = objective;
    report.iterations = iter;
    return report;
}

double check_jacobian(const LeastSquaresProblem& problem, const VecX& p, double step)
{
    if (!problem.jacobian)
    {
        throw std::invalid_argument("check_jacobian: analytic Jacobian required");
    }
    const MatX analytic = problem.jacobian(p);
    MatX numeric(analytic.rows(), analytic.cols());
    for (Eigen::Index j = 0; j < p.size(); ++j)
    {
        VecX pf = p;
        VecX pb = p;
        pf[j] += step;
        pb[j] -= step;
        numeric.col(j) = (problem.residual(pf) - problem.residual(pb)) / (2.0 * step);
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.rows(); ++i)
    {
        for (Eigen::Index j = 0; j < analytic.cols(); ++j)
        {
            const double denom = std::max(1.0, std::abs(numeric(i, j)));
            worst = std::max(worst, std::abs(analytic(i, j) - numeric(i, j)) / denom);
        }
    }
    return worst;
}

} /* namespace geofit */
