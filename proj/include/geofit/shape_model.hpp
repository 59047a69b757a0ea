/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/shape_model.hpp
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

#ifndef GEOFIT_SHAPE_MODEL_HPP
#define GEOFIT_SHAPE_MODEL_HPP

#include "geofit/core.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace geofit {

/**
 * Triangle-mesh connectivity. Indices refer to vertices of the shape model
 * the topology belongs to; winding is consistent across the mesh.
 */
struct MeshTopology
{
    std::vector<std::array<std::uint32_t, 3>> triangles;
};

/// An undirected mesh edge with its adjacent triangles. tri[1] is -1 for
/// edges on the mesh boundary (edges used by exactly one triangle).
struct MeshEdge
{
    std::uint32_t v0 = 0;
    std::uint32_t v1 = 0;
    std::int32_t tri[2] = {-1, -1};

    bool is_boundary() const { return tri[1] < 0; }
};

/// Build the edge list with triangle adjacency. Throws std::invalid_argument
/// for degenerate triangles, out-of-range indices or non-manifold edges
/// (more than two triangles sharing an edge).
std::vector<MeshEdge> edge_adjacency(const MeshTopology& topology, std::size_t num_vertices);

/**
 * Linear statistical shape model: a mean shape plus a matrix of principal
 * directions, with per-mode standard deviations kept separately. Vertex
 * coordinates are interleaved [u1, v1, w1, ..., uN, vN, wN] in metres.
 *
 * All fields are immutable values after construction; models can be shared
 * freely across threads.
 */
struct ShapeModel
{
    VecX mean;  ///< length 3N
    MatX basis; ///< 3N x S principal directions (unscaled)
    VecX sigma; ///< length S, per-mode standard deviation, > 0
    MeshTopology topology;
    std::vector<std::uint32_t> landmark_indices; ///< canonical landmark set, may be empty

    std::size_t num_vertices() const { return static_cast<std::size_t>(mean.size()) / 3; }
    std::size_t num_modes() const { return static_cast<std::size_t>(basis.cols()); }

    /// Check all structural invariants; throws std::invalid_argument on the
    /// first violation.
    void validate() const;
};

/**
 * Evaluate the model at the given coefficients: mean + basis * alpha.
 * Vertex i occupies entries [3i, 3i+2] of the result.
 */
VecX synthesize(const ShapeModel& model, const VecX& alpha);

/// Position of a single vertex of the synthesized shape.
Vec3 vertex_position(const VecX& vertices, std::size_t index);

/**
 * Gather the basis rows and mean entries of the selected vertices, preserving
 * order: row triple j of the result corresponds to vertex indices[j].
 */
struct LandmarkSubmatrix
{
    MatX basis; ///< 3L x S
    VecX mean;  ///< 3L
};

LandmarkSubmatrix landmark_submatrix(const ShapeModel& model,
                                     const std::vector<std::uint32_t>& indices);

/**
 * Read / write the binary SMM1 model format:
 *   magic "SMM1"; u32 N, S, P; f64 mean[3N], basis[3N*S] column-major,
 *   sigma[S]; u32 T, u32 triangles[3T]; u32 landmark_indices[P].
 * All integers and doubles little-endian. load_model throws format_error with
 * the byte offset of the first inconsistency.
 */
ShapeModel load_model(const std::string& path);
void save_model(const ShapeModel& model, const std::string& path);

/// Write vertices + topology as ASCII OBJ (v/f records only).
void save_obj(const std::string& path, const VecX& vertices, const MeshTopology& topology);

/**
 * Deterministic synthetic stand-in for a scanned face model: an ellipsoidal
 * open patch of diameter ~ scale metres with a zipper-triangulated grid,
 * orthonormal smooth deformation fields as basis columns and geometrically
 * decaying sigma. The first two canonical landmarks are the designated eye
 * vertices used for interocular normalization.
 *
 * Requires num_vertices >= 4 and 1 <= num_modes <= 3 * num_vertices.
 */
ShapeModel make_synthetic_model(std::uint64_t seed, std::size_t num_vertices,
                                std::size_t num_modes, double scale);

} /* namespace geofit */

#endif /* GEOFIT_SHAPE_MODEL_HPP */
