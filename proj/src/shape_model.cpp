/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: src/shape_model.cpp
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
#include "geofit/shape_model.hpp"

#include "geofit/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <utility>

namespace geofit {

void ShapeModel::validate() const
{
    const auto n = num_vertices();
    const auto s = num_modes();
    if (mean.size() == 0 || mean.size() % 3 != 0)
    {
        throw std::invalid_argument("ShapeModel: mean length must be a positive multiple of 3");
    }
    if (basis.rows() != mean.size())
    {
        throw std::invalid_argument("ShapeModel: basis must have 3N rows");
    }
    if (s == 0)
    {
        throw std::invalid_argument("ShapeModel: at least one mode required");
    }
    if (sigma.size() != static_cast<Eigen::Index>(s))
    {
        throw std::invalid_argument("ShapeModel: sigma length must equal the number of modes");
    }
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
    {
        if (!(sigma[i] > 0.0))
        {
            throw std::invalid_argument("ShapeModel: sigma entries must be positive");
        }
    }
    std::set<std::uint32_t> seen;
    for (const auto idx : landmark_indices)
    {
        if (idx >= n)
        {
            throw std::invalid_argument("ShapeModel: landmark index out of range");
        }
        if (!seen.insert(idx).second)
        {
            throw std::invalid_argument("ShapeModel: duplicate landmark index");
        }
    }
    edge_adjacency(topology, n); // validates triangle indices
}

std::vector<MeshEdge> edge_adjacency(const MeshTopology& topology, std::size_t num_vertices)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> edge_of;
    std::vector<MeshEdge> edges;
    for (std::size_t t = 0; t < topology.triangles.size(); ++t)
    {
        const auto& tri = topology.triangles[t];
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
        {
            throw std::invalid_argument("MeshTopology: degenerate triangle " + std::to_string(t));
        }
        for (int k = 0; k < 3; ++k)
        {
            const std::uint32_t a = tri[k];
            const std::uint32_t b = tri[(k + 1) % 3];
            if (a >= num_vertices || b >= num_vertices)
            {
                throw std::invalid_argument("MeshTopology: vertex index out of range in triangle " +
                                            std::to_string(t));
            }
            const auto key = std::minmax(a, b);
            auto it = edge_of.find(key);
            if (it == edge_of.end())
            {
                MeshEdge e;
                e.v0 = key.first;
                e.v1 = key.second;
                e.tri[0] = static_cast<std::int32_t>(t);
                edge_of.emplace(key, edges.size());
                edges.push_back(e);
            }
            else
            {
                MeshEdge& e = edges[it->second];
                if (e.tri[1] >= 0)
                {
                    throw std::invalid_argument("MeshTopology: non-manifold edge");
                }
                e.tri[1] = static_cast<std::int32_t>(t);
            }
        }
    }
    return edges;
}

VecX synthesize(const ShapeModel& model, const VecX& alpha)
{
    if (alpha.size() != static_cast<Eigen::Index>(model.num_modes()))
    {
        throw std::invalid_argument("synthesize: alpha length " + std::to_string(alpha.size()) +
                                    " does not match the number of modes " +
                                    std::to_string(model.num_modes()));
    }
    return model.mean + model.basis * alpha;
}

Vec3 vertex_position(const VecX& vertices, std::size_t index)
{
    return vertices.segment<3>(3 * static_cast<Eigen::Index>(index));
}

LandmarkSubmatrix landmark_submatrix(const ShapeModel& model,
                                     const std::vector<std::uint32_t>& indices)
{
    if (indices.empty())
    {
        throw std::invalid_argument("landmark_submatrix: empty index list");
    }
    LandmarkSubmatrix out;
    out.basis.resize(3 * indices.size(), model.num_modes());
    out.mean.resize(3 * indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j)
    {
        if (indices[j] >= model.num_vertices())
        {
            throw std::invalid_argument("landmark_submatrix: vertex index " +
                                        std::to_string(indices[j]) + " out of range");
        }
        const Eigen::Index row = 3 * static_cast<Eigen::Index>(indices[j]);
        out.basis.middleRows(3 * static_cast<Eigen::Index>(j), 3) = model.basis.middleRows(row, 3);
        out.mean.segment<3>(3 * static_cast<Eigen::Index>(j)) = model.mean.segment<3>(row);
    }
    return out;
}

namespace {

// Cursor over an in-memory file image; every read reports its byte offset
// when the payload runs out.
class ByteReader
{
public:
    ByteReader(std::vector<char> data) : data_(std::move(data)) {}

    std::uint64_t offset() const { return offset_; }
    bool exhausted() const { return offset_ == data_.size(); }

    void raw(void* dst, std::size_t n, const char* what)
    {
        if (offset_ + n > data_.size())
        {
            throw format_error(std::string("SMM1: truncated while reading ") + what, offset_);
        }
        std::memcpy(dst, data_.data() + offset_, n);
        offset_ += n;
    }

    std::uint32_t u32(const char* what)
    {
        std::uint32_t v = 0;
        raw(&v, sizeof v, what);
        return v;
    }

    double f64(const char* what)
    {
        double v = 0;
        raw(&v, sizeof v, what);
        return v;
    }

private:
    std::vector<char> data_;
    std::uint64_t offset_ = 0;
};

std::vector<char> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw format_error("SMM1: cannot open '" + path + "'", 0);
    }
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

} // namespace

ShapeModel load_model(const std::string& path)
{
    ByteReader r(read_file(path));

    char magic[4];
    r.raw(magic, 4, "magic");
    if (std::memcmp(magic, "SMM1", 4) != 0)
    {
        throw format_error("SMM1: bad magic", 0);
    }
    const std::uint32_t n = r.u32("vertex count");
    const std::uint32_t s = r.u32("mode count");
    const std::uint32_t p = r.u32("landmark count");
    if (n == 0)
    {
        throw format_error("SMM1: vertex count must be positive", 4);
    }
    if (s == 0)
    {
        throw format_error("SMM1: mode count must be positive", 8);
    }

    ShapeModel model;
    model.mean.resize(3 * static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < model.mean.size(); ++i)
    {
        model.mean[i] = r.f64("mean");
    }
    model.basis.resize(3 * static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s));
    for (Eigen::Index c = 0; c < model.basis.cols(); ++c)
    {
        for (Eigen::Index row = 0; row < model.basis.rows(); ++row)
        {
            model.basis(row, c) = r.f64("basis");
        }
    }
    model.sigma.resize(static_cast<Eigen::Index>(s));
    for (Eigen::Index i = 0; i < model.sigma.size(); ++i)
    {
        const std::uint64_t at = r.offset();
        model.sigma[i] = r.f64("sigma");
        if (!(model.sigma[i] > 0.0))
        {
            throw format_error("SMM1: sigma entry must be positive", at);
        }
    }
    const std::uint32_t t = r.u32("triangle count");
    model.topology.triangles.resize(t);
    for (std::uint32_t i = 0; i < t; ++i)
    {
        const std::uint64_t at = r.offset();
        for (int k = 0; k < 3; ++k)
        {
            model.topology.triangles[i][k] = r.u32("triangle index");
        }
        const auto& tri = model.topology.triangles[i];
        if (tri[0] >= n || tri[1] >= n || tri[2] >= n)
        {
            throw format_error("SMM1: triangle index out of range", at);
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
        {
            throw format_error("SMM1: degenerate triangle", at);
        }
    }
    model.landmark_indices.resize(p);
    std::set<std::uint32_t> seen;
    for (std::uint32_t i = 0; i < p; ++i)
    {
        const std::uint64_t at = r.offset();
        model.landmark_indices[i] = r.u32("landmark index");
        if (model.landmark_indices[i] >= n)
        {
            throw format_error("SMM1: landmark index out of range", at);
        }
        if (!seen.insert(model.landmark_indices[i]).second)
        {
            throw format_error("SMM1: duplicate landmark index", at);
        }
    }
    if (!r.exhausted())
    {
        throw format_error("SMM1: trailing data", r.offset());
    }
    model.validate();
    return model;
}

void save_model(const ShapeModel& model, const std::string& path)
{
    model.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw format_error("SMM1: cannot open '" + path + "' for writing", 0);
    }
    auto put_u32 = [&out](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_f64 = [&out](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };

    out.write("SMM1", 4);
    put_u32(static_cast<std::uint32_t>(model.num_vertices()));
    put_u32(static_cast<std::uint32_t>(model.num_modes()));
    put_u32(static_cast<std::uint32_t>(model.landmark_indices.size()));
    for (Eigen::Index i = 0; i < model.mean.size(); ++i)
    {
        put_f64(model.mean[i]);
    }
    for (Eigen::Index c = 0; c < model.basis.cols(); ++c)
    {
        for (Eigen::Index row = 0; row < model.basis.rows(); ++row)
        {
            put_f64(model.basis(row, c));
        }
    }
    for (Eigen::Index i = 0; i < model.sigma.size(); ++i)
    {
        put_f64(model.sigma[i]);
    }
    put_u32(static_cast<std::uint32_t>(model.topology.triangles.size()));
    for (const auto& tri : model.topology.triangles)
    {
        put_u32(tri[0]);
        put_u32(tri[1]);
        put_u32(tri[2]);
    }
    for (const auto idx : model.landmark_indices)
    {
        put_u32(idx);
    }
    if (!out)
    {
        throw format_error("SMM1: write failed for '" + path + "'", 0);
    }
}

void save_obj(const std::string& path, const VecX& vertices, const MeshTopology& topology)
{
    if (vertices.size() % 3 != 0)
    {
        throw std::invalid_argument("save_obj: vertex vector length must be a multiple of 3");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out)
    {
        throw format_error("OBJ: cannot open '" + path + "' for writing", 0);
    }
    char line[128];
    for (Eigen::Index i = 0; i < vertices.size(); i += 3)
    {
        std::snprintf(line, sizeof line, "v %.17g %.17g %.17g\n", vertices[i], vertices[i + 1],
                      vertices[i + 2]);
        out << line;
    }
    for (const auto& tri : topology.triangles)
    {
        out << "f " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << '\n';
    }
}

namespace {

// Triangulate between two grid rows of possibly different length by zipping
// along the normalized column parameter.
void zip_rows(const std::vector<std::uint32_t>& lower, const std::vector<std::uint32_t>& upper,
              std::vector<std::array<std::uint32_t, 3>>& out)
{
    auto param = [](const std::vector<std::uint32_t>& row, std::size_t j) {
        return row.size() == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(row.size() - 1);
    };
    std::size_t ia = 0;
    std::size_t ib = 0;
    while (ia + 1 < lower.size() || ib + 1 < upper.size())
    {
        bool advance_lower;
        if (ia + 1 == lower.size())
        {
            advance_lower = false;
        }
        else if (ib + 1 == upper.size())
        {
            advance_lower = true;
        }
        else
        {
            advance_lower = param(lower, ia + 1) <= param(upper, ib + 1);
        }
        if (advance_lower)
        {
            out.push_back({lower[ia], lower[ia + 1], upper[ib]});
            ++ia;
        }
        else
        {
            out.push_back({lower[ia], upper[ib + 1], upper[ib]});
            ++ib;
        }
    }
}

} // namespace

ShapeModel make_synthetic_model(std::uint64_t seed, std::size_t num_vertices,
                                std::size_t num_modes, double scale)
{
    if (num_vertices < 4)
    {
        throw std::invalid_argument("make_synthetic_model: need at least 4 vertices");
    }
    if (num_modes < 1 || num_modes > 3 * num_vertices)
    {
        throw std::invalid_argument("make_synthetic_model: mode count must be in [1, 3N]");
    }
    if (!(scale > 0.0))
    {
        throw std::invalid_argument("make_synthetic_model: scale must be positive");
    }

    // Grid layout: rows of nearly equal length covering exactly num_vertices.
    std::size_t rows = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(
                                                    std::sqrt(static_cast<double>(num_vertices)))));
    rows = std::min(rows, num_vertices / 2);
    const std::size_t base = num_vertices / rows;
    const std::size_t remainder = num_vertices % rows;

    const double lat_max = 1.05;  // radians swept vertically
    const double lon_max = 1.35;  // radians swept horizontally
    const double half_width = 0.45 * scale;
    const double half_height = 0.56 * scale;
    const double depth = 0.35 * scale;

    ShapeModel model;
    model.mean.resize(3 * static_cast<Eigen::Index>(num_vertices));

    std::vector<std::vector<std::uint32_t>> grid(rows);
    std::vector<double> lat_of(num_vertices);
    std::vector<double> lon_of(num_vertices);
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < rows; ++i)
    {
        const std::size_t cols = base + (i < remainder ? 1 : 0);
        grid[i].resize(cols);
        const double lat = -lat_max + 2.0 * lat_max * static_cast<double>(i) /
                                          static_cast<double>(rows - 1);
        for (std::size_t j = 0; j < cols; ++j)
        {
            const double lon =
                cols == 1 ? 0.0
                          : -lon_max + 2.0 * lon_max * static_cast<double>(j) /
                                           static_cast<double>(cols - 1);
            const Eigen::Index at = 3 * static_cast<Eigen::Index>(next);
            model.mean[at + 0] = half_width * std::cos(lat) * std::sin(lon);
            model.mean[at + 1] = half_height * std::sin(lat);
            model.mean[at + 2] = -depth * std::cos(lat) * std::cos(lon);
            lat_of[next] = lat;
            lon_of[next] = lon;
            grid[i][j] = next++;
        }
    }

    for (std::size_t i = 0; i + 1 < rows; ++i)
    {
        zip_rows(grid[i], grid[i + 1], model.topology.triangles);
    }

    // Deformation fields: global scaling/stretching first, then seeded smooth
    // bumps; orthonormalized so basis columns have unit norm and vanishing
    // cross products.
    Rng rng(seed);
    const Eigen::Index dim = model.mean.size();
    MatX raw(dim, static_cast<Eigen::Index>(num_modes));
    Vec3 centroid = Vec3::Zero();
    for (std::size_t v = 0; v < num_vertices; ++v)
    {
        centroid += vertex_position(model.mean, v);
    }
    centroid /= static_cast<double>(num_vertices);

    for (std::size_t k = 0; k < num_modes; ++k)
    {
        const double freq_lat = rng.uniform(0.4, 2.2);
        const double freq_lon = rng.uniform(0.4, 2.2);
        const double phase_lat = rng.uniform(0.0, 6.2831853);
        const double phase_lon = rng.uniform(0.0, 6.2831853);
        Vec3 dir(rng.gaussian(), rng.gaussian(), rng.gaussian());
        if (dir.norm() < 1e-12)
        {
            dir = Vec3::UnitZ();
        }
        dir.normalize();
        for (std::size_t v = 0; v < num_vertices; ++v)
        {
            const Vec3 pos = vertex_position(model.mean, v) - centroid;
            Vec3 field;
            switch (k)
            {
            case 0:
                field = pos; // uniform scaling
                break;
            case 1:
                field = Vec3(pos.x(), 0.0, 0.0);
                break;
            case 2:
                field = Vec3(0.0, pos.y(), 0.0);
                break;
            case 3:
                field = Vec3(0.0, 0.0, pos.z());
                break;
            default:
                field = dir * (std::sin(freq_lat * lat_of[v] + phase_lat) *
                               std::sin(freq_lon * lon_of[v] + phase_lon));
                break;
            }
            // tiny jitter keeps the raw fields linearly independent
            field += 1e-6 * scale * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
            raw.block<3, 1>(3 * static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(k)) = field;
        }
    }

    Eigen::HouseholderQR<MatX> qr(raw);
    model.basis = qr.householderQ() * MatX::Identity(dim, static_cast<Eigen::Index>(num_modes));
    // canonical column signs: largest-magnitude entry positive
    for (Eigen::Index c = 0; c < model.basis.cols(); ++c)
    {
        Eigen::Index imax = 0;
        model.basis.col(c).cwiseAbs().maxCoeff(&imax);
        if (model.basis(imax, c) < 0.0)
        {
            model.basis.col(c) = -model.basis.col(c);
        }
    }

    model.sigma.resize(static_cast<Eigen::Index>(num_modes));
    const double sigma0 = 0.04 * scale * std::sqrt(static_cast<double>(num_vertices));
    for (std::size_t k = 0; k < num_modes; ++k)
    {
        model.sigma[static_cast<Eigen::Index>(k)] = sigma0 * std::pow(0.7, static_cast<double>(k));
    }

    // Canonical landmarks: the two eye vertices first, then a seeded spread.
    auto nearest_vertex = [&](double lat, double lon) {
        std::uint32_t best = 0;
        double best_d = 1e300;
        for (std::size_t v = 0; v < num_vertices; ++v)
        {
            const double d = (lat_of[v] - lat) * (lat_of[v] - lat) +
                             (lon_of[v] - lon) * (lon_of[v] - lon);
            if (d < best_d)
            {
                best_d = d;
                best = static_cast<std::uint32_t>(v);
            }
        }
        return best;
    };
    std::uint32_t eye_left = nearest_vertex(0.35, -0.55);
    std::uint32_t eye_right = nearest_vertex(0.35, 0.55);
    if (eye_right == eye_left)
    {
        eye_right = (eye_left + 1) % static_cast<std::uint32_t>(num_vertices);
    }
    model.landmark_indices = {eye_left, eye_right};

    const std::size_t target = std::min<std::size_t>(70, num_vertices);
    std::vector<std::uint32_t> pool;
    for (std::uint32_t v = 0; v < num_vertices; ++v)
    {
        if (v != eye_left && v != eye_right)
        {
            pool.push_back(v);
        }
    }
    for (std::size_t i = pool.size(); i > 1; --i) // Fisher-Yates
    {
        std::swap(pool[i - 1], pool[rng.below(i)]);
    }
    std::vector<std::uint32_t> rest(pool.begin(),
                                    pool.begin() + static_cast<std::ptrdiff_t>(
                                                       std::min(target - 2, pool.size())));
    std::sort(rest.begin(), rest.end());
    model.landmark_indices.insert(model.landmark_indices.end(), rest.begin(), rest.end());

    model.validate();
    return model;
}

} /* namespace geofit */
