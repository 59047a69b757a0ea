/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: src/landmarks.cpp
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
#include "geofit/landmarks.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace geofit {

std::vector<std::uint32_t> Landmarks2D::vertex_indices() const
{
    std::vector<std::uint32_t> out;
    out.reserve(entries.size());
    for (const auto& e : entries)
    {
        out.push_back(e.vertex_index);
    }
    return out;
}

VecX Landmarks2D::stacked() const
{
    VecX out(2 * static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i)
    {
        out[2 * static_cast<Eigen::Index>(i)] = entries[i].position.x();
        out[2 * static_cast<Eigen::Index>(i) + 1] = entries[i].position.y();
    }
    return out;
}

void Landmarks2D::validate(std::size_t num_vertices) const
{
    if (entries.empty())
    {
        throw std::invalid_argument("Landmarks2D: at least one landmark required");
    }
    std::set<std::uint32_t> seen;
    for (const auto& e : entries)
    {
        if (e.vertex_index >= num_vertices)
        {
            throw std::invalid_argument("Landmarks2D: vertex index " +
                                        std::to_string(e.vertex_index) + " out of range");
        }
        if (!seen.insert(e.vertex_index).second)
        {
            throw std::invalid_argument("Landmarks2D: duplicate vertex index " +
                                        std::to_string(e.vertex_index));
        }
        if (!std::isfinite(e.position.x()) || !std::isfinite(e.position.y()))
        {
            throw std::invalid_argument("Landmarks2D: non-finite position");
        }
    }
}

Landmarks2D load_landmarks(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw format_error("landmarks: cannot open '" + path + "'", 0);
    }
    std::string line;
    std::uint64_t line_no = 0;
    if (!std::getline(in, line))
    {
        throw format_error("landmarks: empty file", 0);
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r')
    {
        line.pop_back();
    }
    if (line != "vertex_index,x,y")
    {
        throw format_error("landmarks: expected header 'vertex_index,x,y'", line_no);
    }
    Landmarks2D out;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty())
        {
            continue;
        }
        std::istringstream ss(line);
        LandmarkObservation obs;
        char comma1 = 0;
        char comma2 = 0;
        long long vi = -1;
        if (!(ss >> vi >> comma1 >> obs.position.x() >> comma2 >> obs.position.y()) ||
            comma1 != ',' || comma2 != ',' || vi < 0)
        {
            throw format_error("landmarks: malformed row", line_no);
        }
        obs.vertex_index = static_cast<std::uint32_t>(vi);
        out.entries.push_back(obs);
    }
    if (out.entries.empty())
    {
        throw format_error("landmarks: no landmark rows", line_no);
    }
    return out;
}

void save_landmarks(const Landmarks2D& landmarks, const std::string& path)
{
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out)
    {
        throw format_error("landmarks: cannot open '" + path + "' for writing", 0);
    }
    out << "vertex_index,x,y\n";
    char line[96];
    for (const auto& e : landmarks.entries)
    {
        std::snprintf(line, sizeof line, "%u,%.17g,%.17g\n", e.vertex_index, e.position.x(),
                      e.position.y());
        out << line;
    }
}

Landmarks2D project_landmarks(const VecX& vertices, const std::vector<std::uint32_t>& indices,
                              const OrthoPose& pose)
{
    Landmarks2D out;
    out.entries.reserve(indices.size());
    for (const auto idx : indices)
    {
        out.entries.push_back({idx, sop_project(vertex_position(vertices, idx), pose)});
    }
    return out;
}

Landmarks2D project_landmarks(const VecX& vertices, const std::vector<std::uint32_t>& indices,
                              const PerspCamera& camera)
{
    Landmarks2D out;
    out.entries.reserve(indices.size());
    for (const auto idx : indices)
    {
        out.entries.push_back({idx, pinhole_project(vertex_position(vertices, idx), camera)});
    }
    return out;
}

} /* namespace geofit */
