/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: src/image.cpp
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
#include "geofit/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace geofit {

namespace {

// Reads the next whitespace/comment-delimited token of a PNM header.
std::string pnm_token(std::istream& in, std::uint64_t& offset)
{
    std::string token;
    int c = in.get();
    while (c != EOF)
    {
        ++offset;
        if (c == '#')
        {
            while (c != EOF && c != '\n')
            {
                c = in.get();
                ++offset;
            }
        }
        else if (std::isspace(c))
        {
            if (!token.empty())
            {
                return token;
            }
        }
        else
        {
            token.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    return token;
}

} // namespace

GrayImage load_pgm(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw format_error("PGM: cannot open '" + path + "'", 0);
    }
    std::uint64_t offset = 0;
    const std::string magic = pnm_token(in, offset);
    if (magic != "P5")
    {
        throw format_error("PGM: expected P5 magic", 0);
    }
    const std::string w_tok = pnm_token(in, offset);
    const std::string h_tok = pnm_token(in, offset);
    const std::string max_tok = pnm_token(in, offset);
    int width = 0;
    int height = 0;
    int maxval = 0;
    try
    {
        width = std::stoi(w_tok);
        height = std::stoi(h_tok);
        maxval = std::stoi(max_tok);
    }
    catch (const std::exception&)
    {
        throw format_error("PGM: malformed header", offset);
    }
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
    {
        throw format_error("PGM: unsupported dimensions or maxval", offset);
    }
    GrayImage image(width, height);
    std::vector<unsigned char> row(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y)
    {
        in.read(reinterpret_cast<char*>(row.data()), width);
        if (in.gcount() != width)
        {
            throw format_error("PGM: truncated pixel data", offset);
        }
        offset += static_cast<std::uint64_t>(width);
        for (int x = 0; x < width; ++x)
        {
            image.at(x, y) = static_cast<double>(row[static_cast<std::size_t>(x)]) / maxval;
        }
    }
    return image;
}

void save_pgm(const GrayImage& image, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw format_error("PGM: cannot open '" + path + "' for writing", 0);
    }
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(image.width));
    for (int y = 0; y < image.height; ++y)
    {
        for (int x = 0; x < image.width; ++x)
        {
            const double v = std::clamp(image.at(x, y), 0.0, 1.0);
            row[static_cast<std::size_t>(x)] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), image.width);
    }
}

} /* namespace geofit */
