/*
 * geofit3d - A library for fitting linear 3D shape models to 2D geometry.
 *
 * File: include/geofit/image.hpp
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

#ifndef GEOFIT_IMAGE_HPP
#define GEOFIT_IMAGE_HPP

#include "geofit/core.hpp"

#include <string>
#include <vector>

namespace geofit {

/// Row-major grayscale raster with double intensities in [0, 1].
struct GrayImage
{
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill)
    {
    }

    bool contains(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    double at(int x, int y) const
    {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }
    double& at(int x, int y)
    {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }
};

/// Binary P5 PGM, 8-bit, intensities scaled to [0, 1].
GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& image, const std::string& path);

} /* namespace geofit */

#endif /* GEOFIT_IMAGE_HPP */
