// Copyright 2026 The Sketchguess Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sketchguess/corpus.hpp"
#include "sketchguess/error.hpp"

namespace sketchguess::corpus {

void FeatureConfig::Validate() const {
  if (grid_side <= 0 || dilation_radius < 0 || direction_bins <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid feature config");
  }
}

namespace {

int Cell(double v, int side) {
  int c = static_cast<int>(std::floor(v * side));
  return std::clamp(c, 0, side - 1);
}

void Mark(std::vector<double>& grid, int side, int x, int y, int radius) {
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      int cx = x + dx, cy = y + dy;
      if (cx < 0 || cy < 0 || cx >= side || cy >= side) continue;
      grid[static_cast<std::size_t>(cy * side + cx)] = 1.0;
    }
  }
}

// Bresenham between two raster cells, dilating every visited cell.
void Line(std::vector<double>& grid, int side, int x0, int y0, int x1, int y1, int radius) {
  int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    Mark(grid, side, x0, y0, radius);
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

std::vector<double> ExtractFeatures(const StrokeSequence& prefix, const FeatureConfig& cfg) {
  cfg.Validate();
  const int side = cfg.grid_side;
  std::vector<double> raster(static_cast<std::size_t>(side * side), 0.0);
  std::vector<double> hist(static_cast<std::size_t>(cfg.direction_bins), 0.0);
  double total_length = 0.0;

  for (const Stroke& s : prefix.strokes) {
    if (s.points.empty()) continue;
    const Point& first = s.points.front();
    Mark(raster, side, Cell(first.x, side), Cell(first.y, side), cfg.dilation_radius);
    for (std::size_t i = 1; i < s.points.size(); ++i) {
      const Point& a = s.points[i - 1];
      const Point& b = s.points[i];
      Line(raster, side, Cell(a.x, side), Cell(a.y, side), Cell(b.x, side), Cell(b.y, side),
           cfg.dilation_radius);
      double dx = b.x - a.x, dy = b.y - a.y;
      double len = std::hypot(dx, dy);
      if (len <= 0.0) continue;
      // Undirected orientation in [0, pi).
      double theta = std::atan2(dy, dx);
      if (theta < 0.0) theta += std::numbers::pi;
      if (theta >= std::numbers::pi) theta -= std::numbers::pi;
      int bin = static_cast<int>(theta / (std::numbers::pi / cfg.direction_bins));
      bin = std::clamp(bin, 0, cfg.direction_bins - 1);
      hist[static_cast<std::size_t>(bin)] += len;
      total_length += len;
    }
  }
  if (total_length > 0.0) {
    for (double& h : hist) h /= total_length;
  }
  raster.insert(raster.end(), hist.begin(), hist.end());
  return raster;
}

std::vector<std::vector<double>> ExtractSequenceFeatures(const StrokeSequence& sketch,
                                                         const FeatureConfig& cfg) {
  std::vector<std::vector<double>> out;
  out.reserve(sketch.size());
  for (std::size_t t = 1; t <= sketch.size(); ++t) {
    out.push_back(ExtractFeatures(sketch.Prefix(t), cfg));
  }
  return out;
}

}  // namespace sketchguess::corpus
