#pragma once

// Brute-force reference implementations used to check the library.

#include "cellmorph/mask_io.hpp"
#include "cellmorph/morphometry.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Grid = std::vector<std::uint32_t>;
using Pixel = std::pair<int, int>;  // (x, y)

/// Random binary grid with the given foreground probability.
Grid random_binary(std::mt19937_64& rng, int w, int h, double p);

/// Random label grid: a few labels painted as random rectangles and blobs.
Grid random_labels(std::mt19937_64& rng, int w, int h, int max_label);

/// 8-connected flood fill numbering components 1..K by their first pixel in
/// raster order.
Grid flood_fill_components(int w, int h, const Grid& grid);

/// Pixels of one 8-connected component of `label`, by flood fill from `seed`.
std::set<Pixel> component_pixels(int w, int h, const Grid& grid, Pixel seed);

/// Pixels outside `component` that the exterior reaches by 4-steps without
/// entering it, within the component's bounding box grown by one pixel.
std::set<Pixel> outer_background(int w, int h, const std::set<Pixel>& component);

/// Component pixels 4-adjacent to the outer background.
std::set<Pixel> outer_border(int w, int h, const std::set<Pixel>& component);

/// Twice the shoelace area of the closed lattice path through pixel centres.
long long twice_path_area(const cellmorph::ChainCode& chain);

/// Pixel count of the component plus its holes.
std::size_t enclosed_pixels(int w, int h, const std::set<Pixel>& component);

/// For every nucleus label: cell label -> overlapping pixel count.
std::map<std::uint32_t, std::map<std::uint32_t, std::size_t>> overlaps(const Grid& cells,
                                                                      const Grid& nuclei);

/// Filled disk: pixel (x, y) belongs when its centre lies within r of (cx, cy).
Grid disk(int w, int h, double cx, double cy, double r, std::uint32_t label = 1);

/// F distribution CDF by adaptive Simpson integration of the density,
/// after substituting x = t^2 to remove the singularity at 0.
double f_cdf_quadrature(double x, int d1, int d2);

/// Symmetry measure by scanning reference rotations on a fixed grid of
/// `step` radians (no refinement).
double csm_brute_force(const std::vector<std::pair<double, double>>& vertices, double step);

/// Pooled-variance two-sample Student t statistic.
double student_t(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oracle
