#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cltrack/core/types.hpp"

namespace cltrack::sim {

inline constexpr double kDefaultBoundaryTolerance = 1.0;

/// Row-major indices of mask pixels that touch the image border or have a background
/// 4-neighbour.
std::vector<std::size_t> boundary_pixels(const MaskGrid& mask);

/// Size of a maximum one-to-one matching between two pixel sets on a grid of `width`
/// columns, pairing pixels whose Euclidean distance is at most `tolerance`.
std::size_t match_boundaries(std::span<const std::size_t> a, std::span<const std::size_t> b,
                             int width, double tolerance);

/// Per-frame scores with the empty-frame convention: both empty scores 1, exactly one
/// empty scores 0. Throw PreconditionError on a shape mismatch.
double frame_j(const MaskGrid& pred, const MaskGrid& gt);
double frame_f(const MaskGrid& pred, const MaskGrid& gt,
               double tolerance = kDefaultBoundaryTolerance);

/// Means over all frames. Throw PreconditionError on length or shape mismatch and on
/// empty sequences.
double evaluate_j(std::span<const MaskGrid> pred, std::span<const MaskGrid> gt);
double evaluate_f(std::span<const MaskGrid> pred, std::span<const MaskGrid> gt,
                  double tolerance = kDefaultBoundaryTolerance);

/// (j + f) / 2; throws PreconditionError outside [0, 1].
double jf_mean(double j, double f);

}  // namespace cltrack::sim
