#pragma once

#include <filesystem>
#include <ostream>
#include <span>

#include "fewrays/image.hpp"
#include "fewrays/quadtree.hpp"
#include "fewrays/sampler.hpp"

namespace fewrays {

/// CSV header: view,depth,u0,v0,u1,v1,state,e_F,draws
/// One row per leaf inspected by the round; state is the round's decision
/// (marked, split, kept, no_draws, already_marked); e_F is empty without draws.
void write_leaf_csv_header(std::ostream& out);
void write_leaf_csv_rows(std::ostream& out, const SubdivisionReport& report);

/// Dimmed copy of the image with each drawn pixel painted red and leaf
/// borders in gray.
Image ray_overlay(const Image& image, const SubdivisionReport& report, std::span<const PixelDraw> draws);

/// Leaves filled with green whose depth tracks e_F relative to the largest
/// e_F of the round (dark green = large error, light = small).
Image error_overlay(int height, int width, const SubdivisionReport& report);

}  // namespace fewrays
