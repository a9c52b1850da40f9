#include "fewrays/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace fewrays {

void write_leaf_csv_header(std::ostream& out) { out << "view,depth,u0,v0,u1,v1,state,e_F,draws\n"; }

void write_leaf_csv_rows(std::ostream& out, const SubdivisionReport& report) {
  for (const LeafDecision& leaf : report.leaves) {
    out << report.view << ',' << leaf.depth << ',' << leaf.bounds.u0 << ',' << leaf.bounds.v0 << ','
        << leaf.bounds.u1 << ',' << leaf.bounds.v1 << ',' << to_string(leaf.decision) << ',';
    if (leaf.mean_error) out << std::setprecision(9) << *leaf.mean_error;
    out << ',' << leaf.draws << '\n';
  }
}

namespace {

void draw_borders(Image& image, const SubdivisionReport& report, const Vec3& color) {
  for (const LeafDecision& leaf : report.leaves) {
    const PixelRect& b = leaf.bounds;
    for (int v = b.v0; v < b.v1; ++v) {
      image.set_pixel(b.u0, v, color);
      image.set_pixel(b.u1 - 1, v, color);
    }
    for (int u = b.u0; u < b.u1; ++u) {
      image.set_pixel(u, b.v0, color);
      image.set_pixel(u, b.v1 - 1, color);
    }
  }
}

}  // namespace

Image ray_overlay(const Image& image, const SubdivisionReport& report, std::span<const PixelDraw> draws) {
  Image out(image.width(), image.height());
  for (int u = 0; u < image.height(); ++u)
    for (int v = 0; v < image.width(); ++v) out.set_pixel(u, v, 0.35 * image.pixel(u, v) + Vec3::Constant(0.65));
  draw_borders(out, report, Vec3::Constant(0.6));
  for (const PixelDraw& d : draws)
    if (d.view == report.view && d.u < image.height() && d.v < image.width()) out.set_pixel(d.u, d.v, Vec3(1.0, 0.0, 0.0));
  return out;
}

Image error_overlay(int height, int width, const SubdivisionReport& report) {
  double largest = 0.0;
  for (const LeafDecision& leaf : report.leaves)
    if (leaf.mean_error) largest = std::max(largest, *leaf.mean_error);
  Image out(width, height, 1.0);
  for (const LeafDecision& leaf : report.leaves) {
    const double k = (leaf.mean_error && largest > 0.0) ? std::clamp(*leaf.mean_error / largest, 0.0, 1.0) : 0.0;
    const Vec3 green(1.0 - k, 1.0 - 0.6 * k, 1.0 - k);
    for (int u = leaf.bounds.u0; u < leaf.bounds.u1; ++u)
      for (int v = leaf.bounds.v0; v < leaf.bounds.v1; ++v) out.set_pixel(u, v, green);
  }
  draw_borders(out, report, Vec3::Constant(0.3));
  return out;
}

}  // namespace fewrays
