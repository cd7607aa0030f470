#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "bijmap/error.hpp"
#include "bijmap/polygon.hpp"
#include "bijmap/simplicial_map.hpp"

namespace bijmap {

enum class Coloring { none, gradient_norm };

/// Linear blue (t = 0) to red (t = 1) ramp as #rrggbb.
inline std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 * t));
  const int b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, 0, b);
  return buf;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

/// Deterministic SVG of a planar map: the polygon outline, one filled path per
/// face (ramp colored by |A_j|_F when requested, with a legend), and the image
/// of the mesh boundary drawn on top. The y axis points up.
inline std::string render_svg(const SimplicialMap& map, const Polytope2& polygon, Coloring coloring) {
  if (map.dim() != 2) throw ParameterError("SVG rendering needs a planar (d = 2) map");
  const Eigen::MatrixXd& u = map.images();
  Eigen::Vector2d lo = u.colwise().minCoeff().transpose(), hi = u.colwise().maxCoeff().transpose();
  for (const auto& p : polygon.vertices()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
  const double size = 512.0, pad = 24.0;
  const double s = (size - 2 * pad) / span;
  const bool legend = coloring == Coloring::gradient_norm;
  const double width = size + (legend ? 96.0 : 0.0);
  auto X = [&](double x) { return detail::fmt(pad + (x - lo.x()) * s); };
  auto Y = [&](double y) { return detail::fmt(size - pad - (y - lo.y()) * s); };

  std::vector<double> norms;
  double nmin = 0.0, nmax = 0.0;
  if (legend) {
    norms = gradient_norms(map);
    nmin = *std::min_element(norms.begin(), norms.end());
    nmax = *std::max_element(norms.begin(), norms.end());
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(width) << "\" height=\""
     << detail::fmt(size) << "\" viewBox=\"0 0 " << detail::fmt(width) << ' ' << detail::fmt(size) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  os << "<polygon points=\"";
  for (int i = 0; i < polygon.size(); ++i) os << (i ? " " : "") << X(polygon.vertex(i).x()) << ',' << Y(polygon.vertex(i).y());
  os << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\" stroke-dasharray=\"6 3\"/>\n";
  os << "<g stroke=\"#404040\" stroke-width=\"0.5\" stroke-linejoin=\"round\">\n";
  for (int j = 0; j < map.mesh().num_faces(); ++j) {
    const auto& f = map.mesh().face(j);
    std::string fill = "#dddddd";
    if (legend) fill = ramp_color(nmax - nmin > 1e-9 * nmax ? (norms[j] - nmin) / (nmax - nmin) : 0.5);
    os << "<path d=\"M" << X(u(f[0], 0)) << ',' << Y(u(f[0], 1)) << " L" << X(u(f[1], 0)) << ',' << Y(u(f[1], 1))
       << " L" << X(u(f[2], 0)) << ',' << Y(u(f[2], 1)) << " Z\" fill=\"" << fill << "\"/>\n";
  }
  os << "</g>\n";
  os << "<g stroke=\"#e00000\" stroke-width=\"2\" fill=\"none\">\n";
  for (const auto& e : map.mesh().boundary().faces_by_dim[1]) {
    os << "<line x1=\"" << X(u(e[0], 0)) << "\" y1=\"" << Y(u(e[0], 1)) << "\" x2=\"" << X(u(e[1], 0)) << "\" y2=\""
       << Y(u(e[1], 1)) << "\"/>\n";
  }
  os << "</g>\n";
  if (legend) {
    const double x0 = size + 16.0, top = pad, bottom = size - pad;
    const int steps = 32;
    for (int i = 0; i < steps; ++i) {
      const double t = (i + 0.5) / steps;
      const double y = bottom - (i + 1) * (bottom - top) / steps;
      os << "<rect x=\"" << detail::fmt(x0) << "\" y=\"" << detail::fmt(y) << "\" width=\"20\" height=\""
         << detail::fmt((bottom - top) / steps + 0.5) << "\" fill=\"" << ramp_color(t) << "\"/>\n";
    }
    os << "<text x=\"" << detail::fmt(x0 + 24) << "\" y=\"" << detail::fmt(top + 10) << "\" font-size=\"11\">"
       << detail::fmt(nmax) << "</text>\n";
    os << "<text x=\"" << detail::fmt(x0 + 24) << "\" y=\"" << detail::fmt(bottom) << "\" font-size=\"11\">"
       << detail::fmt(nmin) << "</text>\n";
    os << "<text x=\"" << detail::fmt(x0) << "\" y=\"" << detail::fmt(top - 8) << "\" font-size=\"11\">|grad|</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace bijmap
