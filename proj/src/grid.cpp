#include "p2ecm/grid.hpp"

#include <algorithm>
#include <limits>

#include "p2ecm/stencil_spec.hpp"

namespace p2ecm {

DofCounts dof_counts(Level level) {
  const auto n = static_cast<std::uint64_t>(level.extent());
  DofCounts c;
  c.vertices = (n + 1) * (n + 2) / 2;
  c.edges_per_orientation = n * (n + 1) / 2;
  c.total = c.vertices + 3 * c.edges_per_orientation;
  return c;
}

std::string to_string(Layout layout) {
  return layout == Layout::vertex ? "vertex" : "edge";
}

index_t layout_index(Layout layout, index_t x, index_t y, Level level) {
  if (!in_layout(layout, x, y, level)) {
    throw IndexError("(" + std::to_string(x) + ", " + std::to_string(y) + ") outside the " +
                     to_string(layout) + " triangle at level " +
                     std::to_string(level.value()));
  }
  return layout_index_unchecked(layout, x, y, level);
}

index_t vertex_index(index_t x, index_t y, Level level) {
  return layout_index(Layout::vertex, x, y, level);
}

index_t edge_index(index_t x, index_t y, Level level) {
  return layout_index(Layout::edge, x, y, level);
}

bool IterationDomain::contains(index_t x, index_t y) const noexcept {
  auto it = std::lower_bound(rows.begin(), rows.end(), y,
                             [](const RowSpan& r, index_t v) { return r.y < v; });
  return it != rows.end() && it->y == y && x >= it->x_begin && x < it->x_end;
}

// An access (dx, dy) into an array whose row y' holds w - y' entries is in
// bounds iff y + dy >= 0, x + dx >= 0 and x + dx < w - (y + dy). The last
// inequality already implies y + dy < w. Intersecting over all accesses
// (targets count as (0, 0)) gives one lower bound per axis and a single
// diagonal bound x < x_limit - y.
DomainBounds interior_bounds(const StencilAccessSpec& spec, Level level) {
  DomainBounds b;
  b.x_limit = std::numeric_limits<index_t>::max();
  b.y_end = std::numeric_limits<index_t>::max();
  auto constrain = [&](const ArrayDesc& array, int dx, int dy) {
    const index_t w = base_width(array.layout, level);
    b.x_begin = std::max<index_t>(b.x_begin, -dx);
    b.y_begin = std::max<index_t>(b.y_begin, -dy);
    b.x_limit = std::min<index_t>(b.x_limit, w - dx - dy);
    b.y_end = std::min<index_t>(b.y_end, w - dy);
  };
  for (const auto& t : spec.targets) constrain(t, 0, 0);
  for (const auto& u : spec.updates) {
    for (const auto& a : u.terms) constrain(spec.sources.at(a.source), a.dx, a.dy);
  }
  return b;
}

IterationDomain to_domain(const DomainBounds& b) {
  IterationDomain d;
  for (index_t y = b.y_begin; y < b.y_end; ++y) {
    const index_t xe = b.x_end(y);
    if (b.x_begin >= xe) break;  // x_end shrinks with y
    d.rows.push_back({y, b.x_begin, xe});
    d.size += xe - b.x_begin;
  }
  return d;
}

IterationDomain interior_domain(const StencilAccessSpec& spec, Level level) {
  return to_domain(interior_bounds(spec, level));
}

}  // namespace p2ecm
