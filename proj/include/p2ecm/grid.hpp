#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "p2ecm/error.hpp"

namespace p2ecm {

using index_t = std::int64_t;

/// Number of uniform refinements of a macro-triangle. Row extent is 2^level.
class Level {
 public:
  static constexpr int max_value = 20;

  explicit Level(int value) : value_(value) {
    if (value < 0 || value > max_value) {
      throw InvalidLevel("refinement level " + std::to_string(value) +
                         " outside 0.." + std::to_string(max_value));
    }
  }

  int value() const noexcept { return value_; }

  /// Nominal row extent N = 2^level.
  index_t extent() const noexcept { return index_t{1} << value_; }

  friend bool operator==(Level, Level) = default;
  friend auto operator<=>(Level, Level) = default;

 private:
  int value_;
};

struct DofCounts {
  std::uint64_t vertices = 0;
  std::uint64_t edges_per_orientation = 0;
  std::uint64_t total = 0;

  friend bool operator==(const DofCounts&, const DofCounts&) = default;
};

DofCounts dof_counts(Level level);

/// Storage layout of a triangular array.
///
/// Both layouts are compact row-major triangles without ghost layers: row y
/// holds `row_width(0) - y` entries. Vertices have 2^l + 1 entries in row 0,
/// each edge orientation 2^l.
enum class Layout { vertex, edge };

std::string to_string(Layout layout);

/// Entries in row 0 of the layout (also the number of rows).
inline index_t base_width(Layout layout, Level level) noexcept {
  return layout == Layout::vertex ? level.extent() + 1 : level.extent();
}

inline index_t layout_size(Layout layout, Level level) noexcept {
  const index_t w = base_width(layout, level);
  return w * (w + 1) / 2;
}

inline bool in_layout(Layout layout, index_t x, index_t y, Level level) noexcept {
  const index_t w = base_width(layout, level);
  return y >= 0 && y < w && x >= 0 && x < w - y;
}

/// Unchecked linear index: x + (w+1)*y - y(y+1)/2 with w = base_width.
inline index_t layout_index_unchecked(Layout layout, index_t x, index_t y, Level level) noexcept {
  const index_t w = base_width(layout, level);
  return x + (w + 1) * y - y * (y + 1) / 2;
}

index_t layout_index(Layout layout, index_t x, index_t y, Level level);

/// x + (2^l + 2) y - y(y+1)/2; throws IndexError outside the triangle.
index_t vertex_index(index_t x, index_t y, Level level);

/// x + (2^l + 1) y - y(y+1)/2; throws IndexError outside the triangle.
index_t edge_index(index_t x, index_t y, Level level);

/// Half-open span [x_begin, x_end) of row y.
struct RowSpan {
  index_t y = 0;
  index_t x_begin = 0;
  index_t x_end = 0;

  index_t width() const noexcept { return x_end - x_begin; }
  friend bool operator==(const RowSpan&, const RowSpan&) = default;
};

struct IterationDomain {
  std::vector<RowSpan> rows;
  index_t size = 0;

  bool empty() const noexcept { return size == 0; }
  bool contains(index_t x, index_t y) const noexcept;
};

/// Closed-form bounds of an interior domain on a triangular grid:
/// y in [y_begin, y_end), x in [x_begin, x_limit - y). Rows with an empty x
/// range may occur at the top; IterationDomain drops them.
struct DomainBounds {
  index_t y_begin = 0;
  index_t y_end = 0;
  index_t x_begin = 0;
  index_t x_limit = 0;

  index_t x_end(index_t y) const noexcept { return x_limit - y; }
};

struct StencilAccessSpec;

DomainBounds interior_bounds(const StencilAccessSpec& spec, Level level);

/// Maximal set of target points for which every access of `spec` stays in
/// bounds. Iteration order: y ascending outer, x ascending inner.
IterationDomain interior_domain(const StencilAccessSpec& spec, Level level);

IterationDomain to_domain(const DomainBounds& bounds);

}  // namespace p2ecm
