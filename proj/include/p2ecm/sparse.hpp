#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "p2ecm/fields.hpp"

namespace p2ecm {

enum class IndexWidth { bits32 = 32, bits64 = 64 };

/// Largest nnz representable by a signed index of the given width.
std::int64_t max_index(IndexWidth width) noexcept;

/// Throws OverflowError if nnz does not fit a signed index of `width`.
void check_index_capacity(std::uint64_t nnz, IndexWidth width);

struct CooEntry {
  std::int64_t row = 0;
  std::int64_t col = 0;
  double value = 0.0;
};

struct CooMatrix {
  std::int64_t n = 0;
  std::vector<CooEntry> entries;

  void add(std::int64_t row, std::int64_t col, double value);
};

/// Compressed row storage. Indices are held in 64-bit containers; the
/// declared width bounds the admissible nnz.
class CrsMatrix {
 public:
  /// Sorts entries by (row, col) and sums duplicates.
  static CrsMatrix from_coo(const CooMatrix& coo, IndexWidth width);

  std::int64_t rows() const noexcept { return n_; }
  std::int64_t nnz() const noexcept { return static_cast<std::int64_t>(values_.size()); }
  IndexWidth index_width() const noexcept { return width_; }

  std::span<const std::int64_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::int64_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  std::int64_t row_nnz(std::int64_t row) const { return row_ptr_.at(row + 1) - row_ptr_.at(row); }

  /// Throws Error if any structural invariant is broken.
  void check_invariants() const;

 private:
  std::int64_t n_ = 0;
  IndexWidth width_ = IndexWidth::bits32;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int64_t> col_idx_;
  std::vector<double> values_;
};

/// Offsets of the four blocks in the global numbering
/// [vertex | edge x | edge y | edge xy].
struct GlobalNumbering {
  std::int64_t vertex = 0;
  std::int64_t edge_x = 0;
  std::int64_t edge_y = 0;
  std::int64_t edge_xy = 0;
  std::int64_t total = 0;

  explicit GlobalNumbering(Level level);
  std::int64_t block(FieldTag tag) const;
};

/// Row classes of the assembled operator at one level.
enum class RowKind { boundary, vertex_interior, edge_interior, partial };

/// Builds the matrix that apply_p2 applies. A row receives the couplings of
/// every kernel whose interior domain contains its DoF; rows covered by no
/// kernel are identity rows. Rows covered by both kernels of their block are
/// `vertex_interior` / `edge_interior` (19 and 9 couplings).
CrsMatrix assemble(const P2Operator& op, Level level, IndexWidth width = IndexWidth::bits32);

std::vector<RowKind> row_kinds(Level level);

std::vector<double> spmv(const CrsMatrix& a, std::span<const double> x);

/// Matrix Market coordinate format, 1-based, values printed with 17 digits.
void write_matrix_market(std::ostream& out, const CrsMatrix& a);

/// Analytical memory footprint of one mat-vec on a single triangle,
/// ignoring the boundary (every row fully populated).
struct FootprintReport {
  int level = 0;
  int index_bytes = 4;
  std::uint64_t dof_mem = 0;
  std::uint64_t vertex_stencil_mem = 0;
  std::uint64_t edge_stencil_mem = 0;
  std::uint64_t col_index_mem = 0;
  std::uint64_t row_index_mem = 0;
  std::uint64_t crs_total = 0;
  std::uint64_t matrix_free_total = 0;
  std::uint64_t hyteg_traffic_total = 0;

  std::uint64_t value_mem() const noexcept { return vertex_stencil_mem + edge_stencil_mem; }
  std::uint64_t index_mem() const noexcept { return col_index_mem + row_index_mem; }
};

FootprintReport footprint_model(Level level, int index_bytes);

/// Bytes in decimal megabytes (10^6 B).
inline double to_mb(std::uint64_t bytes) noexcept { return static_cast<double>(bytes) / 1e6; }

/// Stored entries of the operator on one triangle when the boundary is
/// ignored: 19 per vertex, 9 per edge DoF.
std::uint64_t nnz_estimate(Level level);

/// Smallest level whose total nnz over `n_triangles` exceeds the signed index
/// range of `index_bytes` bytes, or nullopt if none up to Level::max_value.
std::optional<int> index_overflow_level(int index_bytes, std::uint64_t n_triangles);

}  // namespace p2ecm
