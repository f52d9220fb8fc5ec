#include "p2ecm/sparse.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "p2ecm/kernels.hpp"

namespace p2ecm {

std::int64_t max_index(IndexWidth width) noexcept {
  return width == IndexWidth::bits32 ? std::numeric_limits<std::int32_t>::max()
                                     : std::numeric_limits<std::int64_t>::max();
}

void check_index_capacity(std::uint64_t nnz, IndexWidth width) {
  if (nnz > static_cast<std::uint64_t>(max_index(width))) {
    throw OverflowError(fmt::format("{} stored entries exceed the signed {}-bit index range",
                                    nnz, static_cast<int>(width)));
  }
}

void CooMatrix::add(std::int64_t row, std::int64_t col, double value) {
  if (row < 0 || row >= n || col < 0 || col >= n) {
    throw IndexError(fmt::format("COO entry ({}, {}) outside {}x{}", row, col, n, n));
  }
  entries.push_back({row, col, value});
}

CrsMatrix CrsMatrix::from_coo(const CooMatrix& coo, IndexWidth width) {
  std::vector<CooEntry> sorted = coo.entries;
  std::stable_sort(sorted.begin(), sorted.end(), [](const CooEntry& a, const CooEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CrsMatrix m;
  m.n_ = coo.n;
  m.width_ = width;
  m.row_ptr_.assign(static_cast<std::size_t>(coo.n) + 1, 0);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& e = sorted[i];
    if (!m.col_idx_.empty() && i > 0 && sorted[i - 1].row == e.row && sorted[i - 1].col == e.col) {
      m.values_.back() += e.value;
      continue;
    }
    m.col_idx_.push_back(e.col);
    m.values_.push_back(e.value);
    ++m.row_ptr_[static_cast<std::size_t>(e.row) + 1];
  }
  check_index_capacity(m.values_.size(), width);
  for (std::size_t r = 0; r < static_cast<std::size_t>(coo.n); ++r) {
    m.row_ptr_[r + 1] += m.row_ptr_[r];
  }
  return m;
}

void CrsMatrix::check_invariants() const {
  if (row_ptr_.size() != static_cast<std::size_t>(n_) + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != nnz() || col_idx_.size() != values_.size()) {
    throw Error("CRS: inconsistent array lengths");
  }
  for (std::int64_t r = 0; r < n_; ++r) {
    const auto b = row_ptr_[static_cast<std::size_t>(r)];
    const auto e = row_ptr_[static_cast<std::size_t>(r) + 1];
    if (e < b) throw Error(fmt::format("CRS: row_ptr decreases at row {}", r));
    for (auto k = b; k < e; ++k) {
      const auto c = col_idx_[static_cast<std::size_t>(k)];
      if (c < 0 || c >= n_) throw Error(fmt::format("CRS: column {} out of range", c));
      if (k > b && c <= col_idx_[static_cast<std::size_t>(k) - 1]) {
        throw Error(fmt::format("CRS: columns not strictly ascending in row {}", r));
      }
    }
  }
  check_index_capacity(static_cast<std::uint64_t>(nnz()), width_);
}

GlobalNumbering::GlobalNumbering(Level level) {
  const auto c = dof_counts(level);
  const auto nv = static_cast<std::int64_t>(c.vertices);
  const auto ne = static_cast<std::int64_t>(c.edges_per_orientation);
  vertex = 0;
  edge_x = nv;
  edge_y = nv + ne;
  edge_xy = nv + 2 * ne;
  total = nv + 3 * ne;
}

std::int64_t GlobalNumbering::block(FieldTag tag) const {
  switch (tag) {
    case FieldTag::vertex: return vertex;
    case FieldTag::edge_x: return edge_x;
    case FieldTag::edge_y: return edge_y;
    case FieldTag::edge_xy: return edge_xy;
  }
  return 0;
}

namespace {

// Built-in specs list their edge arrays in x, y, xy order.
std::vector<FieldTag> tags_of(const std::vector<ArrayDesc>& arrays) {
  std::vector<FieldTag> tags;
  int edge = 0;
  for (const auto& a : arrays) {
    if (a.layout == Layout::vertex) {
      tags.push_back(FieldTag::vertex);
    } else {
      tags.push_back(static_cast<FieldTag>(1 + edge++));
    }
  }
  return tags;
}

}  // namespace

CrsMatrix assemble(const P2Operator& op, Level level, IndexWidth width) {
  const GlobalNumbering g(level);
  CooMatrix coo{g.total, {}};
  std::vector<char> covered(static_cast<std::size_t>(g.total), 0);

  for (KernelId id : all_kernels) {
    const auto spec = builtin_spec(id);
    const auto src_tags = tags_of(spec.sources);
    const auto dst_tags = tags_of(spec.targets);
    const auto w = op.weights(id);
    for (const auto& r : interior_domain(spec, level).rows) {
      for (index_t x = r.x_begin; x < r.x_end; ++x) {
        for (const auto& u : spec.updates) {
          const auto& t = spec.targets[static_cast<std::size_t>(u.target)];
          const auto row = g.block(dst_tags[static_cast<std::size_t>(u.target)]) +
                           layout_index(t.layout, x, r.y, level);
          covered[static_cast<std::size_t>(row)] = 1;
          for (const auto& a : u.terms) {
            const auto& s = spec.sources[static_cast<std::size_t>(a.source)];
            const auto col = g.block(src_tags[static_cast<std::size_t>(a.source)]) +
                             layout_index(s.layout, x + a.dx, r.y + a.dy, level);
            coo.add(row, col, w[static_cast<std::size_t>(a.weight)]);
          }
        }
      }
    }
  }
  for (std::int64_t i = 0; i < g.total; ++i) {
    if (!covered[static_cast<std::size_t>(i)]) coo.add(i, i, 1.0);
  }
  return CrsMatrix::from_coo(coo, width);
}

std::vector<RowKind> row_kinds(Level level) {
  const GlobalNumbering g(level);
  std::vector<int> hits(static_cast<std::size_t>(g.total), 0);
  for (KernelId id : all_kernels) {
    const auto spec = builtin_spec(id);
    const auto dst_tags = tags_of(spec.targets);
    for (const auto& r : interior_domain(spec, level).rows) {
      for (index_t x = r.x_begin; x < r.x_end; ++x) {
        for (std::size_t t = 0; t < spec.targets.size(); ++t) {
          const auto row = g.block(dst_tags[t]) + layout_index(spec.targets[t].layout, x, r.y, level);
          ++hits[static_cast<std::size_t>(row)];
        }
      }
    }
  }
  std::vector<RowKind> kinds(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const bool is_vertex = static_cast<std::int64_t>(i) < g.edge_x;
    kinds[i] = hits[i] == 0   ? RowKind::boundary
               : hits[i] == 1 ? RowKind::partial
               : is_vertex    ? RowKind::vertex_interior
                              : RowKind::edge_interior;
  }
  return kinds;
}

std::vector<double> spmv(const CrsMatrix& a, std::span<const double> x) {
  if (static_cast<std::int64_t>(x.size()) != a.rows()) {
    throw ShapeError(fmt::format("spmv: vector of length {} for {} rows", x.size(), a.rows()));
  }
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t r = 0; r < y.size(); ++r) {
    double sum = 0.0;
    for (auto k = rp[r]; k < rp[r + 1]; ++k) {
      sum += v[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(ci[static_cast<std::size_t>(k)])];
    }
    y[r] = sum;
  }
  return y;
}

void write_matrix_market(std::ostream& out, const CrsMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << fmt::format("{} {} {}\n", a.rows(), a.rows(), a.nnz());
  const auto rp = a.row_ptr();
  for (std::int64_t r = 0; r < a.rows(); ++r) {
    for (auto k = rp[static_cast<std::size_t>(r)]; k < rp[static_cast<std::size_t>(r) + 1]; ++k) {
      out << fmt::format("{} {} {:.17g}\n", r + 1, a.col_idx()[static_cast<std::size_t>(k)] + 1,
                         a.values()[static_cast<std::size_t>(k)]);
    }
  }
}

FootprintReport footprint_model(Level level, int index_bytes) {
  if (index_bytes != 4 && index_bytes != 8) {
    throw DomainError(fmt::format("index width of {} bytes not supported", index_bytes));
  }
  const auto c = dof_counts(level);
  FootprintReport f;
  f.level = level.value();
  f.index_bytes = index_bytes;
  f.dof_mem = 8 * c.total;
  f.vertex_stencil_mem = 8 * 19 * c.vertices;
  f.edge_stencil_mem = 8 * 9 * 3 * c.edges_per_orientation;
  // One index per stored value and one per row.
  f.col_index_mem = (c.vertices * 19 + c.edges_per_orientation * 27) * static_cast<std::uint64_t>(index_bytes);
  f.row_index_mem = c.total * static_cast<std::uint64_t>(index_bytes);
  f.crs_total = f.value_mem() + f.index_mem() + 2 * f.dof_mem;
  f.matrix_free_total = 2 * f.dof_mem;
  f.hyteg_traffic_total = 4 * f.dof_mem;
  return f;
}

std::uint64_t nnz_estimate(Level level) {
  const auto c = dof_counts(level);
  return 19 * c.vertices + 27 * c.edges_per_orientation;
}

std::optional<int> index_overflow_level(int index_bytes, std::uint64_t n_triangles) {
  if (index_bytes != 4 && index_bytes != 8) {
    throw DomainError(fmt::format("index width of {} bytes not supported", index_bytes));
  }
  if (n_triangles == 0) throw DomainError("at least one triangle is required");
  const auto limit = static_cast<std::uint64_t>(
      max_index(index_bytes == 4 ? IndexWidth::bits32 : IndexWidth::bits64));
  // nnz * n > limit  <=>  nnz > floor(limit / n) for integers.
  const std::uint64_t per_triangle_limit = limit / n_triangles;
  for (int l = 0; l <= Level::max_value; ++l) {
    if (nnz_estimate(Level(l)) > per_triangle_limit) return l;
  }
  return std::nullopt;
}

}  // namespace p2ecm
