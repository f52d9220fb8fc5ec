#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "p2ecm/grid.hpp"
#include "p2ecm/stencil_spec.hpp"

namespace p2ecm {

enum class EdgeOrientation { x, y, xy };

inline constexpr EdgeOrientation all_orientations[] = {EdgeOrientation::x, EdgeOrientation::y,
                                                       EdgeOrientation::xy};

std::string to_string(EdgeOrientation o);

/// Initial content of a freshly allocated field.
struct Zeros {};
struct Constant {
  double value = 0.0;
};
/// Deterministic values in [-1, 1); see fill_pseudo_random.
struct PseudoRandom {
  std::uint64_t seed = 0;
};
using Fill = std::variant<Zeros, Constant, PseudoRandom>;

/// Tag used in binary dumps and in the seeding of pseudo-random fills.
enum class FieldTag : std::uint32_t { vertex = 0, edge_x = 1, edge_y = 2, edge_xy = 3 };

FieldTag edge_tag(EdgeOrientation o);

/// Fills `values` from a 64-bit Mersenne twister seeded with
/// splitmix64(seed ^ splitmix64(level << 8 | tag)). Each draw u maps to
/// (u >> 11) * 2^-52 - 1, which is exact and platform independent.
void fill_pseudo_random(std::span<double> values, std::uint64_t seed, Level level, FieldTag tag);

/// Dense values on one triangular layout at a fixed level.
class TriangleField {
 public:
  TriangleField(Level level, Layout layout, FieldTag tag, const Fill& fill = Zeros{});

  Level level() const noexcept { return level_; }
  Layout layout() const noexcept { return layout_; }
  FieldTag tag() const noexcept { return tag_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  /// Checked access by triangle coordinates.
  double get(index_t x, index_t y) const;
  void set(index_t x, index_t y, double value);

  double& operator[](index_t i) noexcept { return values_[static_cast<std::size_t>(i)]; }
  double operator[](index_t i) const noexcept { return values_[static_cast<std::size_t>(i)]; }

  void fill(const Fill& fill);

 private:
  Level level_;
  Layout layout_;
  FieldTag tag_;
  std::vector<double> values_;
};

class VertexField : public TriangleField {
 public:
  explicit VertexField(Level level, const Fill& fill = Zeros{})
      : TriangleField(level, Layout::vertex, FieldTag::vertex, fill) {}
};

class EdgeField : public TriangleField {
 public:
  EdgeField(Level level, EdgeOrientation orientation, const Fill& fill = Zeros{})
      : TriangleField(level, Layout::edge, edge_tag(orientation), fill),
        orientation_(orientation) {}

  EdgeOrientation orientation() const noexcept { return orientation_; }

 private:
  EdgeOrientation orientation_;
};

/// Vertex and edge DoFs of a P2 function on one macro-triangle.
struct P2Function {
  VertexField vertex;
  EdgeField edge_x;
  EdgeField edge_y;
  EdgeField edge_xy;

  explicit P2Function(Level level, const Fill& fill = Zeros{});

  Level level() const noexcept { return vertex.level(); }
  std::size_t size() const noexcept;

  EdgeField& edge(EdgeOrientation o);
  const EdgeField& edge(EdgeOrientation o) const;

  /// Global numbering [vertex | edge x | edge y | edge xy].
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
};

P2Function allocate(Level level, const Fill& fill = Zeros{});

/// Infinity norm of a - b over all four sub-fields.
double max_abs_diff(const P2Function& a, const P2Function& b);
double max_abs_diff(const TriangleField& a, const TriangleField& b);

/// The four constant stencils that make up the P2 operator on one triangle.
struct P2Operator {
  std::array<double, 7> vtv{};
  std::array<double, 12> etv{};
  std::array<double, 12> vte{};
  std::array<double, 15> ete{};

  static P2Operator constant(double value);
  /// Weights in [-1, 1), deterministic per seed.
  static P2Operator pseudo_random(std::uint64_t seed);

  std::span<const double> weights(KernelId kernel) const;
  std::span<double> weights(KernelId kernel);

  friend bool operator==(const P2Operator&, const P2Operator&) = default;
};

/// Flat dump: magic "P2EF", u32 version 1, u32 level, u32 tag, u64 count,
/// count little-endian IEEE-754 doubles.
void write_field(std::ostream& out, const TriangleField& field);

/// Reads a dump written by write_field into a field of matching level/tag.
TriangleField read_field(std::istream& in);

}  // namespace p2ecm
