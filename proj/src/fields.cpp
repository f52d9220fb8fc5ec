#include "p2ecm/fields.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

namespace p2ecm {

std::string to_string(EdgeOrientation o) {
  switch (o) {
    case EdgeOrientation::x: return "x";
    case EdgeOrientation::y: return "y";
    case EdgeOrientation::xy: return "xy";
  }
  return "?";
}

FieldTag edge_tag(EdgeOrientation o) {
  switch (o) {
    case EdgeOrientation::x: return FieldTag::edge_x;
    case EdgeOrientation::y: return FieldTag::edge_y;
    case EdgeOrientation::xy: return FieldTag::edge_xy;
  }
  return FieldTag::edge_x;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Layout layout_of(FieldTag tag) { return tag == FieldTag::vertex ? Layout::vertex : Layout::edge; }

}  // namespace

void fill_pseudo_random(std::span<double> values, std::uint64_t seed, Level level, FieldTag tag) {
  const std::uint64_t stream =
      (static_cast<std::uint64_t>(level.value()) << 8) | static_cast<std::uint64_t>(tag);
  std::mt19937_64 gen(splitmix64(seed ^ splitmix64(stream)));
  for (auto& v : values) {
    v = static_cast<double>(gen() >> 11) * 0x1.0p-52 - 1.0;
  }
}

TriangleField::TriangleField(Level level, Layout layout, FieldTag tag, const Fill& fill)
    : level_(level), layout_(layout), tag_(tag) {
  values_.resize(static_cast<std::size_t>(layout_size(layout, level)));
  this->fill(fill);
}

void TriangleField::fill(const Fill& f) {
  std::visit(
      [this](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Zeros>) {
          std::fill(values_.begin(), values_.end(), 0.0);
        } else if constexpr (std::is_same_v<T, Constant>) {
          std::fill(values_.begin(), values_.end(), v.value);
        } else {
          fill_pseudo_random(values_, v.seed, level_, tag_);
        }
      },
      f);
}

double TriangleField::get(index_t x, index_t y) const {
  return values_[static_cast<std::size_t>(layout_index(layout_, x, y, level_))];
}

void TriangleField::set(index_t x, index_t y, double value) {
  values_[static_cast<std::size_t>(layout_index(layout_, x, y, level_))] = value;
}

P2Function::P2Function(Level level, const Fill& fill)
    : vertex(level, fill),
      edge_x(level, EdgeOrientation::x, fill),
      edge_y(level, EdgeOrientation::y, fill),
      edge_xy(level, EdgeOrientation::xy, fill) {}

std::size_t P2Function::size() const noexcept {
  return vertex.size() + edge_x.size() + edge_y.size() + edge_xy.size();
}

EdgeField& P2Function::edge(EdgeOrientation o) {
  switch (o) {
    case EdgeOrientation::x: return edge_x;
    case EdgeOrientation::y: return edge_y;
    case EdgeOrientation::xy: return edge_xy;
  }
  return edge_x;
}

const EdgeField& P2Function::edge(EdgeOrientation o) const {
  return const_cast<P2Function*>(this)->edge(o);
}

std::vector<double> P2Function::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  for (const TriangleField* f : {static_cast<const TriangleField*>(&vertex),
                                 static_cast<const TriangleField*>(&edge_x),
                                 static_cast<const TriangleField*>(&edge_y),
                                 static_cast<const TriangleField*>(&edge_xy)}) {
    flat.insert(flat.end(), f->values().begin(), f->values().end());
  }
  return flat;
}

void P2Function::assign_flat(std::span<const double> flat) {
  if (flat.size() != size()) {
    throw ShapeError("flat vector of length " + std::to_string(flat.size()) +
                     " does not match P2 function of length " + std::to_string(size()));
  }
  auto it = flat.begin();
  for (TriangleField* f : {static_cast<TriangleField*>(&vertex),
                           static_cast<TriangleField*>(&edge_x),
                           static_cast<TriangleField*>(&edge_y),
                           static_cast<TriangleField*>(&edge_xy)}) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(f->size()), f->values().begin());
    it += static_cast<std::ptrdiff_t>(f->size());
  }
}

P2Function allocate(Level level, const Fill& fill) { return P2Function(level, fill); }

double max_abs_diff(const TriangleField& a, const TriangleField& b) {
  if (a.level() != b.level() || a.layout() != b.layout()) {
    throw ShapeError("max_abs_diff: fields differ in level or layout");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  }
  return m;
}

double max_abs_diff(const P2Function& a, const P2Function& b) {
  if (a.level() != b.level()) {
    throw ShapeError("max_abs_diff: level " + std::to_string(a.level().value()) + " vs " +
                     std::to_string(b.level().value()));
  }
  double m = max_abs_diff(a.vertex, b.vertex);
  for (auto o : all_orientations) m = std::max(m, max_abs_diff(a.edge(o), b.edge(o)));
  return m;
}

P2Operator P2Operator::constant(double value) {
  P2Operator op;
  op.vtv.fill(value);
  op.etv.fill(value);
  op.vte.fill(value);
  op.ete.fill(value);
  return op;
}

P2Operator P2Operator::pseudo_random(std::uint64_t seed) {
  P2Operator op;
  std::mt19937_64 gen(splitmix64(seed ^ 0x5354454e43494cULL));
  auto draw = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-52 - 1.0; };
  for (auto& w : op.vtv) w = draw();
  for (auto& w : op.etv) w = draw();
  for (auto& w : op.vte) w = draw();
  for (auto& w : op.ete) w = draw();
  return op;
}

std::span<double> P2Operator::weights(KernelId kernel) {
  switch (kernel) {
    case KernelId::vtv: return vtv;
    case KernelId::etv: return etv;
    case KernelId::vte: return vte;
    case KernelId::ete: return ete;
  }
  return {};
}

std::span<const double> P2Operator::weights(KernelId kernel) const {
  return const_cast<P2Operator*>(this)->weights(kernel);
}

namespace {

constexpr char kMagic[4] = {'P', '2', 'E', 'F'};

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError("truncated field dump");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_field(std::ostream& out, const TriangleField& field) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(field.level().value()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(field.tag()));
  put_le<std::uint64_t>(out, field.size());
  for (double v : field.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw IoError("failed to write field dump");
}

TriangleField read_field(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not a field dump (bad magic)");
  }
  if (get_le<std::uint32_t>(in) != 1) throw IoError("unsupported field dump version");
  const Level level(static_cast<int>(get_le<std::uint32_t>(in)));
  const auto raw_tag = get_le<std::uint32_t>(in);
  if (raw_tag > 3) throw IoError("unknown field tag " + std::to_string(raw_tag));
  const auto tag = static_cast<FieldTag>(raw_tag);
  TriangleField field(level, layout_of(tag), tag);
  if (get_le<std::uint64_t>(in) != field.size()) {
    throw ShapeError("field dump length does not match its level");
  }
  for (auto& v : field.values()) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
  return field;
}

}  // namespace p2ecm
