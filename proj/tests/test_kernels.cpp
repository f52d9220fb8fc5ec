#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "p2ecm/kernels.hpp"
#include "p2ecm/sparse.hpp"

using namespace p2ecm;

namespace {

bool bit_equal(const TriangleField& a, const TriangleField& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bit_equal(const P2Function& a, const P2Function& b) {
  return bit_equal(a.vertex, b.vertex) && bit_equal(a.edge_x, b.edge_x) &&
         bit_equal(a.edge_y, b.edge_y) && bit_equal(a.edge_xy, b.edge_xy);
}

// Entries written by `kernel` at `level`.
std::vector<std::pair<const TriangleField*, index_t>> written(KernelId kernel, const P2Function& f) {
  const auto spec = builtin_spec(kernel);
  auto& mut = const_cast<P2Function&>(f);
  const auto ops = kernel_operands(kernel, f, mut);
  std::vector<std::pair<const TriangleField*, index_t>> out;
  for (const auto& r : interior_domain(spec, f.level()).rows) {
    for (index_t x = r.x_begin; x < r.x_end; ++x) {
      for (auto* t : ops.targets) out.push_back({t, layout_index(t->layout(), x, r.y, f.level())});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("row sums") {
  const Level level(4);
  const auto op = P2Operator::constant(1.0);
  const P2Function src(level, Constant{1.0});
  const std::pair<KernelId, double> sums[] = {
      {KernelId::vtv, 7}, {KernelId::etv, 12}, {KernelId::vte, 4}, {KernelId::ete, 5}};
  for (const auto& [id, expected] : sums) {
    P2Function dst(level);
    apply_kernel(id, op, src, dst);
    for (const auto& [field, i] : written(id, dst)) CHECK((*field)[i] == expected);
  }
}

TEST_CASE("zero weights") {
  const Level level(4);
  const auto op = P2Operator::constant(0.0);
  const P2Function src(level, PseudoRandom{2});
  for (KernelId id : all_kernels) {
    P2Function dst(level, Constant{3.0});
    apply_kernel(id, op, src, dst);
    for (const auto& [field, i] : written(id, dst)) CHECK((*field)[i] == 0.0);
  }
}

TEST_CASE("entries outside the interior are untouched") {
  const Level level(4);
  const auto op = P2Operator::pseudo_random(1);
  const P2Function src(level, PseudoRandom{1});
  for (KernelId id : all_kernels) {
    P2Function dst(level, Constant{-7.0});
    apply_kernel(id, op, src, dst);
    std::size_t changed = 0;
    for (double v : dst.flatten()) changed += v != -7.0;
    CHECK(changed == written(id, dst).size());
  }
}

TEST_CASE("kernels equal the interpreter bit for bit") {
  for (int l = 0; l <= 6; ++l) {
    const Level level(l);
    const P2Function src(level, PseudoRandom{11});
    const auto op = P2Operator::pseudo_random(12);
    for (KernelId id : all_kernels) {
      for (UpdateMode mode : {UpdateMode::assign, UpdateMode::add}) {
        P2Function fast(level, PseudoRandom{13});
        P2Function slow(level, PseudoRandom{13});
        apply_kernel(id, op, src, fast, mode);
        auto o = kernel_operands(id, src, slow);
        reference_apply(builtin_spec(id), op.weights(id), o.sources, o.targets, mode);
        CAPTURE(to_string(id));
        CAPTURE(l);
        CHECK(bit_equal(fast, slow));
      }
    }
  }
}

TEST_CASE("apply_p2") {
  const Level level(5);
  {
    P2Function dst(level, Constant{1.0});
    apply_p2(P2Operator::constant(0.0), P2Function(level, PseudoRandom{1}), dst);
    const auto kinds = row_kinds(level);
    const auto flat = dst.flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      if (kinds[i] != RowKind::boundary) CHECK(flat[i] == 0.0);
    }
  }
  {
    P2Function dst(level);
    apply_p2(P2Operator::constant(1.0), P2Function(level, Constant{1.0}), dst);
    const auto kinds = row_kinds(level);
    const auto flat = dst.flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      if (kinds[i] == RowKind::vertex_interior) CHECK(flat[i] == 19.0);
      if (kinds[i] == RowKind::edge_interior) CHECK(flat[i] == 9.0);
    }
  }
}

TEST_CASE("fused sweep matches the four passes") {
  for (int l = 0; l <= 6; ++l) {
    const Level level(l);
    const P2Function src(level, PseudoRandom{4});
    const auto op = P2Operator::pseudo_random(5);
    P2Function a(level, PseudoRandom{6});
    P2Function b(level, PseudoRandom{6});
    apply_p2(op, src, a);
    apply_p2_fused(op, src, b);
    CAPTURE(l);
    CHECK(bit_equal(a, b));
  }
}

TEST_CASE("linearity") {
  const Level level(4);
  const auto op = P2Operator::pseudo_random(8);
  const P2Function u(level, PseudoRandom{1});
  const P2Function v(level, PseudoRandom{2});
  P2Function sum(level);
  const auto fu = u.flatten(), fv = v.flatten();
  std::vector<double> fs(fu.size());
  for (std::size_t i = 0; i < fs.size(); ++i) fs[i] = 2.0 * fu[i] + fv[i];
  sum.assign_flat(fs);
  P2Function au(level), av(level), as(level);
  apply_p2(op, u, au);
  apply_p2(op, v, av);
  apply_p2(op, sum, as);
  const auto a = au.flatten(), b = av.flatten(), c = as.flatten();
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(2.0 * a[i] + b[i]).epsilon(1e-12));
}

TEST_CASE("locality: a point source reaches only stencil neighbours") {
  const Level level(4);
  const auto spec = vtv_spec();
  std::array<double, 7> w{};
  w.fill(1.0);
  VertexField src(level), dst(level);
  src.set(5, 5, 1.0);
  apply_vtv(src, w, dst);
  for (index_t y = 0; y <= 16; ++y) {
    for (index_t x = 0; x <= 16 - y; ++x) {
      bool neighbour = false;
      for (const auto& a : spec.updates[0].terms) neighbour |= x + a.dx == 5 && y + a.dy == 5;
      CHECK(dst.get(x, y) == (neighbour ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("argument checks") {
  const Level level(3);
  VertexField v(level), v4(Level(4));
  std::array<double, 6> short_w{};
  std::array<double, 7> w{};
  CHECK_THROWS_AS(apply_vtv(v, short_w, v), SpecError);
  CHECK_THROWS_AS(apply_vtv(v4, w, v), ShapeError);
  CHECK_THROWS_AS(apply_vtv(v, w, v), ShapeError);

  EdgeField x(level, EdgeOrientation::x), y(level, EdgeOrientation::y), xy(level, EdgeOrientation::xy);
  std::array<double, 12> w12{};
  CHECK_THROWS_AS(apply_etv(y, x, xy, w12, v), ShapeError);
  CHECK_THROWS_AS(apply_vte(v, w, x, y, xy), SpecError);

  const auto spec = vtv_spec();
  std::vector<const TriangleField*> src{&v};
  std::vector<TriangleField*> dst{&v4};
  CHECK_THROWS_AS(reference_apply(spec, w, src, dst), ShapeError);
  CHECK_THROWS_AS(reference_apply(spec, short_w, src, dst), SpecError);
}

TEST_CASE("flop counts") {
  const std::pair<KernelId, FlopCount> expected[] = {
      {KernelId::vtv, {7, 6}}, {KernelId::etv, {12, 11}}, {KernelId::vte, {12, 9}}, {KernelId::ete, {15, 12}}};
  for (const auto& [id, f] : expected) {
    const auto got = flops_per_iteration(builtin_spec(id));
    CHECK(got.mults == f.mults);
    CHECK(got.adds == f.adds);
  }
  CHECK(interior_size(KernelId::vtv, Level(10)) == 522753);
}
