#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "p2ecm/kernels.hpp"
#include "p2ecm/sparse.hpp"

using namespace p2ecm;

TEST_CASE("coo to crs") {
  CooMatrix coo{3, {}};
  coo.add(2, 0, 1.0);
  coo.add(0, 1, 2.0);
  coo.add(0, 1, 3.0);
  coo.add(0, 0, 4.0);
  const auto m = CrsMatrix::from_coo(coo, IndexWidth::bits32);
  m.check_invariants();
  CHECK(m.nnz() == 3);
  CHECK(m.row_nnz(0) == 2);
  CHECK(m.row_nnz(1) == 0);
  CHECK(m.values()[1] == 5.0);
  CHECK_THROWS_AS(coo.add(3, 0, 1.0), IndexError);
  CHECK_THROWS_AS(coo.add(0, -1, 1.0), IndexError);

  const auto y = spmv(m, std::vector<double>{1.0, 1.0, 1.0});
  CHECK(y == std::vector<double>{9.0, 0.0, 1.0});
  CHECK_THROWS_AS(spmv(m, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("identity at level 0") {
  const auto a = assemble(P2Operator::pseudo_random(1), Level(0));
  CHECK(a.rows() == 6);
  CHECK(a.nnz() == 6);
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  CHECK(spmv(a, x) == x);
}

TEST_CASE("row structure") {
  const Level level(4);
  const auto a = assemble(P2Operator::pseudo_random(1), level);
  a.check_invariants();
  const auto kinds = row_kinds(level);
  int vi = 0, ei = 0;
  for (std::int64_t r = 0; r < a.rows(); ++r) {
    switch (kinds[static_cast<std::size_t>(r)]) {
      case RowKind::boundary: CHECK(a.row_nnz(r) == 1); break;
      case RowKind::vertex_interior: CHECK(a.row_nnz(r) == 19); ++vi; break;
      case RowKind::edge_interior: CHECK(a.row_nnz(r) == 9); ++ei; break;
      case RowKind::partial: break;
    }
  }
  CHECK(vi > 0);
  CHECK(ei > 0);
}

TEST_CASE("spmv equals apply_p2 on interior rows") {
  for (int l = 2; l <= 6; ++l) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Level level(l);
      const auto op = P2Operator::pseudo_random(seed);
      const auto a = assemble(op, level);
      const auto kinds = row_kinds(level);
      P2Function src(level, PseudoRandom{seed + 100});
      auto x = src.flatten();
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (kinds[i] == RowKind::boundary) x[i] = 0.0;
      }
      src.assign_flat(x);
      P2Function dst(level);
      apply_p2(op, src, dst);
      const auto mf = dst.flatten();
      const auto y = spmv(a, x);
      double diff = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (kinds[i] == RowKind::boundary) continue;
        diff = std::max(diff, std::abs(mf[i] - y[i]));
        scale = std::max(scale, std::abs(y[i]));
      }
      CAPTURE(l);
      CHECK(diff / scale <= 1e-13);
    }
  }
}

TEST_CASE("matrix market") {
  CooMatrix coo{2, {}};
  coo.add(1, 0, 0.5);
  std::ostringstream out;
  write_matrix_market(out, CrsMatrix::from_coo(coo, IndexWidth::bits32));
  CHECK(out.str() == "%%MatrixMarket matrix coordinate real general\n2 2 1\n2 1 0.5\n");
}

TEST_CASE("footprint") {
  const auto f = footprint_model(Level(10), 4);
  CHECK(f.dof_mem == 8 * 2100225);
  CHECK(f.crs_total == 331927800);
  CHECK(to_mb(f.matrix_free_total) == doctest::Approx(33.6).epsilon(0.003));
  CHECK(to_mb(f.hyteg_traffic_total) == doctest::Approx(67.2).epsilon(0.0015));
  const double r1 = static_cast<double>(f.crs_total) / static_cast<double>(f.matrix_free_total);
  const double r2 = static_cast<double>(f.crs_total) / static_cast<double>(f.hyteg_traffic_total);
  CHECK(std::abs(r1 - 9.9) <= 0.05);
  CHECK(std::abs(r2 - 4.9) <= 0.05);
  CHECK(footprint_model(Level(0), 4).dof_mem == 48);
  CHECK_THROWS_AS(footprint_model(Level(3), 2), DomainError);

  // Ratio falls towards 9.875 from above.
  double prev = 1e9;
  for (int l = 8; l <= 14; ++l) {
    const auto g = footprint_model(Level(l), 4);
    const double r = static_cast<double>(g.crs_total) / static_cast<double>(g.matrix_free_total);
    CHECK(r < prev);
    CHECK(r > 9.875);
    prev = r;
  }
}

TEST_CASE("index overflow") {
  CHECK(index_overflow_level(4, 2) == 13);
  CHECK(2 * nnz_estimate(Level(13)) == 3087695910ull);
  CHECK(2 * nnz_estimate(Level(12)) <= 2147483647ull);
  CHECK(index_overflow_level(4, 1) == 14);
  CHECK_FALSE(index_overflow_level(8, 2).has_value());
  CHECK_THROWS_AS(check_index_capacity(2147483648ull, IndexWidth::bits32), OverflowError);
  CHECK_NOTHROW(check_index_capacity(2147483647ull, IndexWidth::bits32));
}
