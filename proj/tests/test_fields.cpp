#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "p2ecm/fields.hpp"

using namespace p2ecm;

TEST_CASE("allocation sizes") {
  CHECK(allocate(Level(0)).vertex.size() == 3);
  CHECK(allocate(Level(0)).edge_x.size() == 1);
  CHECK(allocate(Level(10)).size() == 2100225);
}

TEST_CASE("fills") {
  const auto z = allocate(Level(3));
  for (double v : z.flatten()) CHECK(v == 0.0);

  const auto c = allocate(Level(3), Constant{2.5});
  for (double v : c.flatten()) CHECK(v == 2.5);

  const auto a = allocate(Level(5), PseudoRandom{42});
  const auto b = allocate(Level(5), PseudoRandom{42});
  CHECK(a.flatten() == b.flatten());
  const auto other = allocate(Level(5), PseudoRandom{43});
  CHECK(a.flatten() != other.flatten());
  // Orientations get independent streams.
  CHECK(std::vector<double>(a.edge_x.values().begin(), a.edge_x.values().end()) !=
        std::vector<double>(a.edge_y.values().begin(), a.edge_y.values().end()));
  for (double v : a.flatten()) {
    CHECK(v >= -1.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("checked access") {
  VertexField f(Level(3));
  f.set(2, 3, 1.5);
  CHECK(f.get(2, 3) == 1.5);
  CHECK(f[vertex_index(2, 3, Level(3))] == 1.5);
  CHECK_THROWS_AS(f.get(9, 0), IndexError);
  CHECK_THROWS_AS(f.set(0, 9, 1.0), IndexError);
  EdgeField e(Level(3), EdgeOrientation::xy);
  CHECK_THROWS_AS(e.get(8, 0), IndexError);
  CHECK(e.orientation() == EdgeOrientation::xy);
}

TEST_CASE("max_abs_diff") {
  const auto a = allocate(Level(3), PseudoRandom{1});
  CHECK(max_abs_diff(a, a) == 0.0);
  CHECK(max_abs_diff(allocate(Level(3)), allocate(Level(3), Constant{1.0})) == 1.0);
  CHECK_THROWS_AS(max_abs_diff(allocate(Level(3)), allocate(Level(4))), ShapeError);
}

TEST_CASE("flat round trip") {
  const auto a = allocate(Level(4), PseudoRandom{9});
  auto b = allocate(Level(4));
  b.assign_flat(a.flatten());
  CHECK(max_abs_diff(a, b) == 0.0);
  std::vector<double> shorter(a.size() - 1);
  CHECK_THROWS_AS(b.assign_flat(shorter), ShapeError);
  // Block order: vertex, x, y, xy.
  const auto flat = a.flatten();
  CHECK(flat[a.vertex.size()] == a.edge_x[0]);
  CHECK(flat[a.vertex.size() + 2 * a.edge_x.size()] == a.edge_xy[0]);
}

TEST_CASE("binary dump round trip") {
  const EdgeField e(Level(4), EdgeOrientation::y, PseudoRandom{5});
  std::stringstream buf;
  write_field(buf, e);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "P2EF");
  CHECK(bytes.size() == 4 + 4 + 4 + 4 + 8 + 8 * e.size());
  const auto back = read_field(buf);
  CHECK(back.tag() == FieldTag::edge_y);
  CHECK(max_abs_diff(back, e) == 0.0);

  std::stringstream bad("XXXX");
  CHECK_THROWS_AS(read_field(bad), IoError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_field(truncated), IoError);
}

TEST_CASE("operator weights") {
  const auto op = P2Operator::constant(1.0);
  CHECK(op.weights(KernelId::vtv).size() == 7);
  CHECK(op.weights(KernelId::etv).size() == 12);
  CHECK(op.weights(KernelId::vte).size() == 12);
  CHECK(op.weights(KernelId::ete).size() == 15);
  CHECK(P2Operator::pseudo_random(3) == P2Operator::pseudo_random(3));
  CHECK_FALSE(P2Operator::pseudo_random(3) == P2Operator::pseudo_random(4));
}
