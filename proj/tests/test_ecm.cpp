#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "p2ecm/ecm.hpp"

using namespace p2ecm;

namespace {

struct Replayed {
  int fresh = 0, l1 = 0, pink = 0;
  std::vector<int> reuse_rows;
};

// Replays the access trace of `spec` on an 8x8 coordinate map (y outer,
// x inner) and classifies each distinct offset read at iteration (4, 4) by
// the most recent earlier touch of the same element.
std::map<int, Replayed> replay(const StencilAccessSpec& spec) {
  std::map<std::tuple<int, int, int>, std::pair<int, int>> last;  // (array, x, y) -> iteration
  std::map<int, Replayed> out;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      if (x == 4 && y == 4) {
        std::set<std::tuple<int, int, int>> seen;
        for (const auto& u : spec.updates) {
          for (const auto& a : u.terms) {
            if (!seen.insert({a.source, a.dx, a.dy}).second) continue;
            auto& r = out[a.source];
            const auto it = last.find({a.source, x + a.dx, y + a.dy});
            if (it == last.end()) {
              ++r.fresh;
            } else if (it->second.second == y) {
              ++r.l1;
            } else {
              ++r.pink;
              r.reuse_rows.push_back(y - it->second.second);
            }
          }
        }
        return out;
      }
      for (const auto& u : spec.updates) {
        for (const auto& a : u.terms) last[{a.source, x + a.dx, y + a.dy}] = {x, y};
      }
    }
  }
  return out;
}

EcmPrediction reference_prediction(KernelId id, int level) {
  const auto state = LcFixture::skylake_reference().lookup(id, level);
  REQUIRE(state.has_value());
  return predict(core_model(id), classify_accesses(builtin_spec(id)), *state, skylake_8174());
}

}  // namespace

TEST_CASE("classification counts") {
  struct Expect {
    KernelId id;
    int fresh, l1, pink;
  };
  for (const auto& e : {Expect{KernelId::vtv, 1, 4, 2}, Expect{KernelId::etv, 3, 5, 4},
                        Expect{KernelId::vte, 1, 3, 2}, Expect{KernelId::ete, 3, 3, 3}}) {
    const auto c = classify_accesses(builtin_spec(e.id));
    CHECK(c.new_total() == e.fresh);
    CHECK(c.l1_total() == e.l1);
    CHECK(c.lc_total() == e.pink);
  }
  const auto etv = classify_accesses(etv_spec());
  CHECK(etv.arrays[0].lc_dependent.size() == 2);
  CHECK(etv.row_span_total() + etv.store_streams == 8);
  CHECK(classify_accesses(vtv_spec()).row_span_total() == 3);
  CHECK(classify_accesses(vte_spec()).row_span_total() + 3 == 6);
  CHECK(classify_accesses(ete_spec()).row_span_total() + 3 == 9);
}

TEST_CASE("classification equals trace replay") {
  for (KernelId id : all_kernels) {
    const auto spec = builtin_spec(id);
    const auto c = classify_accesses(spec);
    const auto r = replay(spec);
    for (const auto& a : c.arrays) {
      CAPTURE(to_string(id));
      CAPTURE(a.name);
      const auto& o = r.at(a.source);
      CHECK(a.new_count == o.fresh);
      CHECK(a.l1_count == o.l1);
      REQUIRE(a.lc_dependent.size() == o.reuse_rows.size());
      std::vector<int> rows;
      for (const auto& p : a.lc_dependent) rows.push_back(p.reuse_rows);
      std::sort(rows.begin(), rows.end());
      auto expected = o.reuse_rows;
      std::sort(expected.begin(), expected.end());
      CHECK(rows == expected);
    }
  }
}

TEST_CASE("core model") {
  const auto m = skylake_8174();
  const auto vtv = core_model(KernelId::vtv);
  CHECK(vtv.loads_per_iteration == 7);
  CHECK(vtv.stores_per_iteration == 1);
  CHECK(*vtv.t_ol_fixture == 10.0);
  const auto t = theoretical_core_cycles(vtv, m);
  CHECK(t.t_ol == 7.0);   // 14 FMAs over 2 ports
  CHECK(t.t_nol == 7.0);  // 14 loads over 2 ports
  CHECK(*core_model(KernelId::vte).t_ol_fixture == 14.8);
  CHECK(*core_model(KernelId::ete).t_nol_fixture == 10.0);
}

TEST_CASE("layer conditions and homes") {
  const auto m = skylake_8174();
  const auto vtv = classify_accesses(vtv_spec());
  CHECK(layer_condition(vtv, Level(10), m.l1_bytes));
  CHECK_FALSE(layer_condition(vtv, Level(11), m.l1_bytes));
  CHECK(dataset_home(vtv_spec(), Level(0), m) == CacheLevel::L2);
  CHECK(dataset_home(vtv_spec(), Level(10), m) == CacheLevel::L3);
  CHECK(dataset_home(vtv_spec(), Level(11), m) == CacheLevel::L3);  // 33.6 MB fits 33 MiB
  CHECK(dataset_home(vtv_spec(), Level(12), m) == CacheLevel::MEM);
  CHECK(working_set_bytes(vtv_spec(), Level(11)) == 2 * 8 * dof_counts(Level(11)).vertices);
}

TEST_CASE("reference decompositions") {
  struct Row {
    KernelId id;
    int level;
    std::string terms;
    double cycles, gflops;
  };
  const Row rows[] = {
      {KernelId::vtv, 10, "{10 || 8 | 3 | 8 | -}", 19, 14.78},
      {KernelId::vtv, 12, "{10 || 8 | 5 | 8 | 5}", 26, 10.8},
      {KernelId::etv, 7, "{24 || 12 | 5 | 16 | -}", 33, 15.05},
      {KernelId::etv, 9, "{24 || 12 | 9 | 16 | -}", 37, 13.43},
      {KernelId::etv, 12, "{24 || 12 | 9 | 24 | 8}", 53, 9.37},
      {KernelId::vte, 8, "{14.8 || 12 | 7 | 16 | -}", 35, 12.96},
      {KernelId::vte, 10, "{14.8 || 12 | 9 | 24 | -}", 45, 10.08},
      {KernelId::vte, 13, "{14.8 || 12 | 9 | 24 | 11.6}", 56.6, 8.01},
      {KernelId::ete, 7, "{20 || 10 | 9 | 24 | -}", 43, 13.56},
      {KernelId::ete, 12, "{20 || 10 | 12 | 24 | 15}", 61, 9.56},
  };
  for (const auto& r : rows) {
    const auto p = reference_prediction(r.id, r.level);
    CAPTURE(to_string(r.id));
    CAPTURE(r.level);
    CHECK(format_terms(p) == r.terms);
    CHECK(p.predicted_cycles == doctest::Approx(r.cycles));
    CHECK(p.predicted_gflops == doctest::Approx(r.gflops).epsilon(0.001));
  }
  const auto vtv = reference_prediction(KernelId::vtv, 10);
  CHECK(format_cumulative(vtv) == "{10 ] 11 ] 19 ] -}");
  CHECK(vtv.flops_per_work_unit == 104);
  CHECK(reference_prediction(KernelId::ete, 8).flops_per_work_unit == 216);
}

TEST_CASE("exact bandwidth mode") {
  const auto c = classify_accesses(vtv_spec());
  LcState s;
  s.l1_pink_hits = false;
  s.dataset_home = CacheLevel::MEM;
  const auto t = traffic(c, s, skylake_8174(), BandwidthMode::exact);
  CHECK(t.t_l3mem == doctest::Approx(2 * 64 * 2.7 / 70));
}

TEST_CASE("cumulative is monotone and capped below by T_OL") {
  const auto m = skylake_8174();
  for (KernelId id : all_kernels) {
    const auto spec = builtin_spec(id);
    const auto c = classify_accesses(spec);
    for (int l = 0; l <= 16; ++l) {
      const auto p = predict(core_model(id), c, lc_state_by_policy(spec, c, Level(l), m), m);
      for (std::size_t i = 1; i < 4; ++i) CHECK(p.cumulative[i] >= p.cumulative[i - 1]);
      CHECK(p.cumulative[0] >= p.t_ol);
      CHECK(p.predicted_gflops <= m.peak_gflops());
    }
  }
}

TEST_CASE("lc fixture parsing") {
  const auto f = LcFixture::load(P2ECM_DATA_DIR "/skylake_8174_lc.txt");
  CHECK(f.entries().size() == LcFixture::skylake_reference().entries().size());
  for (KernelId id : all_kernels) {
    for (int l = 7; l <= 14; ++l) CHECK(f.lookup(id, l) == LcFixture::skylake_reference().lookup(id, l));
  }
  CHECK_FALSE(f.lookup(KernelId::vtv, 3).has_value());
  CHECK(*f.lookup(KernelId::etv, 12)->l2_pink_miss_override == 2);

  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      LcFixture::parse(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("vtv 7-10 l1=hit home=L3\n") == -1);
  CHECK(line_of("\nvtv 7-10 l1=maybe home=L3\n") == 2);
  CHECK(line_of("xyz 7-10 home=L3\n") == 1);
  CHECK(line_of("vtv 10-7 home=L3\n") == 1);
  CHECK(line_of("vtv 7-10 l1=hit\n") == 1);
  CHECK(line_of("vtv 7-10 home=L9\n") == 1);
  CHECK(line_of("vtv 7-10 foo=1 home=L3\n") == 1);
}

TEST_CASE("scaling model") {
  const auto m = skylake_8174();
  const auto mem = reference_prediction(KernelId::vtv, 12);
  const auto s = predict_scaling(mem, m, 48);
  REQUIRE(s.saturation_cores.has_value());
  CHECK(*s.saturation_cores == 6);  // ceil(26 / 5)
  CHECK(s.aggregate_gflops[0] == doctest::Approx(mem.predicted_gflops));
  CHECK(s.aggregate_gflops[5] == doctest::Approx(6 * mem.predicted_gflops));
  CHECK(s.aggregate_gflops[23] == doctest::Approx(6 * mem.predicted_gflops));
  CHECK(s.aggregate_gflops[24] == doctest::Approx(7 * mem.predicted_gflops));
  CHECK(s.aggregate_gflops[47] == doctest::Approx(12 * mem.predicted_gflops));
  for (std::size_t i = 1; i < s.aggregate_gflops.size(); ++i) {
    CHECK(s.aggregate_gflops[i] >= s.aggregate_gflops[i - 1]);
  }

  const auto cache = reference_prediction(KernelId::vtv, 10);
  const auto lin = predict_scaling(cache, m, 48);
  CHECK_FALSE(lin.saturation_cores.has_value());
  CHECK(lin.aggregate_gflops[47] == doctest::Approx(48 * cache.predicted_gflops));
  CHECK_THROWS_AS(predict_scaling(cache, m, 49), DomainError);
  CHECK_THROWS_AS(predict_scaling(cache, m, 0), DomainError);
}
