#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "p2ecm/harness.hpp"

using namespace p2ecm;

TEST_CASE("argument parsing") {
  const auto r = parse_level_range("7..14");
  CHECK(r.lo == 7);
  CHECK(r.hi == 14);
  CHECK(r.levels().size() == 8);
  CHECK(parse_level_range("3").levels().size() == 1);
  CHECK_THROWS_AS(parse_level_range("9..x"), Error);
  CHECK_THROWS_AS(parse_level_range("9..7"), Error);
  CHECK_THROWS_AS(parse_level_range("0..21"), InvalidLevel);

  CHECK(parse_kernel_list("all").size() == 4);
  CHECK(parse_kernel_list("vtv,ete") == std::vector<KernelId>{KernelId::vtv, KernelId::ete});
  CHECK_THROWS_AS(parse_kernel_list("vtv,,ete"), SpecError);
  CHECK_THROWS_AS(parse_kernel_list("foo"), SpecError);
}

TEST_CASE("verify") {
  VerifyOptions o;
  o.max_level = 4;
  const auto ok = cmd_verify(o);
  CHECK(ok.passed());
  CHECK(ok.suites() == std::vector<std::string>{"kernels", "sparse", "classification", "footprint"});

  o.perturb_weights = true;
  const auto bad = cmd_verify(o);
  CHECK_FALSE(bad.passed());
  for (const auto& c : bad.cases) CHECK(c.passed == (c.suite != "sparse"));

  std::ostringstream out;
  print_report(out, bad);
  CHECK(out.str().find("[FAIL] sparse/") != std::string::npos);

  o.max_level = 7;
  CHECK_THROWS_AS(cmd_verify(o), DomainError);
}

TEST_CASE("predict csv") {
  const auto fixture = LcFixture::skylake_reference();
  const KernelId kernels[] = {KernelId::vtv, KernelId::vte, KernelId::ete};
  const auto rows = cmd_predict(skylake_8174(), kernels, {7, 14}, &fixture);
  CHECK(rows.size() == 24);
  std::ostringstream out;
  write_predict_csv(out, rows);
  const auto csv = out.str();
  CHECK(csv.rfind("kernel,level,lc_state,t_ol,t_nol,t_l1l2,t_l2l3,t_l3mem,pred_cycles,pred_gflops\n", 0) == 0);
  CHECK(csv.find("vtv,10,L1/L3,10,8,3,8,-,19,14.7789\n") != std::string::npos);
  CHECK(csv.find("vte,12,L3/MEM,14.8,12,9,24,11.6,56.6,8.0141\n") != std::string::npos);
  CHECK(csv.find("ete,7,L1/L3,20,10,9,24,-,43,") != std::string::npos);

  // Without a fixture the policy decides; nothing is pinned.
  const auto policy = cmd_predict(skylake_8174(), kernels, {3, 3});
  for (const auto& r : policy) CHECK_FALSE(r.pinned);
}

TEST_CASE("reference comparison reports the printed inconsistencies") {
  const auto lines = compare_with_reference(skylake_8174());
  CHECK(lines.size() == skylake_reference_rows().size());
  CHECK(lines.front().find("matches") != std::string::npos);
  bool ete_flagged = false;
  for (const auto& l : lines) {
    if (l.rfind("ete 7-8", 0) == 0) ete_flagged = l.find("GFLOP/s printed 11.5") != std::string::npos;
  }
  CHECK(ete_flagged);
}

TEST_CASE("memory csv") {
  const auto rows = cmd_memory({0, 10});
  std::ostringstream out;
  write_memory_csv(out, rows);
  const auto csv = out.str();
  CHECK(csv.find("\n0,") != std::string::npos);
  CHECK(csv.find("\n10,331927800,") != std::string::npos);
  CHECK(rows[0].crs32.dof_mem == 48);
  CHECK(rows[10].crs64.crs_total > rows[10].crs32.crs_total);
  CHECK_THROWS_AS(cmd_memory({0, 1}, 2), DomainError);
}

TEST_CASE("codegen command") {
  const std::string path = "test_harness_vtv.c";
  const auto k = cmd_codegen(KernelId::vtv, Level(10), path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == k.source_text);
  CHECK(plan_summary(k).find("7 hoisted weights") != std::string::npos);
  std::remove(path.c_str());
  CHECK_THROWS_AS(cmd_codegen(KernelId::vtv, Level(3), "/nonexistent/dir/out.c"), IoError);
}

TEST_CASE("bench and scale sanity") {
  BenchOptions o;
  o.min_seconds = 0.02;
  o.windows = 2;
  const auto m = skylake_8174();
  const auto r = bench_kernel(KernelId::vtv, Level(6), 14.78, o);
  CHECK(r.wall_seconds >= o.min_seconds);
  CHECK(r.achieved_gflops > 0.0);
  CHECK(r.achieved_gflops <= m.peak_gflops() * 2.0);  // host may clock above 2.7 GHz
  CHECK(r.iterations_done == interior_size(KernelId::vtv, Level(6)) * r.repetitions);

  std::ostringstream out;
  write_bench_csv(out, std::vector<BenchResult>{r});
  CHECK(out.str().rfind("kernel,level,repetitions,wall_seconds,iterations_done,achieved_gflops,predicted_gflops,ratio\n", 0) == 0);

  const auto s = cmd_scale(m, KernelId::vtv, Level(6), 1, nullptr, o);
  REQUIRE(s.size() == 1);
  CHECK(s[0].aggregate_gflops > 0.0);
  CHECK(s[0].per_thread_gflops == s[0].aggregate_gflops);
  CHECK_THROWS_AS(cmd_scale(m, KernelId::vtv, Level(6), 0, nullptr, o), DomainError);
}
