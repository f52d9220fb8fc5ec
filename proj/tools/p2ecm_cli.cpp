#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "p2ecm/harness.hpp"

using namespace p2ecm;

namespace {

struct Common {
  std::string machine;
  std::string levels;
  std::string kernels = "all";
  std::string csv;
  std::string lc_fixture;
  std::uint64_t seed = 1;
};

MachineModel machine_of(const Common& c) {
  return c.machine.empty() ? skylake_8174() : load_machine(c.machine);
}

std::optional<LcFixture> fixture_of(const Common& c) {
  if (c.lc_fixture.empty()) return std::nullopt;
  return LcFixture::load(c.lc_fixture);
}

// Writes to --csv when given, stdout otherwise.
template <class Fn>
void emit(const Common& c, Fn&& write) {
  if (c.csv.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(c.csv);
  if (!out) throw IoError("cannot open '" + c.csv + "' for writing");
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-free P2 stencil kernels, CRS oracle and ECM performance model"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* sub, Common& c, const std::string& default_levels) {
    sub->add_option("--machine", c.machine, "Machine description file (default: built-in Skylake-SP 8174)");
    if (!default_levels.empty()) {
      c.levels = default_levels;
      sub->add_option("--levels", c.levels, "Level range a..b")->capture_default_str();
      sub->add_option("--kernels", c.kernels, "Comma separated kernels or 'all'")->capture_default_str();
    }
    sub->add_option("--csv", c.csv, "Write CSV here instead of stdout");
    sub->add_option("--seed", c.seed, "Seed for fields and weights")->capture_default_str();
    sub->add_option("--lc-fixture", c.lc_fixture, "Pin cache states per kernel and level range");
  };

  auto* verify = app.add_subcommand("verify", "Hermetic correctness suites");
  Common cv, cp, cb, cs, cm;
  int max_level = 6;
  bool inject = false;
  verify->add_option("--max-level", max_level, "Highest level checked (2..6)")->capture_default_str();
  verify->add_option("--seed", cv.seed, "Seed for fields and weights")->capture_default_str();
  verify->add_flag("--inject-fault", inject, "Perturb the weights used by the CRS oracle");

  auto* predict = app.add_subcommand("predict", "ECM predictions as CSV");
  bool compare = false, theoretical = false;
  add_common(predict, cp, "7..14");
  predict->add_flag("--compare", compare, "Also report against the printed Skylake reference rows");
  predict->add_flag("--theoretical-core", theoretical, "Derive T_OL/T_nOL from port throughput");

  auto* bench = app.add_subcommand("bench", "Time kernels against their prediction");
  double min_seconds = 0.2;
  add_common(bench, cb, "7..10");
  bench->add_option("--min-seconds", min_seconds, "Shortest timed window")->capture_default_str();

  auto* scale = app.add_subcommand("scale", "Weak scaling, one triangle per thread");
  std::string kernel = "vtv";
  int level = 10;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  add_common(scale, cs, "");
  scale->add_option("--kernel", kernel)->capture_default_str();
  scale->add_option("--level", level)->capture_default_str();
  scale->add_option("--threads", threads, "Largest thread count")->capture_default_str();

  auto* memory = app.add_subcommand("memory", "Footprint of CRS vs matrix-free per level");
  int index_bytes = 4;
  memory->add_option("--levels", cm.levels, "Level range a..b")->default_val("0..14");
  memory->add_option("--index-bytes", index_bytes, "4 or 8")->capture_default_str();
  memory->add_option("--csv", cm.csv, "Write CSV here instead of stdout");

  auto* codegen = app.add_subcommand("codegen", "Emit the loop nest of a kernel");
  std::string out_path;
  codegen->add_option("--kernel", kernel)->capture_default_str();
  codegen->add_option("--level", level)->capture_default_str();
  codegen->add_option("-o,--out", out_path, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*verify) {
      VerifyOptions o;
      o.max_level = max_level;
      o.seed = cv.seed;
      o.perturb_weights = inject;
      const auto report = cmd_verify(o);
      print_report(std::cout, report);
      return report.passed() ? 0 : 1;
    }
    if (*predict) {
      const auto m = machine_of(cp);
      const auto fixture = fixture_of(cp);
      const auto kernels = parse_kernel_list(cp.kernels);
      PredictOptions o;
      if (theoretical) o.core = CoreSource::theoretical;
      const auto rows = cmd_predict(m, kernels, parse_level_range(cp.levels),
                                    fixture ? &*fixture : nullptr, o);
      emit(cp, [&](std::ostream& out) { write_predict_csv(out, rows); });
      if (compare) {
        for (const auto& line : compare_with_reference(m)) std::cerr << line << '\n';
      }
      return 0;
    }
    if (*bench) {
      const auto m = machine_of(cb);
      const auto fixture = fixture_of(cb);
      BenchOptions o;
      o.seed = cb.seed;
      o.min_seconds = min_seconds;
      const auto rows = cmd_bench(m, parse_kernel_list(cb.kernels), parse_level_range(cb.levels),
                                  fixture ? &*fixture : nullptr, o);
      emit(cb, [&](std::ostream& out) { write_bench_csv(out, rows); });
      return 0;
    }
    if (*scale) {
      const auto m = machine_of(cs);
      const auto fixture = fixture_of(cs);
      BenchOptions o;
      o.seed = cs.seed;
      const auto rows = cmd_scale(m, parse_kernel(kernel), Level(level), threads,
                                  fixture ? &*fixture : nullptr, o);
      emit(cs, [&](std::ostream& out) { write_scale_csv(out, rows); });
      return 0;
    }
    if (*memory) {
      const auto rows = cmd_memory(parse_level_range(cm.levels), index_bytes);
      emit(cm, [&](std::ostream& out) { write_memory_csv(out, rows); });
      return 0;
    }
    if (*codegen) {
      const auto k = cmd_codegen(parse_kernel(kernel), Level(level), out_path);
      std::cout << plan_summary(k) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
