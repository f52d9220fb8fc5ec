#include "p2ecm/harness.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>

namespace p2ecm {

std::vector<Level> LevelRange::levels() const {
  std::vector<Level> out;
  for (int l = lo; l <= hi; ++l) out.emplace_back(l);
  return out;
}

LevelRange parse_level_range(const std::string& text) {
  LevelRange r;
  try {
    const auto dots = text.find("..");
    std::size_t pos = 0;
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(text, &pos);
      if (pos != text.size()) throw Error("");
    } else {
      const auto a = text.substr(0, dots);
      const auto b = text.substr(dots + 2);
      r.lo = std::stoi(a, &pos);
      if (pos != a.size()) throw Error("");
      r.hi = std::stoi(b, &pos);
      if (pos != b.size()) throw Error("");
    }
  } catch (const std::exception&) {
    throw Error("level range must look like 'a..b', got '" + text + "'");
  }
  if (r.lo > r.hi) throw Error("empty level range '" + text + "'");
  Level(r.lo);
  Level(r.hi);
  return r;
}

std::vector<KernelId> parse_kernel_list(const std::string& text) {
  if (text == "all") return {std::begin(all_kernels), std::end(all_kernels)};
  std::vector<KernelId> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (item.empty()) throw SpecError("empty kernel name in '" + text + "'");
    out.push_back(parse_kernel(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify

bool VerifyReport::passed() const {
  return std::all_of(cases.begin(), cases.end(), [](const VerifyCase& c) { return c.passed; });
}

std::vector<std::string> VerifyReport::suites() const {
  std::vector<std::string> out;
  for (const auto& c : cases) {
    if (std::find(out.begin(), out.end(), c.suite) == out.end()) out.push_back(c.suite);
  }
  return out;
}

namespace {

bool bit_equal(const TriangleField& a, const TriangleField& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bit_equal(const P2Function& a, const P2Function& b) {
  return bit_equal(a.vertex, b.vertex) && bit_equal(a.edge_x, b.edge_x) &&
         bit_equal(a.edge_y, b.edge_y) && bit_equal(a.edge_xy, b.edge_xy);
}

void verify_kernels(VerifyReport& report, const VerifyOptions& o) {
  for (int l = 2; l <= o.max_level; ++l) {
    const Level level(l);
    const P2Function src(level, PseudoRandom{o.seed});
    const auto op = P2Operator::pseudo_random(o.seed);
    for (KernelId id : all_kernels) {
      const auto spec = builtin_spec(id);
      const auto plan = generate(spec, {}, level, UpdateMode::add);
      for (UpdateMode mode : {UpdateMode::assign, UpdateMode::add}) {
        P2Function fast(level, PseudoRandom{o.seed + 1});
        P2Function slow(level, PseudoRandom{o.seed + 1});
        P2Function planned(level, PseudoRandom{o.seed + 1});
        apply_kernel(id, op, src, fast, mode);
        auto so = kernel_operands(id, src, slow);
        reference_apply(spec, op.weights(id), so.sources, so.targets, mode);
        auto po = kernel_operands(id, src, planned);
        const auto g = mode == UpdateMode::add ? plan : generate(spec, {}, level, mode);
        execute_plan(g, op.weights(id), po.sources, po.targets);
        const bool ok = bit_equal(fast, slow) && bit_equal(slow, planned);
        report.cases.push_back(
            {"kernels",
             fmt::format("{} l={} {}", to_string(id), l, mode == UpdateMode::add ? "add" : "assign"),
             ok,
             ok ? "kernel, interpreter and plan bit-identical"
                : fmt::format("max |kernel - interpreter| = {:.3e}, max |plan - interpreter| = {:.3e}",
                              max_abs_diff(fast, slow), max_abs_diff(planned, slow))});
      }
    }
  }
}

void verify_sparse(VerifyReport& report, const VerifyOptions& o) {
  for (int l = 2; l <= o.max_level; ++l) {
    const Level level(l);
    const auto op = P2Operator::pseudo_random(o.seed);
    auto assembled_op = op;
    if (o.perturb_weights) assembled_op.vtv[3] += 1e-3 * (1.0 + std::abs(op.vtv[3]));
    const auto a = assemble(assembled_op, level);
    const auto kinds = row_kinds(level);

    P2Function src(level, PseudoRandom{o.seed});
    auto flat = src.flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      if (kinds[i] == RowKind::boundary) flat[i] = 0.0;
    }
    src.assign_flat(flat);
    P2Function dst(level);
    apply_p2(op, src, dst);
    const auto mf = dst.flatten();
    const auto crs = spmv(a, flat);

    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < mf.size(); ++i) {
      if (kinds[i] == RowKind::boundary) continue;
      diff = std::max(diff, std::abs(mf[i] - crs[i]));
      scale = std::max(scale, std::abs(crs[i]));
    }
    const double rel = scale > 0.0 ? diff / scale : diff;
    const bool ok = rel <= 1e-13;
    report.cases.push_back({"sparse", fmt::format("spmv vs apply_p2 l={}", l), ok,
                            fmt::format("relative difference {:.3e} (limit 1e-13)", rel)});
  }
}

struct ClassCounts {
  int fresh, l1, pink;
};

void verify_classification(VerifyReport& report) {
  const std::pair<KernelId, ClassCounts> expected[] = {{KernelId::vtv, {1, 4, 2}},
                                                       {KernelId::etv, {3, 5, 4}},
                                                       {KernelId::vte, {1, 3, 2}},
                                                       {KernelId::ete, {3, 3, 3}}};
  for (const auto& [id, e] : expected) {
    const auto c = classify_accesses(builtin_spec(id));
    const bool ok = c.new_total() == e.fresh && c.l1_total() == e.l1 && c.lc_total() == e.pink;
    report.cases.push_back({"classification", to_string(id), ok,
                            fmt::format("(new, l1, lc) = ({}, {}, {}), expected ({}, {}, {})",
                                        c.new_total(), c.l1_total(), c.lc_total(), e.fresh, e.l1,
                                        e.pink)});
  }
}

void verify_footprint(VerifyReport& report) {
  const auto f = footprint_model(Level(10), 4);
  auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };
  const double mf = to_mb(f.matrix_free_total);
  const double hy = to_mb(f.hyteg_traffic_total);
  const double crs = to_mb(f.crs_total);
  report.cases.push_back({"footprint", "dof l=10", dof_counts(Level(10)).total == 2100225,
                          fmt::format("{} DoFs, expected 2100225", dof_counts(Level(10)).total)});
  report.cases.push_back({"footprint", "matrix-free l=10", near(mf, 33.6, 0.1),
                          fmt::format("{:.3f} MB, expected 33.6", mf)});
  report.cases.push_back({"footprint", "hyteg traffic l=10", near(hy, 67.2, 0.1),
                          fmt::format("{:.3f} MB, expected 67.2", hy)});
  report.cases.push_back({"footprint", "crs / hyteg l=10", near(crs / hy, 4.9, 0.05),
                          fmt::format("{:.3f}, expected 4.9", crs / hy)});
  const auto overflow = index_overflow_level(4, 2);
  report.cases.push_back({"footprint", "32-bit overflow, 2 triangles", overflow == 13,
                          fmt::format("level {}, expected 13",
                                      overflow ? std::to_string(*overflow) : "none")});
}

}  // namespace

VerifyReport cmd_verify(const VerifyOptions& options) {
  if (options.max_level < 2 || options.max_level > 6) {
    throw DomainError(fmt::format("verify runs levels 2..max_level with max_level in 2..6, got {}",
                                  options.max_level));
  }
  VerifyReport report;
  verify_kernels(report, options);
  verify_sparse(report, options);
  verify_classification(report);
  verify_footprint(report);
  return report;
}

void print_report(std::ostream& out, const VerifyReport& report) {
  int failed = 0;
  for (const auto& c : report.cases) {
    if (!c.passed) ++failed;
    out << fmt::format("[{}] {}/{}: {}\n", c.passed ? "PASS" : "FAIL", c.suite, c.name, c.detail);
  }
  std::string suites;
  for (const auto& s : report.suites()) suites += (suites.empty() ? "" : ", ") + s;
  out << fmt::format("{} cases, {} failed (suites: {})\n", report.cases.size(), failed, suites);
}

// ---------------------------------------------------------------------------
// predict

namespace {

std::pair<LcState, bool> state_for(KernelId id, Level level, const MachineModel& machine,
                                   const LcFixture* fixture) {
  if (fixture) {
    if (auto s = fixture->lookup(id, level.value())) return {*s, true};
  }
  const auto spec = builtin_spec(id);
  return {lc_state_by_policy(spec, classify_accesses(spec), level, machine), false};
}

EcmPrediction predict_for(KernelId id, const LcState& state, const MachineModel& machine,
                          const PredictOptions& options) {
  return predict(core_model(id), classify_accesses(builtin_spec(id)), state, machine, options);
}

std::string g(double v) { return fmt::format("{:.6g}", v); }

}  // namespace

std::vector<PredictRow> cmd_predict(const MachineModel& machine, std::span<const KernelId> kernels,
                                    const LevelRange& levels, const LcFixture* fixture,
                                    const PredictOptions& options) {
  machine.validate();
  std::vector<PredictRow> rows;
  for (KernelId id : kernels) {
    for (Level level : levels.levels()) {
      PredictRow r;
      r.kernel = id;
      r.level = level.value();
      std::tie(r.state, r.pinned) = state_for(id, level, machine, fixture);
      r.prediction = predict_for(id, r.state, machine, options);
      rows.push_back(r);
    }
  }
  return rows;
}

void write_predict_csv(std::ostream& out, std::span<const PredictRow> rows) {
  out << "kernel,level,lc_state,t_ol,t_nol,t_l1l2,t_l2l3,t_l3mem,pred_cycles,pred_gflops\n";
  for (const auto& r : rows) {
    const auto& p = r.prediction;
    out << fmt::format("{},{},{}/{},{},{},{},{},{},{},{:.4f}\n", to_string(r.kernel), r.level,
                       r.state.lc_label(), to_string(r.state.dataset_home), g(p.t_ol), g(p.t_nol),
                       g(p.t_l1l2), g(p.t_l2l3), p.memory_applicable ? g(p.t_l3mem) : "-",
                       g(p.predicted_cycles), p.predicted_gflops);
  }
}

std::vector<std::string> compare_with_reference(const MachineModel& machine, double tol) {
  const auto fixture = LcFixture::skylake_reference();
  std::vector<std::string> lines;
  for (const auto& ref : skylake_reference_rows()) {
    const auto state = fixture.lookup(ref.kernel, ref.level_hi);
    if (!state) continue;
    const auto p = predict_for(ref.kernel, *state, machine, {});
    std::vector<std::string> issues;
    auto check = [&](const char* what, double printed, double computed) {
      if (std::abs(printed - computed) > tol) {
        issues.push_back(fmt::format("{} printed {} computed {}", what, g(printed), g(computed)));
      }
    };
    check("T_OL", ref.t_ol, p.t_ol);
    check("T_nOL", ref.t_nol, p.t_nol);
    check("T_L1L2", ref.t_l1l2, p.t_l1l2);
    check("T_L2L3", ref.t_l2l3, p.t_l2l3);
    if (ref.t_l3mem.has_value() != p.memory_applicable) {
      issues.push_back(fmt::format("T_L3MEM printed {} computed {}",
                                   ref.t_l3mem ? g(*ref.t_l3mem) : "-",
                                   p.memory_applicable ? g(p.t_l3mem) : "-"));
    } else if (ref.t_l3mem) {
      check("T_L3MEM", *ref.t_l3mem, p.t_l3mem);
    }
    for (std::size_t i = 0; i < ref.cumulative.size() && i < 4; ++i) {
      check(fmt::format("cumulative[{}]", i).c_str(), ref.cumulative[i], p.cumulative[i]);
    }
    check("GFLOP/s", ref.gflops, std::round(p.predicted_gflops * 10.0) / 10.0);
    lines.push_back(fmt::format("{} {}-{}: {} {} {:.2f} GFLOP/s{}{}", to_string(ref.kernel),
                                ref.level_lo, ref.level_hi, format_terms(p), format_cumulative(p),
                                p.predicted_gflops, issues.empty() ? "; matches" : "; ",
                                fmt::format("{}", fmt::join(issues, "; "))));
  }
  return lines;
}

// ---------------------------------------------------------------------------
// bench / scale

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Workload {
  KernelId kernel;
  P2Operator op;
  P2Function src;
  P2Function dst;

  Workload(KernelId id, Level level, std::uint64_t seed)
      : kernel(id), op(P2Operator::pseudo_random(seed)), src(level, PseudoRandom{seed}), dst(level) {
    apply_kernel(kernel, op, src, dst);  // pre-touch
  }

  double run(std::int64_t reps) {
    const auto t0 = Clock::now();
    for (std::int64_t r = 0; r < reps; ++r) apply_kernel(kernel, op, src, dst);
    return seconds_since(t0);
  }
};

double flops_per_apply(KernelId id, Level level) {
  return static_cast<double>(flops_per_iteration(builtin_spec(id)).total()) *
         static_cast<double>(interior_size(id, level));
}

// Doubles the repetition count until one window lasts min_seconds.
std::pair<std::int64_t, double> calibrate(Workload& w, double min_seconds) {
  std::int64_t reps = 1;
  for (;;) {
    const double t = w.run(reps);
    if (t >= min_seconds) return {reps, t};
    const double scale = t > 0.0 ? 1.2 * min_seconds / t : 16.0;
    reps = std::max(reps * 2, static_cast<std::int64_t>(std::ceil(reps * std::min(scale, 64.0))));
  }
}

std::vector<int> allowed_cpus() {
  std::vector<int> cpus;
  cpu_set_t set;
  CPU_ZERO(&set);
  if (sched_getaffinity(0, sizeof(set), &set) == 0) {
    for (int c = 0; c < CPU_SETSIZE; ++c) {
      if (CPU_ISSET(c, &set)) cpus.push_back(c);
    }
  }
  return cpus;
}

bool pin_self(int cpu) {
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu, &set);
  return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
}

}  // namespace

BenchResult bench_kernel(KernelId kernel, Level level, double predicted_gflops,
                         const BenchOptions& options) {
  if (!(options.min_seconds > 0.0) || options.windows < 1) {
    throw DomainError("bench needs a positive window length and at least one window");
  }
  Workload w(kernel, level, options.seed);
  auto [reps, best] = calibrate(w, options.min_seconds);
  for (int i = 1; i < options.windows; ++i) best = std::min(best, w.run(reps));

  BenchResult r;
  r.kernel = kernel;
  r.level = level.value();
  r.repetitions = reps;
  r.wall_seconds = best;
  r.iterations_done = interior_size(kernel, level) * reps;
  r.achieved_gflops = flops_per_apply(kernel, level) * static_cast<double>(reps) / best / 1e9;
  r.predicted_gflops = predicted_gflops;
  r.ratio = predicted_gflops > 0.0 ? r.achieved_gflops / predicted_gflops : 0.0;
  return r;
}

std::vector<BenchResult> cmd_bench(const MachineModel& machine, std::span<const KernelId> kernels,
                                   const LevelRange& levels, const LcFixture* fixture,
                                   const BenchOptions& options) {
  std::vector<BenchResult> out;
  for (KernelId id : kernels) {
    for (Level level : levels.levels()) {
      const auto state = state_for(id, level, machine, fixture).first;
      const double predicted = predict_for(id, state, machine, {}).predicted_gflops;
      try {
        out.push_back(bench_kernel(id, level, predicted, options));
      } catch (const std::bad_alloc&) {
        std::cerr << fmt::format("bench: skipping {} level {}: not enough memory\n", to_string(id),
                                 level.value());
      }
    }
  }
  return out;
}

void write_bench_csv(std::ostream& out, std::span<const BenchResult> rows) {
  out << "kernel,level,repetitions,wall_seconds,iterations_done,achieved_gflops,predicted_gflops,ratio\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{:.6f},{},{:.4f},{:.4f},{:.4f}\n", to_string(r.kernel), r.level,
                       r.repetitions, r.wall_seconds, r.iterations_done, r.achieved_gflops,
                       r.predicted_gflops, r.ratio);
  }
}

std::vector<ScalingResult> cmd_scale(const MachineModel& machine, KernelId kernel, Level level,
                                     int max_threads, const LcFixture* fixture,
                                     const BenchOptions& options) {
  if (max_threads < 1) throw DomainError("scale needs at least one thread");
  const auto state = state_for(kernel, level, machine, fixture).first;
  const auto prediction = predict_for(kernel, state, machine, {});
  const int machine_cores = machine.sockets * machine.cores_per_socket;
  const auto scaling = predict_scaling(prediction, machine, std::min(max_threads, machine_cores));

  std::int64_t reps = 0;
  {
    Workload probe(kernel, level, options.seed);
    reps = calibrate(probe, options.min_seconds).first;
  }
  const double flops = flops_per_apply(kernel, level) * static_cast<double>(reps);
  const auto cpus = allowed_cpus();
  bool warned = false;

  std::vector<ScalingResult> out;
  for (int threads = 1; threads <= max_threads; ++threads) {
    std::vector<std::vector<double>> seconds(static_cast<std::size_t>(threads));
    std::atomic<int> pinned{0};
    std::barrier sync(threads);
    std::vector<std::jthread> workers;
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        if (!cpus.empty() && pin_self(cpus[static_cast<std::size_t>(t) % cpus.size()])) ++pinned;
        // Fields are created on the worker so first touch places them locally.
        Workload w(kernel, level, options.seed);
        for (int win = 0; win < options.windows; ++win) {
          sync.arrive_and_wait();
          seconds[static_cast<std::size_t>(t)].push_back(w.run(reps));
        }
      });
    }
    workers.clear();

    ScalingResult r;
    r.threads = threads;
    r.pinned = pinned == threads;
    if (!r.pinned && !warned) {
      std::cerr << "scale: could not pin every thread, running unpinned\n";
      warned = true;
    }
    for (int win = 0; win < options.windows; ++win) {
      double aggregate = 0.0;
      for (const auto& s : seconds) aggregate += flops / s[static_cast<std::size_t>(win)] / 1e9;
      r.aggregate_gflops = std::max(r.aggregate_gflops, aggregate);
    }
    r.per_thread_gflops = r.aggregate_gflops / threads;
    r.predicted_aggregate =
        scaling.aggregate_gflops[static_cast<std::size_t>(std::min(threads, machine_cores) - 1)];
    out.push_back(r);
  }
  return out;
}

void write_scale_csv(std::ostream& out, std::span<const ScalingResult> rows) {
  out << "threads,aggregate_gflops,per_thread_gflops,predicted_aggregate,pinned\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{:.4f},{:.4f},{:.4f},{}\n", r.threads, r.aggregate_gflops,
                       r.per_thread_gflops, r.predicted_aggregate, r.pinned ? 1 : 0);
  }
}

// ---------------------------------------------------------------------------
// memory / codegen

std::vector<MemoryRow> cmd_memory(const LevelRange& levels, int index_bytes) {
  if (index_bytes != 4 && index_bytes != 8) {
    throw DomainError(fmt::format("index width of {} bytes not supported", index_bytes));
  }
  std::vector<MemoryRow> rows;
  for (Level level : levels.levels()) {
    rows.push_back({footprint_model(level, 4), footprint_model(level, 8), index_bytes});
  }
  return rows;
}

void write_memory_csv(std::ostream& out, std::span<const MemoryRow> rows) {
  out << "level,crs32_bytes,crs64_bytes,matrixfree_bytes,hyteg_bytes,crs_mb,matrixfree_mb,"
         "hyteg_mb,crs_over_matrixfree,crs_over_hyteg\n";
  for (const auto& r : rows) {
    const auto& f = r.selected();
    out << fmt::format("{},{},{},{},{},{:.3f},{:.3f},{:.3f},{:.4f},{:.4f}\n", f.level,
                       r.crs32.crs_total, r.crs64.crs_total, f.matrix_free_total,
                       f.hyteg_traffic_total, to_mb(f.crs_total), to_mb(f.matrix_free_total),
                       to_mb(f.hyteg_traffic_total),
                       static_cast<double>(f.crs_total) / static_cast<double>(f.matrix_free_total),
                       static_cast<double>(f.crs_total) / static_cast<double>(f.hyteg_traffic_total));
  }
}

GeneratedKernel cmd_codegen(KernelId kernel, Level level, const std::string& out_path) {
  auto k = generate(builtin_spec(kernel), {}, level);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + out_path + "' for writing");
  out << k.source_text;
  out.close();
  if (!out) throw IoError("failed writing '" + out_path + "'");
  return k;
}

std::string plan_summary(const GeneratedKernel& k) {
  std::size_t accesses = 0;
  std::set<std::string> temps;
  for (const auto& u : k.plan) {
    accesses += u.terms.size();
    for (const auto& a : u.terms) temps.insert(a.temp);
  }
  return fmt::format(
      "{} level {}: {} hoisted weights, {} targets, {} reads ({} distinct), "
      "y in [{}, {}), x in [{}, {} - y)",
      k.name, k.level, k.hoisted.size(), k.plan.size(), accesses, temps.size(), k.bounds.y_begin,
      k.bounds.y_end, k.bounds.x_begin, k.bounds.x_limit);
}

}  // namespace p2ecm
