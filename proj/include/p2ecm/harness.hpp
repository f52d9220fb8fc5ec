#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "p2ecm/codegen.hpp"
#include "p2ecm/ecm.hpp"
#include "p2ecm/sparse.hpp"

namespace p2ecm {

/// Inclusive level range, written "a..b" (or a single level "a").
struct LevelRange {
  int lo = 0;
  int hi = 0;

  std::vector<Level> levels() const;
};

LevelRange parse_level_range(const std::string& text);

/// Comma separated kernel names; "all" selects the four kernels.
std::vector<KernelId> parse_kernel_list(const std::string& text);

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
  int max_level = 6;
  std::uint64_t seed = 1;
  /// Assemble the CRS oracle from a slightly perturbed weight table.
  bool perturb_weights = false;
};

struct VerifyCase {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;  // observed vs expected
};

struct VerifyReport {
  std::vector<VerifyCase> cases;

  bool passed() const;
  std::vector<std::string> suites() const;
};

/// Hermetic checks: kernels vs interpreter vs plan executor (bitwise), CRS
/// SpMV vs apply_p2, access classification and footprint fixtures.
VerifyReport cmd_verify(const VerifyOptions& options = {});

void print_report(std::ostream& out, const VerifyReport& report);

// ---------------------------------------------------------------------------
// predict

struct PredictRow {
  KernelId kernel = KernelId::vtv;
  int level = 0;
  LcState state;
  bool pinned = false;
  EcmPrediction prediction;
};

/// One row per (kernel, level). States come from `fixture` where it has an
/// entry and from the layer-condition policy otherwise.
std::vector<PredictRow> cmd_predict(const MachineModel& machine, std::span<const KernelId> kernels,
                                    const LevelRange& levels, const LcFixture* fixture = nullptr,
                                    const PredictOptions& options = {});

/// kernel,level,lc_state,t_ol,t_nol,t_l1l2,t_l2l3,t_l3mem,pred_cycles,pred_gflops
void write_predict_csv(std::ostream& out, std::span<const PredictRow> rows);

/// Engine output against each printed reference row, one line per row, with
/// every mismatch of more than `tol` spelled out.
std::vector<std::string> compare_with_reference(const MachineModel& machine, double tol = 0.05);

// ---------------------------------------------------------------------------
// bench / scale

struct BenchOptions {
  double min_seconds = 0.2;
  /// Timed windows per measurement; the fastest one is reported.
  int windows = 3;
  std::uint64_t seed = 1;
};

struct BenchResult {
  KernelId kernel = KernelId::vtv;
  int level = 0;
  std::int64_t repetitions = 0;
  double wall_seconds = 0.0;
  std::int64_t iterations_done = 0;
  double achieved_gflops = 0.0;
  double predicted_gflops = 0.0;
  double ratio = 0.0;
};

/// Times repeated applies of one kernel on pre-touched fields.
BenchResult bench_kernel(KernelId kernel, Level level, double predicted_gflops,
                         const BenchOptions& options = {});

std::vector<BenchResult> cmd_bench(const MachineModel& machine, std::span<const KernelId> kernels,
                                   const LevelRange& levels, const LcFixture* fixture = nullptr,
                                   const BenchOptions& options = {});

/// kernel,level,repetitions,wall_seconds,iterations_done,achieved_gflops,predicted_gflops,ratio
void write_bench_csv(std::ostream& out, std::span<const BenchResult> rows);

struct ScalingResult {
  int threads = 1;
  double aggregate_gflops = 0.0;
  double per_thread_gflops = 0.0;
  double predicted_aggregate = 0.0;
  bool pinned = false;
};

/// Weak scaling: each thread owns one triangle and applies the kernel to it.
/// Threads are pinned to the allowed CPUs in ascending order where possible.
std::vector<ScalingResult> cmd_scale(const MachineModel& machine, KernelId kernel, Level level,
                                     int max_threads, const LcFixture* fixture = nullptr,
                                     const BenchOptions& options = {});

/// threads,aggregate_gflops,per_thread_gflops,predicted_aggregate,pinned
void write_scale_csv(std::ostream& out, std::span<const ScalingResult> rows);

// ---------------------------------------------------------------------------
// memory / codegen

struct MemoryRow {
  FootprintReport crs32;
  FootprintReport crs64;
  /// Width used for the MB and ratio columns.
  int index_bytes = 4;

  const FootprintReport& selected() const { return index_bytes == 4 ? crs32 : crs64; }
};

std::vector<MemoryRow> cmd_memory(const LevelRange& levels, int index_bytes = 4);

/// level,crs32_bytes,crs64_bytes,matrixfree_bytes,hyteg_bytes,crs_mb,matrixfree_mb,hyteg_mb,
/// crs_over_matrixfree,crs_over_hyteg
void write_memory_csv(std::ostream& out, std::span<const MemoryRow> rows);

/// Generates the kernel and writes its source to `out_path`. Throws IoError
/// when the file cannot be written.
GeneratedKernel cmd_codegen(KernelId kernel, Level level, const std::string& out_path);

std::string plan_summary(const GeneratedKernel& kernel);

}  // namespace p2ecm
