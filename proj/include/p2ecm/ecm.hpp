#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "p2ecm/kernels.hpp"
#include "p2ecm/machine.hpp"
#include "p2ecm/stencil_spec.hpp"

namespace p2ecm {

// ---------------------------------------------------------------------------
// Access classification

/// A read whose reuse comes from an earlier row sweep; `reuse_rows` is the
/// smallest row distance back to its previous touch.
struct LcDependent {
  int dx = 0;
  int dy = 0;
  int reuse_rows = 1;
};

/// Classification of the distinct offsets of one source array under the
/// y-outer, x-inner iteration order.
///
/// - new: never touched by an earlier iteration (one new cache line stream)
/// - l1_resident: touched by an earlier iteration of the same row sweep
/// - lc_dependent: touched in an earlier row sweep; a hit only while the
///   layer condition of the cache holds
struct ArrayAccessClass {
  int source = 0;
  std::string name;
  int new_count = 0;
  int l1_count = 0;
  std::vector<LcDependent> lc_dependent;
  /// max dy - min dy + 1 over the array's offsets.
  int row_span = 0;

  int distinct() const noexcept {
    return new_count + l1_count + static_cast<int>(lc_dependent.size());
  }
};

struct AccessClassification {
  std::vector<ArrayAccessClass> arrays;
  int store_streams = 0;

  int new_total() const noexcept;
  int l1_total() const noexcept;
  int lc_total() const noexcept;
  int distinct_total() const noexcept;
  int row_span_total() const noexcept;
};

AccessClassification classify_accesses(const StencilAccessSpec& spec);

// ---------------------------------------------------------------------------
// In-core model

struct KernelCoreModel {
  std::string name;
  FlopCount flops;
  /// Distinct (array, offset) loads and target stores per scalar iteration.
  int loads_per_iteration = 0;
  int stores_per_iteration = 0;
  /// Measured in-core cycles per work unit, when known.
  std::optional<double> t_ol_fixture;
  std::optional<double> t_nol_fixture;
};

KernelCoreModel core_model(const StencilAccessSpec& spec);

/// Core model of a built-in kernel including the reference in-core cycles
/// (T_OL / T_nOL of 10/8, 24/12, 14.8/12 and 20/10 cycles per work unit).
KernelCoreModel core_model(KernelId kernel);

struct CoreCycles {
  double t_ol = 0.0;
  double t_nol = 0.0;
};

/// Throughput bound from FMA, load and store port counts, per work unit.
CoreCycles theoretical_core_cycles(const KernelCoreModel& core, const MachineModel& machine);

// ---------------------------------------------------------------------------
// Layer conditions and cache states

/// (sum of row spans + destination arrays) * 2^level * 8 B <= cache_bytes.
/// The shrinking row length of the triangle is ignored.
bool layer_condition(const AccessClassification& c, Level level, std::uint64_t cache_bytes);

/// Bytes of every array a kernel touches.
std::uint64_t working_set_bytes(const StencilAccessSpec& spec, Level level);

/// Smallest of L2 / L3 holding `bytes`, else MEM.
CacheLevel dataset_home(std::uint64_t bytes, const MachineModel& machine);
CacheLevel dataset_home(const StencilAccessSpec& spec, Level level, const MachineModel& machine);

struct LcState {
  bool l1_pink_hits = true;
  bool l2_pink_hits = true;
  /// Number of LC-dependent reads missing L2, overriding l2_pink_hits.
  std::optional<int> l2_pink_miss_override;
  CacheLevel dataset_home = CacheLevel::L3;

  int l2_pink_misses(const AccessClassification& c) const;

  /// "L1", "L2" or "L3": innermost cache whose layer condition holds.
  std::string lc_label() const;

  friend bool operator==(const LcState&, const LcState&) = default;
};

LcState lc_state_by_policy(const StencilAccessSpec& spec, const AccessClassification& c,
                           Level level, const MachineModel& machine);

// ---------------------------------------------------------------------------
// Transfer times and prediction

struct Traffic {
  double t_l1l2 = 0.0;
  double t_l2l3 = 0.0;
  /// Zero unless the data set lives in main memory.
  double t_l3mem = 0.0;
  bool memory_applicable = false;
};

enum class BandwidthMode {
  table,  ///< rounded cycles per cache line from the bandwidth table
  exact   ///< recomputed from GB/s
};

Traffic traffic(const AccessClassification& c, const LcState& state, const MachineModel& machine,
                BandwidthMode mode = BandwidthMode::table);

enum class CoreSource { fixture, theoretical };

struct PredictOptions {
  CoreSource core = CoreSource::fixture;
  BandwidthMode bandwidth = BandwidthMode::table;
};

struct EcmPrediction {
  double t_ol = 0.0;
  double t_nol = 0.0;
  double t_l1l2 = 0.0;
  double t_l2l3 = 0.0;
  double t_l3mem = 0.0;
  bool memory_applicable = false;
  /// max(T_OL, T_nOL + transfers down to L1 / L2 / L3 / MEM).
  std::array<double, 4> cumulative{};
  CacheLevel dataset_home = CacheLevel::L3;
  double predicted_cycles = 0.0;
  double predicted_gflops = 0.0;
  double flops_per_work_unit = 0.0;
};

EcmPrediction predict(const KernelCoreModel& core, const AccessClassification& c,
                      const LcState& state, const MachineModel& machine,
                      const PredictOptions& options = {});

/// "{10 || 8 | 3 | 8 | -}".
std::string format_terms(const EcmPrediction& p);
/// "{10 ] 11 ] 19 ] -}" up to the data set's home level.
std::string format_cumulative(const EcmPrediction& p);

// ---------------------------------------------------------------------------
// Multicore

struct ScalingPrediction {
  double single_core_gflops = 0.0;
  /// Cores per socket at which memory bandwidth saturates; nullopt when the
  /// kernel has no memory traffic and scales linearly.
  std::optional<int> saturation_cores;
  /// aggregate_gflops[p - 1] for p = 1..cores.
  std::vector<double> aggregate_gflops;
};

/// Sockets are filled one after another; each socket saturates on its own.
ScalingPrediction predict_scaling(const EcmPrediction& p, const MachineModel& machine, int cores);

// ---------------------------------------------------------------------------
// Pinned cache states per kernel and level range

struct LcFixtureEntry {
  KernelId kernel = KernelId::vtv;
  int level_lo = 0;
  int level_hi = 0;
  LcState state;
};

/// Text format, one range per line ('#' comments):
///   <kernel> <lo>-<hi> l1=hit|miss l2=hit|miss [l2_miss=<n>] home=L2|L3|MEM
class LcFixture {
 public:
  static LcFixture parse(std::istream& in);
  static LcFixture load(const std::string& path);
  /// States reproducing the reference Skylake-SP decompositions (levels 7-14).
  static LcFixture skylake_reference();

  std::optional<LcState> lookup(KernelId kernel, int level) const;
  const std::vector<LcFixtureEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<LcFixtureEntry> entries_;
};

/// One printed reference row of an ECM table: terms, cumulative and GFLOP/s.
struct ReferenceEcmRow {
  KernelId kernel;
  int level_lo;
  int level_hi;
  double t_ol, t_nol, t_l1l2, t_l2l3;
  std::optional<double> t_l3mem;
  std::vector<double> cumulative;
  double gflops;
};

/// Reference ECM rows for the Skylake-SP 8174 model, as printed (including
/// their known arithmetic slips, which reports flag).
const std::vector<ReferenceEcmRow>& skylake_reference_rows();

}  // namespace p2ecm
