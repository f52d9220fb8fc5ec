#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace p2ecm {

enum class Duplex { half, full };

/// Where a piece of data lives in the memory hierarchy.
enum class CacheLevel { L1 = 0, L2 = 1, L3 = 2, MEM = 3 };

std::string to_string(CacheLevel level);
CacheLevel parse_cache_level(const std::string& text);

/// One row of a measured load/store stream bandwidth table.
struct BandwidthEntry {
  int load_streams = 1;
  int store_streams = 1;
  double bandwidth_gbs = 0.0;
  /// Rounded cycles per cache line used in predictions.
  double cycles_per_cacheline = 0.0;
};

struct MachineModel {
  std::string name = "unnamed";
  double frequency_ghz = 0.0;
  int cores_per_socket = 1;
  int sockets = 2;
  int cacheline_bytes = 64;
  std::uint64_t l1_bytes = 0;
  std::uint64_t l2_bytes = 0;
  std::uint64_t l3_bytes = 0;
  double l1l2_bytes_per_cycle = 0.0;
  Duplex l1l2_duplex = Duplex::half;
  double l2l3_bytes_per_cycle = 0.0;
  Duplex l2l3_duplex = Duplex::full;
  std::vector<BandwidthEntry> bandwidth_table;

  // In-core throughput: doubles per SIMD register, FMA, load and store
  // instructions retired per cycle.
  int simd_doubles = 4;
  int fma_per_cycle = 2;
  int loads_per_cycle = 2;
  int stores_per_cycle = 1;

  std::uint64_t cache_bytes(CacheLevel level) const;
  double peak_flops_per_cycle() const noexcept { return 2.0 * simd_doubles * fma_per_cycle; }
  double peak_gflops() const noexcept { return peak_flops_per_cycle() * frequency_ghz; }
  /// Doubles per cache line; the work unit of the ECM model.
  int iterations_per_work_unit() const noexcept { return cacheline_bytes / 8; }

  /// Throws Error when an invariant is broken (cache sizes not increasing,
  /// bandwidth table cycles more than 2% away from line size * f / bw, ...).
  void validate() const;
};

/// Intel Xeon Platinum 8174 (Skylake-SP) at 2.7 GHz.
MachineModel skylake_8174();

/// Flat key=value format; '#' starts a comment. See data/skylake_8174.machine.
MachineModel parse_machine(std::istream& in);
MachineModel load_machine(const std::string& path);
void write_machine(std::ostream& out, const MachineModel& m);

/// cacheline_bytes * f / bw. Throws DomainError for non-positive inputs.
double cycles_per_cacheline(double bandwidth_gbs, double frequency_ghz, int cacheline_bytes = 64);

/// Entry with the same load:store ratio, otherwise the nearest ratio in log
/// space; ties go to the entry with more stores. Zero stream counts count as
/// half a stream so the ratio stays finite.
const BandwidthEntry& select_bandwidth(const std::vector<BandwidthEntry>& table, int load_streams,
                                       int store_streams);

}  // namespace p2ecm
