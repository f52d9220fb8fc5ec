#include "p2ecm/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace p2ecm {

int AccessClassification::new_total() const noexcept {
  int n = 0;
  for (const auto& a : arrays) n += a.new_count;
  return n;
}

int AccessClassification::l1_total() const noexcept {
  int n = 0;
  for (const auto& a : arrays) n += a.l1_count;
  return n;
}

int AccessClassification::lc_total() const noexcept {
  int n = 0;
  for (const auto& a : arrays) n += static_cast<int>(a.lc_dependent.size());
  return n;
}

int AccessClassification::distinct_total() const noexcept {
  int n = 0;
  for (const auto& a : arrays) n += a.distinct();
  return n;
}

int AccessClassification::row_span_total() const noexcept {
  int n = 0;
  for (const auto& a : arrays) n += a.row_span;
  return n;
}

AccessClassification classify_accesses(const StencilAccessSpec& spec) {
  AccessClassification c;
  c.store_streams = static_cast<int>(spec.targets.size());
  for (std::size_t s = 0; s < spec.sources.size(); ++s) {
    std::vector<std::pair<int, int>> offsets;
    for (const auto& u : spec.updates) {
      for (const auto& a : u.terms) {
        if (a.source != static_cast<int>(s)) continue;
        const std::pair<int, int> o{a.dx, a.dy};
        if (std::find(offsets.begin(), offsets.end(), o) == offsets.end()) offsets.push_back(o);
      }
    }
    ArrayAccessClass ac;
    ac.source = static_cast<int>(s);
    ac.name = spec.sources[s].name;
    if (offsets.empty()) {
      c.arrays.push_back(ac);
      continue;
    }
    int min_dy = offsets.front().second;
    int max_dy = min_dy;
    for (const auto& [dx, dy] : offsets) {
      min_dy = std::min(min_dy, dy);
      max_dy = std::max(max_dy, dy);
      bool same_row_later = false;
      std::optional<int> reuse;
      for (const auto& [ox, oy] : offsets) {
        if (oy == dy && ox > dx) same_row_later = true;
        if (oy > dy) reuse = std::min(reuse.value_or(oy - dy), oy - dy);
      }
      if (same_row_later) {
        ++ac.l1_count;
      } else if (reuse) {
        ac.lc_dependent.push_back({dx, dy, *reuse});
      } else {
        ++ac.new_count;
      }
    }
    ac.row_span = max_dy - min_dy + 1;
    c.arrays.push_back(ac);
  }
  return c;
}

KernelCoreModel core_model(const StencilAccessSpec& spec) {
  KernelCoreModel m;
  m.name = spec.name;
  m.flops = flops_per_iteration(spec);
  m.loads_per_iteration = classify_accesses(spec).distinct_total();
  m.stores_per_iteration = static_cast<int>(spec.targets.size());
  return m;
}

KernelCoreModel core_model(KernelId kernel) {
  auto m = core_model(builtin_spec(kernel));
  switch (kernel) {
    case KernelId::vtv: m.t_ol_fixture = 10.0; m.t_nol_fixture = 8.0; break;
    case KernelId::etv: m.t_ol_fixture = 24.0; m.t_nol_fixture = 12.0; break;
    case KernelId::vte: m.t_ol_fixture = 14.8; m.t_nol_fixture = 12.0; break;
    case KernelId::ete: m.t_ol_fixture = 20.0; m.t_nol_fixture = 10.0; break;
  }
  return m;
}

CoreCycles theoretical_core_cycles(const KernelCoreModel& core, const MachineModel& machine) {
  const double vectors_per_wu =
      static_cast<double>(machine.iterations_per_work_unit()) / machine.simd_doubles;
  // Every multiply pairs with an add into one FMA, or stands alone.
  const double fma = core.flops.mults * vectors_per_wu;
  const double loads = core.loads_per_iteration * vectors_per_wu;
  const double stores = core.stores_per_iteration * vectors_per_wu;
  CoreCycles c;
  c.t_ol = std::ceil(fma / machine.fma_per_cycle);
  c.t_nol = std::max(std::ceil(loads / machine.loads_per_cycle),
                     std::ceil(stores / machine.stores_per_cycle));
  return c;
}

bool layer_condition(const AccessClassification& c, Level level, std::uint64_t cache_bytes) {
  const auto rows = static_cast<std::uint64_t>(c.row_span_total() + c.store_streams);
  return rows * static_cast<std::uint64_t>(level.extent()) * 8 <= cache_bytes;
}

std::uint64_t working_set_bytes(const StencilAccessSpec& spec, Level level) {
  std::uint64_t bytes = 0;
  for (const auto& a : spec.sources) bytes += 8 * static_cast<std::uint64_t>(layout_size(a.layout, level));
  for (const auto& a : spec.targets) bytes += 8 * static_cast<std::uint64_t>(layout_size(a.layout, level));
  return bytes;
}

CacheLevel dataset_home(std::uint64_t bytes, const MachineModel& machine) {
  if (bytes <= machine.l2_bytes) return CacheLevel::L2;
  if (bytes <= machine.l3_bytes) return CacheLevel::L3;
  return CacheLevel::MEM;
}

CacheLevel dataset_home(const StencilAccessSpec& spec, Level level, const MachineModel& machine) {
  return dataset_home(working_set_bytes(spec, level), machine);
}

int LcState::l2_pink_misses(const AccessClassification& c) const {
  if (l2_pink_miss_override) return *l2_pink_miss_override;
  return l2_pink_hits ? 0 : c.lc_total();
}

std::string LcState::lc_label() const {
  if (l1_pink_hits) return "L1";
  if (l2_pink_hits || l2_pink_miss_override) return "L2";
  return "L3";
}

LcState lc_state_by_policy(const StencilAccessSpec& spec, const AccessClassification& c,
                           Level level, const MachineModel& machine) {
  LcState s;
  s.l1_pink_hits = layer_condition(c, level, machine.l1_bytes);
  s.l2_pink_hits = layer_condition(c, level, machine.l2_bytes);
  s.dataset_home = dataset_home(spec, level, machine);
  return s;
}

namespace {

double interface_cycles(double loads, double stores, Duplex duplex, double cycles_per_line) {
  return (duplex == Duplex::half ? loads + stores : std::max(loads, stores)) * cycles_per_line;
}

}  // namespace

Traffic traffic(const AccessClassification& c, const LcState& state, const MachineModel& machine,
                BandwidthMode mode) {
  const double line = machine.cacheline_bytes;
  const int stores = c.store_streams;
  const int write_allocates = stores;
  const int fresh = c.new_total();

  Traffic t;
  const int l1_loads = write_allocates + fresh + (state.l1_pink_hits ? 0 : c.lc_total());
  t.t_l1l2 = interface_cycles(l1_loads, stores, machine.l1l2_duplex,
                              line / machine.l1l2_bytes_per_cycle);
  const int l2_loads = write_allocates + fresh + state.l2_pink_misses(c);
  t.t_l2l3 = interface_cycles(l2_loads, stores, machine.l2l3_duplex,
                              line / machine.l2l3_bytes_per_cycle);

  // Measured stream bandwidths already include the write-allocate loads, so
  // memory traffic counts application streams only.
  t.memory_applicable = state.dataset_home == CacheLevel::MEM;
  if (t.memory_applicable) {
    const auto& entry = select_bandwidth(machine.bandwidth_table, fresh, stores);
    const double cy = mode == BandwidthMode::table
                          ? entry.cycles_per_cacheline
                          : cycles_per_cacheline(entry.bandwidth_gbs, machine.frequency_ghz,
                                                 machine.cacheline_bytes);
    t.t_l3mem = (fresh + stores) * cy;
  }
  return t;
}

EcmPrediction predict(const KernelCoreModel& core, const AccessClassification& c,
                      const LcState& state, const MachineModel& machine,
                      const PredictOptions& options) {
  EcmPrediction p;
  const auto theory = theoretical_core_cycles(core, machine);
  const bool use_fixture =
      options.core == CoreSource::fixture && core.t_ol_fixture && core.t_nol_fixture;
  p.t_ol = use_fixture ? *core.t_ol_fixture : theory.t_ol;
  p.t_nol = use_fixture ? *core.t_nol_fixture : theory.t_nol;

  const auto t = traffic(c, state, machine, options.bandwidth);
  p.t_l1l2 = t.t_l1l2;
  p.t_l2l3 = t.t_l2l3;
  p.t_l3mem = t.t_l3mem;
  p.memory_applicable = t.memory_applicable;

  double sum = p.t_nol;
  p.cumulative[0] = std::max(p.t_ol, sum);
  sum += p.t_l1l2;
  p.cumulative[1] = std::max(p.t_ol, sum);
  sum += p.t_l2l3;
  p.cumulative[2] = std::max(p.t_ol, sum);
  sum += p.t_l3mem;
  p.cumulative[3] = std::max(p.t_ol, sum);

  p.dataset_home = state.dataset_home;
  p.predicted_cycles = p.cumulative[static_cast<std::size_t>(state.dataset_home)];
  p.flops_per_work_unit = static_cast<double>(machine.iterations_per_work_unit()) * core.flops.total();
  p.predicted_gflops = p.flops_per_work_unit * machine.frequency_ghz / p.predicted_cycles;
  return p;
}

namespace {

std::string num(double v) { return fmt::format("{:.4g}", v); }

}  // namespace

std::string format_terms(const EcmPrediction& p) {
  return fmt::format("{{{} || {} | {} | {} | {}}}", num(p.t_ol), num(p.t_nol), num(p.t_l1l2),
                     num(p.t_l2l3), p.memory_applicable ? num(p.t_l3mem) : "-");
}

std::string format_cumulative(const EcmPrediction& p) {
  std::string s = "{";
  const auto last = static_cast<std::size_t>(p.dataset_home);
  for (std::size_t i = 0; i < 4; ++i) {
    if (i) s += " ] ";
    s += i <= last ? num(p.cumulative[i]) : "-";
  }
  return s + "}";
}

ScalingPrediction predict_scaling(const EcmPrediction& p, const MachineModel& machine, int cores) {
  const int max_cores = machine.sockets * machine.cores_per_socket;
  if (cores < 1 || cores > max_cores) {
    throw DomainError(fmt::format("predict_scaling: {} cores requested, machine has {}", cores,
                                  max_cores));
  }
  ScalingPrediction s;
  s.single_core_gflops = p.predicted_gflops;
  if (p.memory_applicable && p.t_l3mem > 0.0) {
    s.saturation_cores = static_cast<int>(std::ceil(p.predicted_cycles / p.t_l3mem));
  }
  for (int n = 1; n <= cores; ++n) {
    double effective = 0.0;
    for (int socket = 0; socket < machine.sockets; ++socket) {
      const int on_socket = std::clamp(n - socket * machine.cores_per_socket, 0,
                                       machine.cores_per_socket);
      effective += s.saturation_cores ? std::min(on_socket, *s.saturation_cores) : on_socket;
    }
    s.aggregate_gflops.push_back(effective * s.single_core_gflops);
  }
  return s;
}

// ---------------------------------------------------------------------------

LcFixture LcFixture::parse(std::istream& in) {
  LcFixture f;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream tokens(raw);
    std::string kernel, range;
    if (!(tokens >> kernel)) continue;
    if (!(tokens >> range)) throw ParseError("expected a level range after the kernel", line);

    LcFixtureEntry e;
    try {
      e.kernel = parse_kernel(kernel);
    } catch (const SpecError& err) {
      throw ParseError(err.what(), line);
    }
    try {
      const auto dash = range.find('-');
      std::size_t pos = 0;
      e.level_lo = std::stoi(range.substr(0, dash), &pos);
      e.level_hi = dash == std::string::npos ? e.level_lo : std::stoi(range.substr(dash + 1));
    } catch (const std::exception&) {
      throw ParseError("malformed level range '" + range + "'", line);
    }
    if (e.level_lo > e.level_hi) throw ParseError("empty level range '" + range + "'", line);
    Level(e.level_lo);
    Level(e.level_hi);

    bool have_home = false;
    std::string kv;
    while (tokens >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("expected key=value, got '" + kv + "'", line);
      const auto key = kv.substr(0, eq);
      const auto value = kv.substr(eq + 1);
      auto hit_or_miss = [&]() {
        if (value == "hit") return true;
        if (value == "miss") return false;
        throw ParseError(key + " must be 'hit' or 'miss'", line);
      };
      if (key == "l1") {
        e.state.l1_pink_hits = hit_or_miss();
      } else if (key == "l2") {
        e.state.l2_pink_hits = hit_or_miss();
      } else if (key == "l2_miss") {
        try {
          e.state.l2_pink_miss_override = std::stoi(value);
        } catch (const std::exception&) {
          throw ParseError("l2_miss must be an integer", line);
        }
      } else if (key == "home") {
        try {
          e.state.dataset_home = parse_cache_level(value);
        } catch (const Error& err) {
          throw ParseError(err.what(), line);
        }
        have_home = true;
      } else {
        throw ParseError("unknown key '" + key + "'", line);
      }
    }
    if (!have_home) throw ParseError("missing home=<level>", line);
    f.entries_.push_back(e);
  }
  return f;
}

LcFixture LcFixture::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open LC fixture '" + path + "'");
  return parse(in);
}

LcFixture LcFixture::skylake_reference() {
  std::istringstream in(R"(
vtv 7-10  l1=hit  l2=hit  home=L3
vtv 11-14 l1=miss l2=hit  home=MEM
etv 7-8   l1=hit  l2=hit  home=L3
etv 9-10  l1=miss l2=hit  home=L3
etv 11-14 l1=miss l2=miss l2_miss=2 home=MEM
vte 7-9   l1=hit  l2=hit  home=L3
vte 10    l1=miss l2=miss home=L3
vte 11-14 l1=miss l2=miss home=MEM
ete 7-8   l1=hit  l2=hit  home=L3
ete 9-10  l1=miss l2=hit  home=MEM
ete 11-14 l1=miss l2=hit  home=MEM
)");
  return parse(in);
}

std::optional<LcState> LcFixture::lookup(KernelId kernel, int level) const {
  for (const auto& e : entries_) {
    if (e.kernel == kernel && level >= e.level_lo && level <= e.level_hi) return e.state;
  }
  return std::nullopt;
}

const std::vector<ReferenceEcmRow>& skylake_reference_rows() {
  static const std::vector<ReferenceEcmRow> rows = {
      {KernelId::vtv, 7, 10, 10, 8, 3, 8, std::nullopt, {10, 11, 19}, 14.8},
      {KernelId::vtv, 11, 14, 10, 8, 5, 8, 5.0, {10, 13, 21, 26}, 10.8},
      {KernelId::etv, 7, 8, 24, 12, 5, 16, std::nullopt, {24, 24, 33}, 15.1},
      {KernelId::etv, 9, 10, 24, 12, 9, 16, 8, {24, 24, 45, 53}, 13.4},
      {KernelId::etv, 11, 14, 24, 12, 9, 24, 8, {24, 24, 45, 53}, 9.4},
      {KernelId::vte, 7, 9, 14.8, 12, 7, 16, std::nullopt, {14.8, 19, 35}, 13.0},
      {KernelId::vte, 10, 10, 14.8, 12, 9, 24, std::nullopt, {14.8, 21, 45}, 10.1},
      {KernelId::vte, 11, 14, 14.8, 12, 9, 24, 11.6, {14.8, 21, 45, 56.6}, 8.0},
      {KernelId::ete, 7, 8, 20, 10, 9, 24, std::nullopt, {20, 19, 43}, 11.5},
      {KernelId::ete, 9, 10, 20, 10, 12, 24, 15, {20, 22, 46, 61}, 10.8},
      {KernelId::ete, 10, 14, 20, 10, 12, 24, 15, {20, 22, 46, 61}, 8.1},
  };
  return rows;
}

}  // namespace p2ecm
