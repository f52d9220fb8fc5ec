#include "p2ecm/machine.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "p2ecm/error.hpp"

namespace p2ecm {

std::string to_string(CacheLevel level) {
  switch (level) {
    case CacheLevel::L1: return "L1";
    case CacheLevel::L2: return "L2";
    case CacheLevel::L3: return "L3";
    case CacheLevel::MEM: return "MEM";
  }
  return "?";
}

CacheLevel parse_cache_level(const std::string& text) {
  if (text == "L1") return CacheLevel::L1;
  if (text == "L2") return CacheLevel::L2;
  if (text == "L3") return CacheLevel::L3;
  if (text == "MEM") return CacheLevel::MEM;
  throw Error("unknown cache level '" + text + "'");
}

std::uint64_t MachineModel::cache_bytes(CacheLevel level) const {
  switch (level) {
    case CacheLevel::L1: return l1_bytes;
    case CacheLevel::L2: return l2_bytes;
    case CacheLevel::L3: return l3_bytes;
    case CacheLevel::MEM: break;
  }
  throw DomainError("main memory has no modeled capacity");
}

double cycles_per_cacheline(double bandwidth_gbs, double frequency_ghz, int cacheline_bytes) {
  if (!(bandwidth_gbs > 0.0) || !(frequency_ghz > 0.0) || cacheline_bytes <= 0) {
    throw DomainError(fmt::format("cycles_per_cacheline needs positive inputs (bw={}, f={})",
                                  bandwidth_gbs, frequency_ghz));
  }
  return cacheline_bytes * frequency_ghz / bandwidth_gbs;
}

void MachineModel::validate() const {
  if (!(frequency_ghz > 0.0)) throw Error(name + ": frequency must be positive");
  if (cacheline_bytes <= 0 || cacheline_bytes % 8 != 0) {
    throw Error(name + ": cache line must be a positive multiple of 8 bytes");
  }
  if (cores_per_socket < 1 || sockets < 1) throw Error(name + ": need at least one core");
  if (!(l1_bytes > 0 && l1_bytes < l2_bytes && l2_bytes < l3_bytes)) {
    throw Error(name + ": cache sizes must satisfy 0 < L1 < L2 < L3");
  }
  if (!(l1l2_bytes_per_cycle > 0.0) || !(l2l3_bytes_per_cycle > 0.0)) {
    throw Error(name + ": cache bandwidths must be positive");
  }
  if (simd_doubles < 1 || fma_per_cycle < 1 || loads_per_cycle < 1 || stores_per_cycle < 1) {
    throw Error(name + ": in-core throughput must be positive");
  }
  if (bandwidth_table.empty()) throw Error(name + ": bandwidth table is empty");
  for (const auto& e : bandwidth_table) {
    if (e.load_streams < 0 || e.store_streams < 0 || e.load_streams + e.store_streams == 0) {
      throw Error(name + ": bandwidth entry without streams");
    }
    const double exact = cycles_per_cacheline(e.bandwidth_gbs, frequency_ghz, cacheline_bytes);
    if (std::abs(e.cycles_per_cacheline - exact) > 0.02 * exact) {
      throw Error(fmt::format("{}: {} load/{} store entry uses {} cy/CL, more than 2% from {:.3f}",
                              name, e.load_streams, e.store_streams, e.cycles_per_cacheline,
                              exact));
    }
  }
}

MachineModel skylake_8174() {
  MachineModel m;
  m.name = "skylake-8174";
  m.frequency_ghz = 2.7;
  m.cores_per_socket = 24;
  m.sockets = 2;
  m.cacheline_bytes = 64;
  m.l1_bytes = 32 * 1024;
  m.l2_bytes = 1024 * 1024;
  m.l3_bytes = 33ull * 1024 * 1024;
  m.l1l2_bytes_per_cycle = 64;
  m.l1l2_duplex = Duplex::half;
  m.l2l3_bytes_per_cycle = 16;
  m.l2l3_duplex = Duplex::full;
  m.bandwidth_table = {{1, 1, 70.0, 2.5}, {3, 1, 87.0, 2.0}, {1, 3, 60.0, 2.9}};
  return m;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, int line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + text + "'", line);
  }
  if (pos != text.size()) throw ParseError("trailing characters in '" + text + "'", line);
  return v;
}

int parse_int(const std::string& text, int line) {
  const double v = parse_number(text, line);
  if (v != std::floor(v)) throw ParseError("expected an integer, got '" + text + "'", line);
  return static_cast<int>(v);
}

/// Plain byte counts or a KiB / MiB / GiB suffix.
std::uint64_t parse_bytes(const std::string& text, int line) {
  static const std::pair<const char*, std::uint64_t> suffixes[] = {
      {"KiB", 1ull << 10}, {"MiB", 1ull << 20}, {"GiB", 1ull << 30}};
  for (const auto& [suffix, scale] : suffixes) {
    const std::string s(suffix);
    if (text.size() > s.size() && text.compare(text.size() - s.size(), s.size(), s) == 0) {
      return static_cast<std::uint64_t>(parse_int(trim(text.substr(0, text.size() - s.size())), line)) *
             scale;
    }
  }
  const double v = parse_number(text, line);
  if (v < 0 || v != std::floor(v)) throw ParseError("expected a byte count, got '" + text + "'", line);
  return static_cast<std::uint64_t>(v);
}

Duplex parse_duplex(const std::string& text, int line) {
  if (text == "half") return Duplex::half;
  if (text == "full") return Duplex::full;
  throw ParseError("duplex must be 'half' or 'full'", line);
}

}  // namespace

MachineModel parse_machine(std::istream& in) {
  MachineModel m;
  m.bandwidth_table.clear();
  static const std::regex bw_key(R"(bw\.(\d+)l(\d+)s_(gbs|cycl))");
  struct PartialEntry {
    std::optional<double> gbs, cycl;
    int line = 0;
  };
  std::map<std::pair<int, int>, PartialEntry> bw;
  std::map<std::string, int> seen;
  const char* required[] = {"frequency_ghz", "cores_per_socket", "l1_bytes", "l2_bytes",
                            "l3_bytes", "l1l2_bytes_per_cycle", "l2l3_bytes_per_cycle"};

  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError("empty key or value", line);
    if (seen.count(key)) {
      throw ParseError("duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")",
                       line);
    }
    seen[key] = line;

    std::smatch match;
    if (std::regex_match(key, match, bw_key)) {
      auto& e = bw[{std::stoi(match[1]), std::stoi(match[2])}];
      e.line = line;
      (match[3] == "gbs" ? e.gbs : e.cycl) = parse_number(value, line);
    } else if (key == "name") {
      m.name = value;
    } else if (key == "frequency_ghz") {
      m.frequency_ghz = parse_number(value, line);
    } else if (key == "cores_per_socket") {
      m.cores_per_socket = parse_int(value, line);
    } else if (key == "sockets") {
      m.sockets = parse_int(value, line);
    } else if (key == "cacheline_bytes") {
      m.cacheline_bytes = parse_int(value, line);
    } else if (key == "l1_bytes") {
      m.l1_bytes = parse_bytes(value, line);
    } else if (key == "l2_bytes") {
      m.l2_bytes = parse_bytes(value, line);
    } else if (key == "l3_bytes") {
      m.l3_bytes = parse_bytes(value, line);
    } else if (key == "l1l2_bytes_per_cycle") {
      m.l1l2_bytes_per_cycle = parse_number(value, line);
    } else if (key == "l2l3_bytes_per_cycle") {
      m.l2l3_bytes_per_cycle = parse_number(value, line);
    } else if (key == "l1l2_duplex") {
      m.l1l2_duplex = parse_duplex(value, line);
    } else if (key == "l2l3_duplex") {
      m.l2l3_duplex = parse_duplex(value, line);
    } else if (key == "simd_doubles") {
      m.simd_doubles = parse_int(value, line);
    } else if (key == "fma_per_cycle") {
      m.fma_per_cycle = parse_int(value, line);
    } else if (key == "loads_per_cycle") {
      m.loads_per_cycle = parse_int(value, line);
    } else if (key == "stores_per_cycle") {
      m.stores_per_cycle = parse_int(value, line);
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
  }

  for (const char* k : required) {
    if (!seen.count(k)) throw ParseError(std::string("missing required key '") + k + "'", line);
  }
  if (bw.empty()) throw ParseError("no bw.<L>l<S>s_gbs entries", line);
  for (const auto& [streams, e] : bw) {
    if (!e.gbs) {
      throw ParseError(fmt::format("bw.{}l{}s_cycl without matching _gbs", streams.first,
                                   streams.second),
                       e.line);
    }
    BandwidthEntry entry{streams.first, streams.second, *e.gbs, 0.0};
    entry.cycles_per_cacheline =
        e.cycl ? *e.cycl : cycles_per_cacheline(*e.gbs, m.frequency_ghz, m.cacheline_bytes);
    m.bandwidth_table.push_back(entry);
  }
  try {
    m.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& err) {
    throw ParseError(err.what(), line);
  }
  return m;
}

MachineModel load_machine(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open machine file '" + path + "'");
  return parse_machine(in);
}

void write_machine(std::ostream& out, const MachineModel& m) {
  out << "name=" << m.name << '\n';
  out << fmt::format("frequency_ghz={}\n", m.frequency_ghz);
  out << fmt::format("cores_per_socket={}\nsockets={}\ncacheline_bytes={}\n", m.cores_per_socket,
                     m.sockets, m.cacheline_bytes);
  out << fmt::format("l1_bytes={}\nl2_bytes={}\nl3_bytes={}\n", m.l1_bytes, m.l2_bytes, m.l3_bytes);
  out << fmt::format("l1l2_bytes_per_cycle={}\nl1l2_duplex={}\n", m.l1l2_bytes_per_cycle,
                     m.l1l2_duplex == Duplex::half ? "half" : "full");
  out << fmt::format("l2l3_bytes_per_cycle={}\nl2l3_duplex={}\n", m.l2l3_bytes_per_cycle,
                     m.l2l3_duplex == Duplex::half ? "half" : "full");
  out << fmt::format("simd_doubles={}\nfma_per_cycle={}\nloads_per_cycle={}\nstores_per_cycle={}\n",
                     m.simd_doubles, m.fma_per_cycle, m.loads_per_cycle, m.stores_per_cycle);
  for (const auto& e : m.bandwidth_table) {
    out << fmt::format("bw.{}l{}s_gbs={}\nbw.{}l{}s_cycl={}\n", e.load_streams, e.store_streams,
                       e.bandwidth_gbs, e.load_streams, e.store_streams, e.cycles_per_cacheline);
  }
}

const BandwidthEntry& select_bandwidth(const std::vector<BandwidthEntry>& table, int load_streams,
                                       int store_streams) {
  if (table.empty()) throw DomainError("select_bandwidth: empty table");
  auto ratio = [](int loads, int stores) {
    return std::log(std::max(loads, 0) == 0 ? 0.5 : static_cast<double>(loads)) -
           std::log(std::max(stores, 0) == 0 ? 0.5 : static_cast<double>(stores));
  };
  for (const auto& e : table) {
    if (static_cast<long>(e.load_streams) * store_streams ==
        static_cast<long>(load_streams) * e.store_streams) {
      return e;
    }
  }
  const double target = ratio(load_streams, store_streams);
  const BandwidthEntry* best = &table.front();
  double best_distance = std::abs(ratio(best->load_streams, best->store_streams) - target);
  for (const auto& e : table) {
    const double r = ratio(e.load_streams, e.store_streams);
    const double d = std::abs(r - target);
    const double best_r = ratio(best->load_streams, best->store_streams);
    if (d < best_distance - 1e-12 || (std::abs(d - best_distance) <= 1e-12 && r < best_r)) {
      best = &e;
      best_distance = d;
    }
  }
  return *best;
}

}  // namespace p2ecm
