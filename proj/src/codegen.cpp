#include "p2ecm/codegen.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

namespace p2ecm {

namespace {

index_t row_stride(Layout layout, Level level) { return base_width(layout, level) + 1; }

std::string shifted(int k) {
  if (k == 0) return "ctr_2";
  return k > 0 ? fmt::format("(ctr_2 + {})", k) : fmt::format("(ctr_2 - {})", -k);
}

// (ctr_2 + dy)(ctr_2 + dy + 1)/2, bare symbol first, then by ascending shift.
std::string row_offset(int dy) {
  int a = dy, b = dy + 1;
  if (b == 0) std::swap(a, b);
  const std::string product = shifted(a) + "*" + shifted(b);
  return "((" + product + ") / (2))";
}

std::string data_name(const ArrayDesc& a) { return "_data_" + a.name; }

std::string index_text(Layout layout, int dy, index_t constant, Level level) {
  std::string s = fmt::format("ctr_1 + {}*ctr_2 - {}", row_stride(layout, level), row_offset(dy));
  if (constant > 0) s += fmt::format(" + {}", constant);
  if (constant < 0) s += fmt::format(" - {}", -constant);
  return s;
}

std::vector<int> resolve_slots(const StencilAccessSpec& spec, const WeightsLayout& layout) {
  const int n = spec.weight_count();
  if (layout.slots.empty()) {
    std::vector<int> id(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) id[static_cast<std::size_t>(k)] = k;
    return id;
  }
  if (static_cast<int>(layout.slots.size()) != n) {
    throw SpecError(fmt::format("{}: weights layout has {} slots for {} weights", spec.name,
                                layout.slots.size(), n));
  }
  std::set<int> seen;
  for (int s : layout.slots) {
    if (s < 0 || !seen.insert(s).second) {
      throw SpecError(fmt::format("{}: weights layout slot {} is negative or repeated", spec.name, s));
    }
  }
  return layout.slots;
}

std::string render(const GeneratedKernel& k, const StencilAccessSpec& spec) {
  const Level level(k.level);
  std::string out;
  out += fmt::format("// {} at level {}\n", k.name, k.level);
  out += fmt::format("static void {}_level_{}(", k.name, k.level);
  std::vector<std::string> params;
  for (const auto& t : spec.targets) params.push_back("double * RESTRICT " + data_name(t));
  for (const auto& s : spec.sources) params.push_back("double const * RESTRICT const " + data_name(s));
  params.push_back("double const * RESTRICT const _data_" + k.name);
  for (std::size_t i = 0; i < params.size(); ++i) out += (i ? ", " : "") + params[i];
  out += ")\n{\n";

  for (const auto& h : k.hoisted) {
    out += fmt::format("   const double {} = _data_{}[{}];\n", h.name, k.name, h.slot);
  }
  out += fmt::format("   for (int ctr_2 = {}; ctr_2 < {}; ctr_2 += 1)\n   {{\n", k.bounds.y_begin,
                     k.bounds.y_end);
  out += fmt::format("      for (int ctr_1 = {}; ctr_1 < {} - ctr_2; ctr_1 += 1)\n      {{\n",
                     k.bounds.x_begin, k.bounds.x_limit);

  std::set<std::string> loaded;
  for (const auto& u : k.plan) {
    for (const auto& a : u.terms) {
      if (!loaded.insert(a.temp).second) continue;
      const auto& src = spec.sources[static_cast<std::size_t>(a.source)];
      out += fmt::format("         const double {} = {}[{}];\n", a.temp, data_name(src),
                         index_text(src.layout, a.dy, a.constant, level));
    }
  }
  for (const auto& u : k.plan) {
    const auto& dst = spec.targets[static_cast<std::size_t>(u.target)];
    const std::string lhs = fmt::format("{}[{}]", data_name(dst), index_text(dst.layout, 0, 0, level));
    std::string sum;
    for (const auto& a : u.terms) {
      if (!sum.empty()) sum += " + ";
      sum += k.hoisted[static_cast<std::size_t>(a.weight)].name + "*" + a.temp;
    }
    if (k.mode == UpdateMode::assign) {
      out += fmt::format("         {} = {};\n", lhs, sum);
    } else {
      out += fmt::format("         {} = {} + ({});\n", lhs, lhs, sum);
    }
  }
  out += "      }\n   }\n}\n";
  return out;
}

}  // namespace

std::string index_expression(Layout layout, int dx, int dy, Level level) {
  return index_text(layout, dy, dx + row_stride(layout, level) * dy, level);
}

GeneratedKernel generate(const StencilAccessSpec& spec, const WeightsLayout& layout, Level level,
                         UpdateMode mode) {
  spec.validate();
  const auto slots = resolve_slots(spec, layout);

  GeneratedKernel k;
  k.name = spec.name;
  k.level = level.value();
  k.mode = mode;
  for (const auto& s : spec.sources) k.source_layouts.push_back(s.layout);
  for (const auto& t : spec.targets) k.target_layouts.push_back(t.layout);
  k.bounds = interior_bounds(spec, level);

  const int n = spec.weight_count();
  for (int w = 0; w < n; ++w) {
    k.hoisted.push_back({fmt::format("xi_{}", w), w, slots[static_cast<std::size_t>(w)]});
  }

  // One temporary per distinct (source, dx, dy), numbered after the weights.
  std::map<std::tuple<int, int, int>, std::string> temps;
  int next = n;
  for (const auto& u : spec.updates) {
    PlanUpdate pu;
    pu.target = u.target;
    for (const auto& a : u.terms) {
      const auto key = std::make_tuple(a.source, a.dx, a.dy);
      auto it = temps.find(key);
      if (it == temps.end()) it = temps.emplace(key, fmt::format("xi_{}", next++)).first;
      const Layout sl = spec.sources[static_cast<std::size_t>(a.source)].layout;
      pu.terms.push_back({a.source, a.dy, a.dx + row_stride(sl, level) * a.dy, a.weight, it->second});
    }
    k.plan.push_back(std::move(pu));
  }
  k.source_text = render(k, spec);
  return k;
}

index_t plan_index(const GeneratedKernel& kernel, const PlanAccess& access, index_t x, index_t y) {
  const Level level(kernel.level);
  const Layout layout = kernel.source_layouts.at(static_cast<std::size_t>(access.source));
  const index_t ys = y + access.dy;
  return x + row_stride(layout, level) * y - ys * (ys + 1) / 2 + access.constant;
}

void execute_plan(const GeneratedKernel& kernel, std::span<const double> weights,
                  std::span<const TriangleField* const> sources,
                  std::span<TriangleField* const> targets) {
  const Level level(kernel.level);
  if (sources.size() != kernel.source_layouts.size() ||
      targets.size() != kernel.target_layouts.size()) {
    throw ShapeError(kernel.name + ": wrong number of source or target fields");
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i]->level() != level || sources[i]->layout() != kernel.source_layouts[i]) {
      throw ShapeError(fmt::format("{}: source {} has wrong shape", kernel.name, i));
    }
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i]->level() != level || targets[i]->layout() != kernel.target_layouts[i]) {
      throw ShapeError(fmt::format("{}: target {} has wrong shape", kernel.name, i));
    }
  }
  std::vector<double> w;
  for (const auto& h : kernel.hoisted) {
    if (static_cast<std::size_t>(h.slot) >= weights.size()) {
      throw SpecError(fmt::format("{}: weight slot {} outside data array of {}", kernel.name,
                                  h.slot, weights.size()));
    }
    w.push_back(weights[static_cast<std::size_t>(h.slot)]);
  }

  const auto& b = kernel.bounds;
  for (index_t y = b.y_begin; y < b.y_end; ++y) {
    for (index_t x = b.x_begin; x < b.x_end(y); ++x) {
      for (const auto& u : kernel.plan) {
        double sum = 0.0;
        bool first = true;
        for (const auto& a : u.terms) {
          const TriangleField& s = *sources[static_cast<std::size_t>(a.source)];
          const double term = s[plan_index(kernel, a, x, y)] * w[static_cast<std::size_t>(a.weight)];
          sum = first ? term : sum + term;
          first = false;
        }
        TriangleField& t = *targets[static_cast<std::size_t>(u.target)];
        double& d = t[layout_index_unchecked(t.layout(), x, y, level)];
        d = kernel.mode == UpdateMode::assign ? sum : d + sum;
      }
    }
  }
}

}  // namespace p2ecm
