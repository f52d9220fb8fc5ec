#pragma once

#include <span>
#include <string>
#include <vector>

#include "p2ecm/kernels.hpp"

namespace p2ecm {

/// `slots[k]` is where weight k lives in the stencil data array. Empty means
/// the identity layout.
struct WeightsLayout {
  std::vector<int> slots;
};

struct HoistedWeight {
  std::string name;  // xi_<k>
  int weight = 0;
  int slot = 0;
};

/// One read in linearized form. For a target point (x, y) the index is
///   x + row_stride*y - (y + dy)(y + dy + 1)/2 + constant
/// with row_stride = base_width + 1 and constant = dx + row_stride*dy.
struct PlanAccess {
  int source = 0;
  int dy = 0;
  index_t constant = 0;
  int weight = 0;
  std::string temp;  // xi_<n> holding the loaded value
};

struct PlanUpdate {
  int target = 0;
  std::vector<PlanAccess> terms;
};

struct GeneratedKernel {
  std::string name;
  int level = 0;
  std::vector<Layout> source_layouts;
  std::vector<Layout> target_layouts;
  DomainBounds bounds;
  std::vector<HoistedWeight> hoisted;
  std::vector<PlanUpdate> plan;
  UpdateMode mode = UpdateMode::assign;
  std::string source_text;
};

/// Lowers `spec` to an access plan and renders it as a C loop nest with the
/// level baked in. Throws SpecError on an invalid spec or weights layout.
GeneratedKernel generate(const StencilAccessSpec& spec, const WeightsLayout& layout, Level level,
                         UpdateMode mode = UpdateMode::assign);

/// Runs the plan. `weights` is the stencil data array indexed by slot.
void execute_plan(const GeneratedKernel& kernel, std::span<const double> weights,
                  std::span<const TriangleField* const> sources,
                  std::span<TriangleField* const> targets);

/// Linear index of `layout` at (ctr_1 + dx, ctr_2 + dy), as emitted, e.g.
/// "ctr_1 + 1026*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2)) - 1".
std::string index_expression(Layout layout, int dx, int dy, Level level);

/// Index the plan computes for one access at target point (x, y).
index_t plan_index(const GeneratedKernel& kernel, const PlanAccess& access, index_t x, index_t y);

}  // namespace p2ecm
