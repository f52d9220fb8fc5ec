#pragma once

#include <span>
#include <vector>

#include "p2ecm/fields.hpp"
#include "p2ecm/stencil_spec.hpp"

namespace p2ecm {

/// Whether a kernel overwrites its targets or adds its result to them.
enum class UpdateMode { assign, add };

// The four apply kernels. Each walks the interior domain of its built-in
// spec (y outer, x inner) and evaluates the terms in listing order, so the
// results equal reference_apply bit for bit. Entries outside the interior
// domain are never written.

void apply_vtv(const VertexField& src, std::span<const double> weights, VertexField& dst,
               UpdateMode mode = UpdateMode::assign);

void apply_etv(const EdgeField& src_x, const EdgeField& src_y, const EdgeField& src_xy,
               std::span<const double> weights, VertexField& dst,
               UpdateMode mode = UpdateMode::assign);

void apply_vte(const VertexField& src, std::span<const double> weights, EdgeField& dst_x,
               EdgeField& dst_y, EdgeField& dst_xy, UpdateMode mode = UpdateMode::assign);

void apply_ete(const EdgeField& src_x, const EdgeField& src_y, const EdgeField& src_xy,
               std::span<const double> weights, EdgeField& dst_x, EdgeField& dst_y,
               EdgeField& dst_xy, UpdateMode mode = UpdateMode::assign);

/// Runs one of the four kernels between the matching parts of two P2 functions.
void apply_kernel(KernelId kernel, const P2Operator& op, const P2Function& src, P2Function& dst,
                  UpdateMode mode = UpdateMode::assign);

/// Fields of `src` / `dst` in the order of builtin_spec(kernel).sources / targets.
struct KernelOperands {
  std::vector<const TriangleField*> sources;
  std::vector<TriangleField*> targets;
};

KernelOperands kernel_operands(KernelId kernel, const P2Function& src, P2Function& dst);

/// Full operator as four passes: vtv writes the vertex part, etv adds to it,
/// vte writes the edge parts, ete adds to them.
void apply_p2(const P2Operator& op, const P2Function& src, P2Function& dst);

/// Single sweep computing the same sums as apply_p2 (vertex-source term
/// first, then edge-source term). Results are bit-identical to apply_p2.
void apply_p2_fused(const P2Operator& op, const P2Function& src, P2Function& dst);

/// Slow interpreter over a StencilAccessSpec. `sources` and `targets` follow
/// the order of spec.sources / spec.targets. Defines the reference summation
/// order for all kernels.
void reference_apply(const StencilAccessSpec& spec, std::span<const double> weights,
                     std::span<const TriangleField* const> sources,
                     std::span<TriangleField* const> targets,
                     UpdateMode mode = UpdateMode::assign);

/// Interior iteration count of a kernel at a level (flop accounting).
index_t interior_size(KernelId kernel, Level level);

/// Multiplies and adds per interior iteration: 7/6, 12/11, 12/9, 15/12.
struct FlopCount {
  int mults = 0;
  int adds = 0;
  int total() const noexcept { return mults + adds; }
};

FlopCount flops_per_iteration(const StencilAccessSpec& spec);

}  // namespace p2ecm
