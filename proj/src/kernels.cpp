#include "p2ecm/kernels.hpp"

#include <string>

namespace p2ecm {

namespace {

void check_weights(std::span<const double> w, std::size_t expected, const char* kernel) {
  if (w.size() != expected) {
    throw SpecError(std::string(kernel) + ": expected " + std::to_string(expected) +
                    " weights, got " + std::to_string(w.size()));
  }
}

void check_same_level(std::initializer_list<const TriangleField*> fields, const char* kernel) {
  const Level level = (*fields.begin())->level();
  for (const auto* f : fields) {
    if (f->level() != level) {
      throw ShapeError(std::string(kernel) + ": operands live on different levels");
    }
  }
}

void check_orientation(const EdgeField& f, EdgeOrientation o, const char* kernel) {
  if (f.orientation() != o) {
    throw ShapeError(std::string(kernel) + ": expected edge orientation " + to_string(o) +
                     ", got " + to_string(f.orientation()));
  }
}

void check_distinct(std::initializer_list<const TriangleField*> sources,
                    std::initializer_list<const TriangleField*> targets, const char* kernel) {
  for (const auto* s : sources) {
    for (const auto* t : targets) {
      if (s == t) throw ShapeError(std::string(kernel) + ": target aliases a source");
    }
  }
}

inline const double* row(const TriangleField& f, index_t y) {
  return f.data() + layout_index_unchecked(f.layout(), 0, y, f.level());
}

inline double* row(TriangleField& f, index_t y) {
  return f.data() + layout_index_unchecked(f.layout(), 0, y, f.level());
}

template <UpdateMode Mode>
inline void store(double& d, double v) {
  if constexpr (Mode == UpdateMode::assign) {
    d = v;
  } else {
    d = d + v;
  }
}

template <UpdateMode Mode>
void vtv_loop(const VertexField& src, std::span<const double> w, VertexField& dst,
              const DomainBounds& b) {
  const double c0 = w[0], c1 = w[1], c2 = w[2], c3 = w[3], c4 = w[4], c5 = w[5], c6 = w[6];
  for (index_t y = b.y_begin; y < b.y_end; ++y) {
    const index_t xe = b.x_end(y);
    if (xe <= b.x_begin) break;
    const double* sm = row(src, y - 1);
    const double* s0 = row(src, y);
    const double* sp = row(src, y + 1);
    double* d = row(dst, y);
    for (index_t x = b.x_begin; x < xe; ++x) {
      const double v = sm[x + 1] * c0 + s0[x + 1] * c1 + sm[x] * c2 + s0[x] * c3 +
                       sp[x] * c4 + s0[x - 1] * c5 + sp[x - 1] * c6;
      store<Mode>(d[x], v);
    }
  }
}

template <UpdateMode Mode>
void etv_loop(const EdgeField& ex, const EdgeField& ey, const EdgeField& exy,
              std::span<const double> w, VertexField& dst, const DomainBounds& b) {
  const double c0 = w[0], c1 = w[1], c2 = w[2], c3 = w[3], c4 = w[4], c5 = w[5];
  const double c6 = w[6], c7 = w[7], c8 = w[8], c9 = w[9], c10 = w[10], c11 = w[11];
  for (index_t y = b.y_begin; y < b.y_end; ++y) {
    const index_t xe = b.x_end(y);
    if (xe <= b.x_begin) break;
    const double* xm = row(ex, y - 1);
    const double* x0 = row(ex, y);
    const double* xp = row(ex, y + 1);
    const double* ym = row(ey, y - 1);
    const double* y0 = row(ey, y);
    const double* dm = row(exy, y - 1);
    const double* d0 = row(exy, y);
    double* d = row(dst, y);
    for (index_t x = b.x_begin; x < xe; ++x) {
      const double v = xp[x] * c0 + x0[x] * c1 + x0[x - 1] * c2 + xm[x] * c3 +
                       y0[x - 1] * c4 + y0[x] * c5 + ym[x] * c6 + ym[x + 1] * c7 +
                       d0[x - 1] * c8 + d0[x] * c9 + dm[x - 1] * c10 + dm[x] * c11;
      store<Mode>(d[x], v);
    }
  }
}

template <UpdateMode Mode>
void vte_loop(const VertexField& src, std::span<const double> w, EdgeField& dx, EdgeField& dy,
              EdgeField& dxy, const DomainBounds& b) {
  const double c0 = w[0], c1 = w[1], c2 = w[2], c3 = w[3], c4 = w[4], c5 = w[5];
  const double c6 = w[6], c7 = w[7], c8 = w[8], c9 = w[9], c10 = w[10], c11 = w[11];
  for (index_t y = b.y_begin; y < b.y_end; ++y) {
    const index_t xe = b.x_end(y);
    if (xe <= b.x_begin) break;
    const double* vm = row(src, y - 1);
    const double* v0 = row(src, y);
    const double* vp = row(src, y + 1);
    double* ox = row(dx, y);
    double* oy = row(dy, y);
    double* oxy = row(dxy, y);
    for (index_t x = b.x_begin; x < xe; ++x) {
      store<Mode>(ox[x], vp[x - 1] * c0 + v0[x] * c1 + v0[x + 1] * c2 + vm[x + 1] * c3);
      store<Mode>(oxy[x], vp[x] * c4 + vp[x + 1] * c5 + v0[x] * c6 + v0[x + 1] * c7);
      store<Mode>(oy[x], vp[x - 1] * c8 + vp[x] * c9 + v0[x] * c10 + v0[x + 1] * c11);
    }
  }
}

template <UpdateMode Mode>
void ete_loop(const EdgeField& sx, const EdgeField& sy, const EdgeField& sxy,
              std::span<const double> w, EdgeField& dx, EdgeField& dy, EdgeField& dxy,
              const DomainBounds& b) {
  const double c0 = w[0], c1 = w[1], c2 = w[2], c3 = w[3], c4 = w[4];
  const double c5 = w[5], c6 = w[6], c7 = w[7], c8 = w[8], c9 = w[9];
  const double c10 = w[10], c11 = w[11], c12 = w[12], c13 = w[13], c14 = w[14];
  for (index_t y = b.y_begin; y < b.y_end; ++y) {
    const index_t xe = b.x_end(y);
    if (xe <= b.x_begin) break;
    const double* x0 = row(sx, y);
    const double* xp = row(sx, y + 1);
    const double* ym = row(sy, y - 1);
    const double* y0 = row(sy, y);
    const double* dm = row(sxy, y - 1);
    const double* d0 = row(sxy, y);
    double* ox = row(dx, y);
    double* oy = row(dy, y);
    double* oxy = row(dxy, y);
    for (index_t x = b.x_begin; x < xe; ++x) {
      store<Mode>(ox[x], x0[x] * c0 + y0[x] * c1 + ym[x + 1] * c2 + d0[x] * c3 + dm[x] * c4);
      store<Mode>(oy[x], y0[x] * c5 + x0[x] * c6 + xp[x - 1] * c7 + d0[x] * c8 + d0[x - 1] * c9);
      store<Mode>(oxy[x],
                  d0[x] * c10 + x0[x] * c11 + xp[x] * c12 + y0[x] * c13 + y0[x + 1] * c14);
    }
  }
}

DomainBounds bounds_of(KernelId id, Level level) {
  return interior_bounds(builtin_spec(id), level);
}

}  // namespace

void apply_vtv(const VertexField& src, std::span<const double> weights, VertexField& dst,
               UpdateMode mode) {
  check_weights(weights, 7, "apply_vtv");
  check_same_level({&src, &dst}, "apply_vtv");
  check_distinct({&src}, {&dst}, "apply_vtv");
  const auto b = bounds_of(KernelId::vtv, src.level());
  if (mode == UpdateMode::assign) {
    vtv_loop<UpdateMode::assign>(src, weights, dst, b);
  } else {
    vtv_loop<UpdateMode::add>(src, weights, dst, b);
  }
}

void apply_etv(const EdgeField& src_x, const EdgeField& src_y, const EdgeField& src_xy,
               std::span<const double> weights, VertexField& dst, UpdateMode mode) {
  check_weights(weights, 12, "apply_etv");
  check_same_level({&src_x, &src_y, &src_xy, &dst}, "apply_etv");
  check_orientation(src_x, EdgeOrientation::x, "apply_etv");
  check_orientation(src_y, EdgeOrientation::y, "apply_etv");
  check_orientation(src_xy, EdgeOrientation::xy, "apply_etv");
  const auto b = bounds_of(KernelId::etv, dst.level());
  if (mode == UpdateMode::assign) {
    etv_loop<UpdateMode::assign>(src_x, src_y, src_xy, weights, dst, b);
  } else {
    etv_loop<UpdateMode::add>(src_x, src_y, src_xy, weights, dst, b);
  }
}

void apply_vte(const VertexField& src, std::span<const double> weights, EdgeField& dst_x,
               EdgeField& dst_y, EdgeField& dst_xy, UpdateMode mode) {
  check_weights(weights, 12, "apply_vte");
  check_same_level({&src, &dst_x, &dst_y, &dst_xy}, "apply_vte");
  check_orientation(dst_x, EdgeOrientation::x, "apply_vte");
  check_orientation(dst_y, EdgeOrientation::y, "apply_vte");
  check_orientation(dst_xy, EdgeOrientation::xy, "apply_vte");
  const auto b = bounds_of(KernelId::vte, src.level());
  if (mode == UpdateMode::assign) {
    vte_loop<UpdateMode::assign>(src, weights, dst_x, dst_y, dst_xy, b);
  } else {
    vte_loop<UpdateMode::add>(src, weights, dst_x, dst_y, dst_xy, b);
  }
}

void apply_ete(const EdgeField& src_x, const EdgeField& src_y, const EdgeField& src_xy,
               std::span<const double> weights, EdgeField& dst_x, EdgeField& dst_y,
               EdgeField& dst_xy, UpdateMode mode) {
  check_weights(weights, 15, "apply_ete");
  check_same_level({&src_x, &src_y, &src_xy, &dst_x, &dst_y, &dst_xy}, "apply_ete");
  check_orientation(src_x, EdgeOrientation::x, "apply_ete");
  check_orientation(src_y, EdgeOrientation::y, "apply_ete");
  check_orientation(src_xy, EdgeOrientation::xy, "apply_ete");
  check_orientation(dst_x, EdgeOrientation::x, "apply_ete");
  check_orientation(dst_y, EdgeOrientation::y, "apply_ete");
  check_orientation(dst_xy, EdgeOrientation::xy, "apply_ete");
  check_distinct({&src_x, &src_y, &src_xy}, {&dst_x, &dst_y, &dst_xy}, "apply_ete");
  const auto b = bounds_of(KernelId::ete, src_x.level());
  if (mode == UpdateMode::assign) {
    ete_loop<UpdateMode::assign>(src_x, src_y, src_xy, weights, dst_x, dst_y, dst_xy, b);
  } else {
    ete_loop<UpdateMode::add>(src_x, src_y, src_xy, weights, dst_x, dst_y, dst_xy, b);
  }
}

void apply_kernel(KernelId kernel, const P2Operator& op, const P2Function& src, P2Function& dst,
                  UpdateMode mode) {
  if (src.level() != dst.level()) throw ShapeError("apply_kernel: level mismatch");
  switch (kernel) {
    case KernelId::vtv:
      apply_vtv(src.vertex, op.vtv, dst.vertex, mode);
      break;
    case KernelId::etv:
      apply_etv(src.edge_x, src.edge_y, src.edge_xy, op.etv, dst.vertex, mode);
      break;
    case KernelId::vte:
      apply_vte(src.vertex, op.vte, dst.edge_x, dst.edge_y, dst.edge_xy, mode);
      break;
    case KernelId::ete:
      apply_ete(src.edge_x, src.edge_y, src.edge_xy, op.ete, dst.edge_x, dst.edge_y,
                dst.edge_xy, mode);
      break;
  }
}

KernelOperands kernel_operands(KernelId kernel, const P2Function& src, P2Function& dst) {
  const bool vertex_source = kernel == KernelId::vtv || kernel == KernelId::vte;
  const bool vertex_target = kernel == KernelId::vtv || kernel == KernelId::etv;
  KernelOperands o;
  if (vertex_source) {
    o.sources = {&src.vertex};
  } else {
    o.sources = {&src.edge_x, &src.edge_y, &src.edge_xy};
  }
  if (vertex_target) {
    o.targets = {&dst.vertex};
  } else {
    o.targets = {&dst.edge_x, &dst.edge_y, &dst.edge_xy};
  }
  return o;
}

void apply_p2(const P2Operator& op, const P2Function& src, P2Function& dst) {
  if (&src == &dst) throw ShapeError("apply_p2: source and destination must differ");
  apply_kernel(KernelId::vtv, op, src, dst, UpdateMode::assign);
  apply_kernel(KernelId::etv, op, src, dst, UpdateMode::add);
  apply_kernel(KernelId::vte, op, src, dst, UpdateMode::assign);
  apply_kernel(KernelId::ete, op, src, dst, UpdateMode::add);
}

void apply_p2_fused(const P2Operator& op, const P2Function& src, P2Function& dst) {
  if (&src == &dst) throw ShapeError("apply_p2_fused: source and destination must differ");
  if (src.level() != dst.level()) throw ShapeError("apply_p2_fused: level mismatch");
  const Level level = src.level();
  const auto bv = bounds_of(KernelId::vtv, level);
  const auto be = bounds_of(KernelId::etv, level);
  const auto bd = bounds_of(KernelId::vte, level);  // identical to the ete bounds

  const auto& a = op.vtv;
  const auto& e = op.etv;
  const auto& p = op.vte;
  const auto& q = op.ete;

  for (index_t y = bv.y_begin; y < bv.y_end; ++y) {
    const index_t xv = bv.x_end(y);
    if (xv <= bv.x_begin) break;
    const double* sm = row(src.vertex, y - 1);
    const double* s0 = row(src.vertex, y);
    const double* sp = row(src.vertex, y + 1);
    double* dv = row(dst.vertex, y);

    const bool edge_row_v = y >= be.y_begin && y < be.y_end && be.x_end(y) > be.x_begin;
    const bool edge_row_e = y >= bd.y_begin && y < bd.y_end && bd.x_end(y) > bd.x_begin;
    const index_t xe_v = edge_row_v ? be.x_end(y) : be.x_begin;
    const double* xm = edge_row_v || edge_row_e ? row(src.edge_x, y - 1) : nullptr;
    const double* x0 = xm ? row(src.edge_x, y) : nullptr;
    const double* xp = xm ? row(src.edge_x, y + 1) : nullptr;
    const double* ym = xm ? row(src.edge_y, y - 1) : nullptr;
    const double* y0 = xm ? row(src.edge_y, y) : nullptr;
    const double* dm = xm ? row(src.edge_xy, y - 1) : nullptr;
    const double* d0 = xm ? row(src.edge_xy, y) : nullptr;

    for (index_t x = bv.x_begin; x < xv; ++x) {
      double v = sm[x + 1] * a[0] + s0[x + 1] * a[1] + sm[x] * a[2] + s0[x] * a[3] +
                 sp[x] * a[4] + s0[x - 1] * a[5] + sp[x - 1] * a[6];
      if (edge_row_v && x >= be.x_begin && x < xe_v) {
        v = v + (xp[x] * e[0] + x0[x] * e[1] + x0[x - 1] * e[2] + xm[x] * e[3] +
                 y0[x - 1] * e[4] + y0[x] * e[5] + ym[x] * e[6] + ym[x + 1] * e[7] +
                 d0[x - 1] * e[8] + d0[x] * e[9] + dm[x - 1] * e[10] + dm[x] * e[11]);
      }
      dv[x] = v;
    }

    if (!edge_row_e) continue;
    double* ox = row(dst.edge_x, y);
    double* oy = row(dst.edge_y, y);
    double* oxy = row(dst.edge_xy, y);
    for (index_t x = bd.x_begin; x < bd.x_end(y); ++x) {
      ox[x] = (sp[x - 1] * p[0] + s0[x] * p[1] + s0[x + 1] * p[2] + sm[x + 1] * p[3]) +
              (x0[x] * q[0] + y0[x] * q[1] + ym[x + 1] * q[2] + d0[x] * q[3] + dm[x] * q[4]);
      oxy[x] = (sp[x] * p[4] + sp[x + 1] * p[5] + s0[x] * p[6] + s0[x + 1] * p[7]) +
               (d0[x] * q[10] + x0[x] * q[11] + xp[x] * q[12] + y0[x] * q[13] +
                y0[x + 1] * q[14]);
      oy[x] = (sp[x - 1] * p[8] + sp[x] * p[9] + s0[x] * p[10] + s0[x + 1] * p[11]) +
              (y0[x] * q[5] + x0[x] * q[6] + xp[x - 1] * q[7] + d0[x] * q[8] +
               d0[x - 1] * q[9]);
    }
  }
}

void reference_apply(const StencilAccessSpec& spec, std::span<const double> weights,
                     std::span<const TriangleField* const> sources,
                     std::span<TriangleField* const> targets, UpdateMode mode) {
  spec.validate();
  if (static_cast<int>(weights.size()) != spec.weight_count()) {
    throw SpecError(spec.name + ": spec needs " + std::to_string(spec.weight_count()) +
                    " weights, got " + std::to_string(weights.size()));
  }
  if (sources.size() != spec.sources.size() || targets.size() != spec.targets.size()) {
    throw SpecError(spec.name + ": wrong number of source or target fields");
  }
  const Level level = targets.front()->level();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i]->level() != level || sources[i]->layout() != spec.sources[i].layout) {
      throw ShapeError(spec.name + ": source " + spec.sources[i].name + " has wrong shape");
    }
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i]->level() != level || targets[i]->layout() != spec.targets[i].layout) {
      throw ShapeError(spec.name + ": target " + spec.targets[i].name + " has wrong shape");
    }
  }

  const auto domain = interior_domain(spec, level);
  for (const auto& r : domain.rows) {
    for (index_t x = r.x_begin; x < r.x_end; ++x) {
      for (const auto& u : spec.updates) {
        double sum = 0.0;
        bool first = true;
        for (const auto& a : u.terms) {
          const TriangleField& s = *sources[static_cast<std::size_t>(a.source)];
          const double term = s[layout_index(s.layout(), x + a.dx, r.y + a.dy, level)] *
                              weights[static_cast<std::size_t>(a.weight)];
          sum = first ? term : sum + term;
          first = false;
        }
        TriangleField& t = *targets[static_cast<std::size_t>(u.target)];
        double& d = t[layout_index(t.layout(), x, r.y, level)];
        d = mode == UpdateMode::assign ? sum : d + sum;
      }
    }
  }
}

index_t interior_size(KernelId kernel, Level level) {
  return interior_domain(builtin_spec(kernel), level).size;
}

FlopCount flops_per_iteration(const StencilAccessSpec& spec) {
  FlopCount f;
  for (const auto& u : spec.updates) {
    f.mults += static_cast<int>(u.terms.size());
    f.adds += static_cast<int>(u.terms.size()) - 1;
  }
  return f;
}

}  // namespace p2ecm
