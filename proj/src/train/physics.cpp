#include "psm/train/physics.hpp"

#include <cmath>
#include <stdexcept>

#include "psm/core/errors.hpp"
#include "psm/train/losses.hpp"

namespace psm::train {

ResidualScales PhysicsContext::scales() const {
  const double rho_ref = 0.5 * (scaling.rho.min + scaling.rho.max);
  ResidualScales s;
  s.mass = rho_ref / scaling.t_max;
  s.momentum = rho_ref * scaling.u.span() / scaling.t_max;
  s.energy = rho_ref * scenario.fluid.cp * scaling.T.span() / scaling.t_max;
  return s;
}

double PhysicsContext::source(double z, std::span<const double> v) const {
  if (source_override) return source_override(z, v);
  return scenario.source_at(z, v);
}

PhysicsResult physics_loss(const nn::Mlp& mlp, const std::vector<double>& params,
                           const Matrix& colloc, const PhysicsContext& ctx,
                           std::vector<double>* grad, double weight) {
  const std::size_t n = colloc.rows;
  const std::size_t dim = colloc.cols;
  if (dim != ctx.layout.input_dim()) throw std::invalid_argument("physics: input dimension mismatch");
  const auto& sc = ctx.scaling;
  const auto& fl = ctx.scenario.fluid;
  const double P = sc.p.span(), U = sc.u.span(), TR = sc.T.span();
  const ResidualScales rs = ctx.scales();

  // Primal rows, then unit directions along t* and z*.
  Matrix x(3 * n, dim);
  for (std::size_t r = 0; r < n; ++r) {
    const double zs = colloc(r, InputLayout::z_col);
    if (zs < -1e-12 || zs > 1.0 + 1e-12) throw ConfigError("physics: collocation z outside domain");
    std::copy_n(colloc.ptr() + r * dim, dim, x.ptr() + r * dim);
    x(n + r, InputLayout::t_col) = 1.0;
    x(2 * n + r, InputLayout::z_col) = 1.0;
  }
  nn::EvalTrace tr;
  mlp.forward(params, x, 2, tr);
  const Matrix& y = tr.output;

  PhysicsResult out;
  out.residuals.mass.resize(n);
  out.residuals.momentum.resize(n);
  out.residuals.energy.resize(n);
  Matrix g;
  if (grad) g.resize(3 * n, 3);
  const double inv = 1.0 / static_cast<double>(3 * n);
  std::vector<double> v(ctx.layout.n_controls);
  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double z = colloc(r, InputLayout::z_col) * sc.z_max;
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = sc.controls[j].unscale(colloc(r, ctx.layout.v_col() + j));
    }
    const auto& seg = ctx.scenario.segments[ctx.scenario.segment_at(z)];
    const double k = seg.friction_factor / (2.0 * seg.hydraulic_diameter);
    const double gz = seg.gravity_component;
    const double q = ctx.source(z, v);

    const double u = sc.u.unscale(y(r, 1));
    const double T = sc.T.unscale(y(r, 2));
    const double p_z = P * y(2 * n + r, 0) / sc.z_max;
    const double u_t = U * y(n + r, 1) / sc.t_max;
    const double u_z = U * y(2 * n + r, 1) / sc.z_max;
    const double T_t = TR * y(n + r, 2) / sc.t_max;
    const double T_z = TR * y(2 * n + r, 2) / sc.z_max;
    const double rho = density(fl, T);
    const double rb = fl.rho_b;
    const double cp = fl.cp;

    const double r_mass = -rb * T_t + rho * u_z - rb * u * T_z;
    const double r_mom = rho * u_t + rho * u * u_z + p_z - rho * gz + k * rho * u * std::abs(u);
    const double r_en = rho * cp * (T_t + u * T_z) - q;
    const double nm = r_mass / rs.mass, nu = r_mom / rs.momentum, ne = r_en / rs.energy;
    out.residuals.mass[r] = nm;
    out.residuals.momentum[r] = nu;
    out.residuals.energy[r] = ne;
    sum += logcosh(nm) + logcosh(nu) + logcosh(ne);
    if (!grad) continue;

    const double gm = weight * std::tanh(nm) * inv / rs.mass;
    const double gu = weight * std::tanh(nu) * inv / rs.momentum;
    const double ge = weight * std::tanh(ne) * inv / rs.energy;
    // Partial derivatives of the residuals with respect to the physical quantities.
    const double d_T = gm * (-rb * u_z) + gu * (-rb * (u_t + u * u_z - gz + k * u * std::abs(u))) +
                       ge * (-rb * cp * (T_t + u * T_z));
    const double d_u = gm * (-rb * T_z) + gu * (rho * u_z + 2.0 * k * rho * std::abs(u)) +
                       ge * (rho * cp * T_z);
    const double d_Tt = gm * (-rb) + ge * (rho * cp);
    const double d_Tz = gm * (-rb * u) + ge * (rho * cp * u);
    const double d_ut = gu * rho;
    const double d_uz = gm * rho + gu * rho * u;
    const double d_pz = gu;
    g(r, 1) = d_u * U;
    g(r, 2) = d_T * TR;
    g(n + r, 1) = d_ut * U / sc.t_max;
    g(n + r, 2) = d_Tt * TR / sc.t_max;
    g(2 * n + r, 0) = d_pz * P / sc.z_max;
    g(2 * n + r, 1) = d_uz * U / sc.z_max;
    g(2 * n + r, 2) = d_Tz * TR / sc.z_max;
  }
  out.loss = sum * inv;
  if (grad) mlp.backward(params, tr, g, *grad);
  return out;
}

}  // namespace psm::train
