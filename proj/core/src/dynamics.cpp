#include "hjtlt/dynamics.hpp"

#include <cmath>

#include "hjtlt/errors.hpp"

namespace hjtlt {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_bounds(const ControlAffineModel& m) {
  if (m.u_min.size() != static_cast<std::size_t>(m.control_dim) ||
      m.u_max.size() != static_cast<std::size_t>(m.control_dim))
    throw ValidationError("model '" + m.name + "': control bounds must have control_dim entries");
  for (int j = 0; j < m.control_dim; ++j)
    if (!(m.u_max[j] >= m.u_min[j]))
      throw ValidationError("model '" + m.name + "': u_max must be >= u_min");
}

}  // namespace

std::shared_ptr<const ControlAffineModel> make_integrator1d(double u_min, double u_max) {
  auto m = std::make_shared<ControlAffineModel>();
  m->name = "integrator1d";
  m->state_dim = 1;
  m->control_dim = 1;
  m->u_min = {u_min};
  m->u_max = {u_max};
  m->periodic = {false};
  m->wrap_lo = {0.0};
  m->wrap_hi = {0.0};
  m->drift = [](std::span<const double>, std::span<double> f) { f[0] = 0.0; };
  m->input_matrix = [](std::span<const double>, std::span<double> g) { g[0] = 1.0; };
  check_bounds(*m);
  return m;
}

std::shared_ptr<const ControlAffineModel> make_dubins3(double speed, double omega_max) {
  if (!(omega_max > 0)) throw ValidationError("dubins3: omega_max must be positive");
  auto m = std::make_shared<ControlAffineModel>();
  m->name = "dubins3";
  m->state_dim = 3;
  m->control_dim = 1;
  m->u_min = {-omega_max};
  m->u_max = {omega_max};
  m->periodic = {false, false, true};
  m->wrap_lo = {0.0, 0.0, -kPi};
  m->wrap_hi = {0.0, 0.0, kPi};
  m->drift = [speed](std::span<const double> z, std::span<double> f) {
    f[0] = speed * std::cos(z[2]);
    f[1] = speed * std::sin(z[2]);
    f[2] = 0.0;
  };
  m->input_matrix = [](std::span<const double>, std::span<double> g) {
    g[0] = 0.0;
    g[1] = 0.0;
    g[2] = 1.0;
  };
  check_bounds(*m);
  return m;
}

std::shared_ptr<const ControlAffineModel> make_bicycle5(double wheelbase,
                                                        std::vector<double> u_min,
                                                        std::vector<double> u_max) {
  if (!(wheelbase > 0)) throw ValidationError("bicycle5: wheelbase must be positive");
  auto m = std::make_shared<ControlAffineModel>();
  m->name = "bicycle5";
  m->state_dim = 5;
  m->control_dim = 2;
  m->u_min = std::move(u_min);
  m->u_max = std::move(u_max);
  m->periodic = {false, false, true, false, false};
  m->wrap_lo = {0.0, 0.0, -kPi, 0.0, 0.0};
  m->wrap_hi = {0.0, 0.0, kPi, 0.0, 0.0};
  m->drift = [wheelbase](std::span<const double> z, std::span<double> f) {
    f[0] = z[4] * std::cos(z[2]);
    f[1] = z[4] * std::sin(z[2]);
    f[2] = z[4] * std::tan(z[3]) / wheelbase;
    f[3] = 0.0;
    f[4] = 0.0;
  };
  m->input_matrix = [](std::span<const double>, std::span<double> g) {
    for (int i = 0; i < 10; ++i) g[i] = 0.0;
    g[3 * 2 + 0] = 1.0;  // d(delta)/dt = u0
    g[4 * 2 + 1] = 1.0;  // dv/dt      = u1
  };
  check_bounds(*m);
  return m;
}

std::shared_ptr<const ControlAffineModel> make_frozen(int state_dim) {
  if (state_dim < 1) throw ValidationError("frozen model needs a positive state dimension");
  auto m = std::make_shared<ControlAffineModel>();
  m->name = "frozen";
  m->state_dim = state_dim;
  m->control_dim = 1;
  m->u_min = {0.0};
  m->u_max = {0.0};
  m->periodic.assign(state_dim, false);
  m->wrap_lo.assign(state_dim, 0.0);
  m->wrap_hi.assign(state_dim, 0.0);
  m->drift = [state_dim](std::span<const double>, std::span<double> f) {
    for (int i = 0; i < state_dim; ++i) f[i] = 0.0;
  };
  m->input_matrix = [state_dim](std::span<const double>, std::span<double> g) {
    for (int i = 0; i < state_dim; ++i) g[i] = 0.0;
  };
  check_bounds(*m);
  return m;
}

std::shared_ptr<const ControlAffineModel> make_model(
    const std::string& name, const std::function<double(const std::string&)>& param,
    std::vector<double> u_min, std::vector<double> u_max) {
  if (name == "integrator1d") {
    const double lo = u_min.empty() ? -1.0 : u_min[0];
    const double hi = u_max.empty() ? 1.0 : u_max[0];
    return make_integrator1d(lo, hi);
  }
  if (name == "dubins3") {
    const double w = param("omega_max");
    if (u_min.empty()) u_min = {-w};
    if (u_max.empty()) u_max = {w};
    auto m = make_dubins3(param("speed"), w);
    auto copy = std::make_shared<ControlAffineModel>(*m);
    copy->u_min = std::move(u_min);
    copy->u_max = std::move(u_max);
    return copy;
  }
  if (name == "bicycle5") {
    if (u_min.size() != 2 || u_max.size() != 2)
      throw ValidationError("bicycle5 needs 2-dimensional control bounds");
    return make_bicycle5(param("wheelbase"), std::move(u_min), std::move(u_max));
  }
  throw ValidationError("unknown model '" + name + "'");
}

std::vector<double> optimal_control(const ControlAffineModel& model,
                                    std::span<const double> z,
                                    std::span<const double> p, OptimalMode mode) {
  const int nx = model.state_dim;
  const int nu = model.control_dim;
  std::vector<double> g(static_cast<std::size_t>(nx) * nu);
  model.input_matrix(z, g);
  std::vector<double> u(nu);
  for (int j = 0; j < nu; ++j) {
    double c = 0.0;
    for (int i = 0; i < nx; ++i) c += p[i] * g[static_cast<std::size_t>(i) * nu + j];
    const bool pick_min = (mode == OptimalMode::Reach) ? (c > 0) : (c < 0);
    u[j] = pick_min ? model.u_min[j] : model.u_max[j];
  }
  return u;
}

namespace {

void eval_rhs(const ControlAffineModel& m, std::span<const double> z,
              std::span<const double> u, std::span<double> out,
              std::span<double> f_buf, std::span<double> g_buf) {
  m.drift(z, f_buf);
  m.input_matrix(z, g_buf);
  const int nu = m.control_dim;
  for (int i = 0; i < m.state_dim; ++i) {
    double gi = 0.0;
    for (int j = 0; j < nu; ++j) gi += g_buf[static_cast<std::size_t>(i) * nu + j] * u[j];
    out[i] = f_buf[i] + gi;
  }
}

}  // namespace

std::vector<double> step(const ControlAffineModel& model, std::span<const double> z,
                         std::span<const double> u, double dt) {
  const int n = model.state_dim;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), out(z.begin(), z.end());
  std::vector<double> f_buf(n), g_buf(static_cast<std::size_t>(n) * model.control_dim);

  eval_rhs(model, z, u, k1, f_buf, g_buf);
  for (int i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * dt * k1[i];
  eval_rhs(model, tmp, u, k2, f_buf, g_buf);
  for (int i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * dt * k2[i];
  eval_rhs(model, tmp, u, k3, f_buf, g_buf);
  for (int i = 0; i < n; ++i) tmp[i] = z[i] + dt * k3[i];
  eval_rhs(model, tmp, u, k4, f_buf, g_buf);
  for (int i = 0; i < n; ++i)
    out[i] = z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

  for (int i = 0; i < n; ++i) {
    if (!model.periodic.empty() && model.periodic[i]) {
      const double period = model.wrap_hi[i] - model.wrap_lo[i];
      double x = std::fmod(out[i] - model.wrap_lo[i], period);
      if (x < 0) x += period;
      out[i] = model.wrap_lo[i] + x;
    }
  }
  return out;
}

}  // namespace hjtlt
