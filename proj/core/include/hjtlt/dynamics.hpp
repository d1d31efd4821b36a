#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hjtlt {

// Control-affine dynamics  dz/dt = f(z) + g(z) u  with a box-bounded input.
struct ControlAffineModel {
  std::string name;
  int state_dim = 0;
  int control_dim = 0;
  std::vector<double> u_min, u_max;

  // Per state dimension: wrap into [wrap_lo, wrap_hi) after integration.
  std::vector<bool> periodic;
  std::vector<double> wrap_lo, wrap_hi;

  std::function<void(std::span<const double> z, std::span<double> f)> drift;
  // Row-major state_dim x control_dim.
  std::function<void(std::span<const double> z, std::span<double> g)> input_matrix;
};

// dz/dt = u, u in [-1, 1]. The workhorse for analytically checkable cases.
std::shared_ptr<const ControlAffineModel> make_integrator1d(double u_min = -1.0,
                                                            double u_max = 1.0);

// Unicycle at fixed speed: state (x, y, theta), input turn rate.
// theta is periodic on [-pi, pi).
std::shared_ptr<const ControlAffineModel> make_dubins3(double speed, double omega_max);

// Kinematic bicycle: state (x, y, theta, delta, v), inputs (steering rate,
// acceleration); wheelbase L. tan(delta) must stay finite on the grid domain.
std::shared_ptr<const ControlAffineModel> make_bicycle5(double wheelbase,
                                                        std::vector<double> u_min,
                                                        std::vector<double> u_max);

// State-independent zero dynamics; useful for static sets (f = 0, g = 0).
std::shared_ptr<const ControlAffineModel> make_frozen(int state_dim);

// Model registry keyed by name, as used by scenario files.
std::shared_ptr<const ControlAffineModel> make_model(
    const std::string& name, const std::function<double(const std::string&)>& param,
    std::vector<double> u_min, std::vector<double> u_max);

enum class OptimalMode { Reach, Avoid };

// Pointwise optimizer of the Hamiltonian input term c = p^T g(z):
// Reach minimizes c.u (u_i = u_min_i when c_i > 0, else u_max_i),
// Avoid maximizes it; ties (c_i == 0) take u_max_i in both modes.
std::vector<double> optimal_control(const ControlAffineModel& model,
                                    std::span<const double> z,
                                    std::span<const double> p, OptimalMode mode);

// One RK4 step with the control held constant; wraps periodic dimensions.
std::vector<double> step(const ControlAffineModel& model, std::span<const double> z,
                         std::span<const double> u, double dt);

}  // namespace hjtlt
