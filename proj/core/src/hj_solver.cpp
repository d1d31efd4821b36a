#include "hjtlt/hj_solver.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

#include "hjtlt/errors.hpp"

namespace hjtlt {

namespace {

std::atomic<std::uint64_t> g_solve_count{0};

int thread_count() {
  if (const char* env = std::getenv("HJTLT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Deterministic data-parallel map: fixed chunking, each index written by
// exactly one worker, so results are identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, const Fn& fn) {
  const int threads = thread_count();
  if (threads <= 1 || n < 4096) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int t = 1; t < threads; ++t) {
    const std::size_t b = std::min(n, chunk * t);
    const std::size_t e = std::min(n, chunk * (t + 1));
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::size_t{0}, std::min(n, chunk));
  for (auto& th : pool) th.join();
}

void validate_options(const SolveOptions& opts) {
  if (!(opts.horizon > 0)) throw ValidationError("solve horizon must be positive");
  if (!(opts.cfl > 0) || opts.cfl > 1.0) throw ValidationError("CFL factor must be in (0, 1]");
  if (!(opts.kappa >= 0)) throw ValidationError("kappa must be non-negative");
}

struct DynamicsCache {
  std::vector<double> f;  // size * nx
  std::vector<double> g;  // size * nx * nu
  std::vector<double> alpha;
  std::vector<double> u_lo_term, u_hi_term;  // per control dim: bounds
};

DynamicsCache cache_dynamics(const Grid& grid, const ControlAffineModel& model) {
  if (model.state_dim != grid.dim())
    throw ValidationError("model state dimension does not match the grid");
  const std::size_t size = grid.size();
  const int nx = model.state_dim;
  const int nu = model.control_dim;
  DynamicsCache c;
  c.f.resize(size * nx);
  c.g.resize(size * nx * nu);
  std::vector<double> z(nx);
  for (std::size_t i = 0; i < size; ++i) {
    grid.point(i, z);
    model.drift(z, std::span<double>(&c.f[i * nx], nx));
    model.input_matrix(z, std::span<double>(&c.g[i * nx * nu], static_cast<std::size_t>(nx) * nu));
  }
  for (double v : c.f)
    if (!std::isfinite(v)) throw SolverError("drift is not finite on the grid domain");
  for (double v : c.g)
    if (!std::isfinite(v)) throw SolverError("input matrix is not finite on the grid domain");

  std::vector<double> u_abs(nu);
  for (int j = 0; j < nu; ++j) u_abs[j] = std::max(std::abs(model.u_min[j]), std::abs(model.u_max[j]));
  c.alpha.assign(nx, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    for (int d = 0; d < nx; ++d) {
      double a = std::abs(c.f[i * nx + d]);
      for (int j = 0; j < nu; ++j) a += std::abs(c.g[(i * nx + d) * nu + j]) * u_abs[j];
      if (a > c.alpha[d]) c.alpha[d] = a;
    }
  }
  c.u_lo_term = model.u_min;
  c.u_hi_term = model.u_max;
  return c;
}

TimedValueField evolve(const ValueField& terminal, const ValueField* constraint,
                       const ControlAffineModel& model, const SolveOptions& opts,
                       OptimalMode mode) {
  validate_options(opts);
  g_solve_count.fetch_add(1, std::memory_order_relaxed);

  const auto grid_ptr = terminal.grid_ptr();
  const Grid& grid = *grid_ptr;
  if (constraint && constraint->grid() != grid)
    throw ValidationError("constraint field must live on the target's grid");

  const DynamicsCache dyn = cache_dynamics(grid, model);
  const int nx = model.state_dim;
  const int nu = model.control_dim;
  const std::size_t size = grid.size();

  double rate = 0.0;
  for (int d = 0; d < nx; ++d) rate += dyn.alpha[d] / grid.spacing()[d];
  int steps;
  double dt;
  if (rate > 0 && std::isfinite(rate)) {
    const double dt_max = opts.cfl / rate;
    steps = static_cast<int>(std::ceil(opts.horizon / dt_max - 1e-12));
    if (steps < 1)
      throw SolverError("CFL bound yields zero time steps over the horizon");
    dt = opts.horizon / steps;
  } else {
    // Frozen dynamics: the evolution is identically zero.
    steps = 1;
    dt = opts.horizon;
  }

  std::vector<double> times;
  std::vector<ValueField> slices;
  times.reserve(steps + 1);
  slices.reserve(steps + 1);

  ValueField v0 = terminal;
  if (constraint)
    for (std::size_t i = 0; i < size; ++i) v0[i] = std::max(v0[i], (*constraint)[i]);
  times.push_back(0.0);
  slices.push_back(std::move(v0));

  const bool reach = (mode == OptimalMode::Reach);
  std::vector<double> u_abs(nu);
  for (int j = 0; j < nu; ++j)
    u_abs[j] = std::max(std::abs(dyn.u_lo_term[j]), std::abs(dyn.u_hi_term[j]));

  for (int k = 1; k <= steps; ++k) {
    const ValueField& prev = slices.back();
    ValueField next(grid_ptr);
    std::atomic<bool> finite{true};

    parallel_for(size, [&](std::size_t b, std::size_t e) {
      double pbar[8];
      bool ok = true;
      for (std::size_t i = b; i < e; ++i) {
        const double* fi = &dyn.f[i * nx];
        const double* gi = &dyn.g[i * nx * nu];
        // Local Lax-Friedrichs: the dissipation coefficient is the pointwise
        // bound on |dH/dp_d|; the global bound only sets the CFL step.
        double dissipation = 0.0;
        for (int d = 0; d < nx; ++d) {
          const double pl = left_diff(prev, i, d);
          const double pr = right_diff(prev, i, d);
          pbar[d] = 0.5 * (pl + pr);
          double ad = std::abs(fi[d]);
          for (int j = 0; j < nu; ++j) ad += std::abs(gi[d * nu + j]) * u_abs[j];
          dissipation += 0.5 * ad * (pr - pl);
        }
        double ham = 0.0;
        for (int d = 0; d < nx; ++d) ham += pbar[d] * fi[d];
        for (int j = 0; j < nu; ++j) {
          double c = 0.0;
          for (int d = 0; d < nx; ++d) c += pbar[d] * gi[d * nu + j];
          const double lo = c * dyn.u_lo_term[j];
          const double hi = c * dyn.u_hi_term[j];
          ham += reach ? std::min(lo, hi) : std::max(lo, hi);
        }
        double value = prev[i] + dt * (ham + dissipation);
        if (value > prev[i]) value = prev[i];  // tube freezing
        if (constraint) value = std::max(value, (*constraint)[i]);
        ok &= std::isfinite(value);
        next[i] = value;
      }
      if (!ok) finite.store(false, std::memory_order_relaxed);
    });

    if (!finite.load())
      throw SolverError("non-finite values during evolution at step " + std::to_string(k));
    times.push_back(-dt * k);
    slices.push_back(std::move(next));
  }
  // Land exactly on -T so downstream horizon arithmetic is stable.
  times.back() = -opts.horizon;
  return TimedValueField(std::move(times), std::move(slices));
}

}  // namespace

double membership_threshold(const Grid& grid, const SolveOptions& opts) {
  switch (opts.direction) {
    case ApproxDirection::Under: return -opts.kappa * grid.max_spacing();
    case ApproxDirection::Over: return opts.kappa * grid.max_spacing();
    case ApproxDirection::Exact: return 0.0;
    default: throw ValidationError("Invalid is not a solve direction");
  }
}

TimedValueField solve_reach(const ValueField& target, const ValueField* constraint,
                            const ControlAffineModel& model, const SolveOptions& opts) {
  return evolve(target, constraint, model, opts, OptimalMode::Reach);
}

TimedValueField solve_avoid(const ValueField& avoid, const ControlAffineModel& model,
                            const SolveOptions& opts) {
  return evolve(avoid, nullptr, model, opts, OptimalMode::Avoid);
}

TimedValueField solve_rci(const ValueField& candidate, const ControlAffineModel& model,
                          const SolveOptions& opts) {
  ValueField negated(candidate.grid_ptr());
  for (std::size_t i = 0; i < negated.data().size(); ++i) negated[i] = -candidate[i];
  TimedValueField tube = evolve(negated, nullptr, model, opts, OptimalMode::Avoid);
  for (auto& slice : tube.slices())
    for (double& v : slice.data()) v = -v;
  return tube;
}

std::uint64_t solve_invocations() { return g_solve_count.load(); }

}  // namespace hjtlt
