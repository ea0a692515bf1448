#ifndef CMC_ODE_HPP
#define CMC_ODE_HPP

// Embedded Dormand-Prince 5(4) stepper with FSAL and fourth-order dense output.

#include <cmc/fock.hpp>

#include <array>
#include <functional>
#include <limits>

namespace cmc {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_initial = 0.0;  // 0 picks a step from the derivative scale
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
  std::size_t max_rejects = 200;  // consecutive
};

class DormandPrince45 {
 public:
  using Rhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

  struct Step {
    double t0 = 0, h = 0;
    Vector y0, y1;
    Vector k1, k7;  // f(t0, y0), f(t0 + h, y1)
    Vector dense;   // h * sum d_i k_i
    double h_next = 0;
    double error = 0;

    double t1() const { return t0 + h; }
  };

  DormandPrince45(Rhs f, OdeOptions opts = {});

  const OdeOptions& options() const { return opts_; }

  // Suggested opening step for (t, y) with derivative f0.
  double initial_step(double t, const Vector& y, const Vector& f0, double t_end) const;

  // One accepted adaptive step starting at (t, y); the attempted size is h and
  // never exceeds t_end - t. Throws Integrator with diagnostics on failure.
  Step step(double t, const Vector& y, const Vector& f0, double h, double t_end);

  // Plain fifth-order step without error control.
  Vector single_step(double t, const Vector& y, const Vector& f0, double h) const;

  // Continuous extension inside an accepted step, t in [t0, t0 + h].
  static Vector interpolate(const Step& s, double t);

  std::size_t steps_accepted() const { return accepted_; }
  std::size_t steps_rejected() const { return rejected_; }
  std::size_t rhs_evaluations() const { return evals_; }

  void eval(double t, const Vector& y, Vector& dydt) const {
    ++evals_;
    f_(t, y, dydt);
  }

 private:
  // Stages k2..k6 for a trial step; returns the fifth-order solution.
  Vector stages(double t, const Vector& y, const Vector& k1, double h, std::array<Vector, 5>& k) const;

  Rhs f_;
  OdeOptions opts_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
  mutable std::size_t evals_ = 0;
};

}  // namespace cmc

#endif
