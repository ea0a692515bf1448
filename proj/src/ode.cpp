#include <cmc/ode.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cmc {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double scaled_rms(const Vector& v, const Vector& y0, const Vector& y1, double atol, double rtol) {
  if (v.size() == 0) return 0.0;
  double acc = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = std::abs(v(i)) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

DormandPrince45::DormandPrince45(Rhs f, OdeOptions opts) : f_(std::move(f)), opts_(opts) {
  if (!(opts_.rtol > 0) || !(opts_.atol > 0)) fail(ErrorCode::InvalidArgument, "integrator tolerances must be positive");
}

double DormandPrince45::initial_step(double t, const Vector& y, const Vector& f0, double t_end) const {
  if (opts_.h_initial > 0) return std::min(opts_.h_initial, t_end - t);
  const double d0 = scaled_rms(y, y, y, opts_.atol, opts_.rtol);
  const double d1v = scaled_rms(f0, y, y, opts_.atol, opts_.rtol);
  double h0 = (d0 < 1e-5 || d1v < 1e-5) ? 1e-6 : 0.01 * d0 / d1v;
  h0 = std::min(h0, t_end - t);
  Vector y1 = y + h0 * f0;
  Vector f1(y.size());
  eval(t + h0, y1, f1);
  const double d2 = scaled_rms(f1 - f0, y, y, opts_.atol, opts_.rtol) / h0;
  const double big = std::max(d1v, d2);
  const double h1 = big <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / big, 1.0 / 5.0);
  return std::min({100 * h0, h1, t_end - t, opts_.h_max});
}

Vector DormandPrince45::stages(double t, const Vector& y, const Vector& k1, double h,
                               std::array<Vector, 5>& k) const {
  Vector tmp = y + h * a21 * k1;
  k[0].resize(y.size());
  eval(t + c2 * h, tmp, k[0]);
  tmp = y + h * (a31 * k1 + a32 * k[0]);
  k[1].resize(y.size());
  eval(t + c3 * h, tmp, k[1]);
  tmp = y + h * (a41 * k1 + a42 * k[0] + a43 * k[1]);
  k[2].resize(y.size());
  eval(t + c4 * h, tmp, k[2]);
  tmp = y + h * (a51 * k1 + a52 * k[0] + a53 * k[1] + a54 * k[2]);
  k[3].resize(y.size());
  eval(t + c5 * h, tmp, k[3]);
  tmp = y + h * (a61 * k1 + a62 * k[0] + a63 * k[1] + a64 * k[2] + a65 * k[3]);
  k[4].resize(y.size());
  eval(t + h, tmp, k[4]);
  return y + h * (b1 * k1 + b3 * k[1] + b4 * k[2] + b5 * k[3] + b6 * k[4]);
}

Vector DormandPrince45::single_step(double t, const Vector& y, const Vector& f0, double h) const {
  std::array<Vector, 5> k;
  return stages(t, y, f0, h, k);
}

DormandPrince45::Step DormandPrince45::step(double t, const Vector& y, const Vector& f0, double h, double t_end) {
  h = std::min({h, t_end - t, opts_.h_max});
  std::size_t rejects = 0;
  std::array<Vector, 5> k;
  Vector k7(y.size());
  while (true) {
    if (accepted_ + rejected_ >= opts_.max_steps) {
      std::ostringstream msg;
      msg << "integrator exceeded " << opts_.max_steps << " steps at t = " << t << " (h = " << h << ")";
      fail(ErrorCode::Integrator, msg.str());
    }
    const double hmin = 1e-14 * std::max(1.0, std::abs(t));
    if (!(h > hmin)) {
      std::ostringstream msg;
      msg << "integrator step underflow at t = " << t << " (h = " << h << ")";
      fail(ErrorCode::Integrator, msg.str());
    }

    Vector y1 = stages(t, y, f0, h, k);
    eval(t + h, y1, k7);
    const Vector err = h * (e1 * f0 + e3 * k[1] + e4 * k[2] + e5 * k[3] + e6 * k[4] + e7 * k7);
    const double en = scaled_rms(err, y, y1, opts_.atol, opts_.rtol);

    if (!std::isfinite(en)) {
      ++rejected_;
      if (++rejects > opts_.max_rejects) {
        std::ostringstream msg;
        msg << "integrator produced non-finite values at t = " << t << " (h = " << h << ")";
        fail(ErrorCode::Integrator, msg.str());
      }
      h *= 0.1;
      continue;
    }

    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    if (en <= 1.0) {
      ++accepted_;
      Step s;
      s.t0 = t;
      s.h = h;
      s.y0 = y;
      s.y1 = std::move(y1);
      s.k1 = f0;
      s.k7 = std::move(k7);
      s.dense = h * (d1 * f0 + d3 * k[1] + d4 * k[2] + d5 * k[3] + d6 * k[4] + d7 * s.k7);
      s.h_next = std::min(h * fac, opts_.h_max);
      s.error = en;
      return s;
    }
    ++rejected_;
    if (++rejects > opts_.max_rejects) {
      std::ostringstream msg;
      msg << "integrator could not meet tolerance at t = " << t << " (h = " << h << ", error norm = " << en
          << ", rtol = " << opts_.rtol << ", atol = " << opts_.atol << ")";
      fail(ErrorCode::Integrator, msg.str());
    }
    h *= std::max(0.2, fac);
  }
}

Vector DormandPrince45::interpolate(const Step& s, double t) {
  const double theta = (t - s.t0) / s.h;
  const double theta1 = 1.0 - theta;
  const Vector r2 = s.y1 - s.y0;
  const Vector r3 = s.h * s.k1 - r2;
  const Vector r4 = r2 - s.h * s.k7 - r3;
  return s.y0 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * s.dense)));
}

}  // namespace cmc
