#include "pgdqn/envkit/classic_control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pgdqn {

namespace {
constexpr double kPi = std::numbers::pi;

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double wrap_angle(double x) {
  const double span = 2.0 * kPi;
  while (x > kPi) x -= span;
  while (x < -kPi) x += span;
  return x;
}
}  // namespace

void EpisodicEnvBase::require_active() const {
  if (!active_) throw std::logic_error(name() + ": step() on a finished episode");
}

// ---------------------------------------------------------------- cart-pole

std::vector<double> CartPoleEnv::reset() {
  x_ = rng_.uniform(-0.05, 0.05);
  x_dot_ = rng_.uniform(-0.05, 0.05);
  theta_ = rng_.uniform(-0.05, 0.05);
  theta_dot_ = rng_.uniform(-0.05, 0.05);
  begin_episode();
  return {x_, x_dot_, theta_, theta_dot_};
}

StepResult CartPoleEnv::step(int action) {
  require_active();
  if (action != 0 && action != 1) throw std::invalid_argument("cartpole: bad action");

  constexpr double gravity = 9.8;
  constexpr double mass_cart = 1.0;
  constexpr double mass_pole = 0.1;
  constexpr double total_mass = mass_cart + mass_pole;
  constexpr double half_length = 0.5;
  constexpr double pole_mass_length = mass_pole * half_length;
  constexpr double force_mag = 10.0;
  constexpr double tau = 0.02;
  constexpr double x_threshold = 2.4;
  const double theta_threshold = 12.0 * 2.0 * kPi / 360.0;

  const double force = action == 1 ? force_mag : -force_mag;
  const double cos_t = std::cos(theta_);
  const double sin_t = std::sin(theta_);
  const double temp = (force + pole_mass_length * theta_dot_ * theta_dot_ * sin_t) / total_mass;
  const double theta_acc = (gravity * sin_t - cos_t * temp) /
                           (half_length * (4.0 / 3.0 - mass_pole * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  // Euler step; positions advance on the previous velocities.
  x_ += tau * x_dot_;
  x_dot_ += tau * x_acc;
  theta_ += tau * theta_dot_;
  theta_dot_ += tau * theta_acc;

  StepResult r;
  r.next_state = {x_, x_dot_, theta_, theta_dot_};
  r.reward = 1.0;
  r.terminal = std::abs(x_) > x_threshold || std::abs(theta_) > theta_threshold;
  finish_step(r);
  return r;
}

// ------------------------------------------------------------- mountain car

std::vector<double> MountainCarEnv::reset() {
  position_ = rng_.uniform(-0.6, -0.4);
  velocity_ = 0.0;
  begin_episode();
  return {position_, velocity_};
}

StepResult MountainCarEnv::step(int action) {
  require_active();
  if (action < 0 || action > 2) throw std::invalid_argument("mountaincar: bad action");

  velocity_ += (action - 1) * 0.001 + std::cos(3.0 * position_) * (-0.0025);
  velocity_ = clamp(velocity_, -0.07, 0.07);
  position_ += velocity_;
  position_ = clamp(position_, -1.2, 0.6);
  if (position_ == -1.2 && velocity_ < 0.0) velocity_ = 0.0;

  StepResult r;
  r.next_state = {position_, velocity_};
  r.reward = -1.0;
  r.terminal = position_ >= 0.5;
  finish_step(r);
  return r;
}

// ------------------------------------------------------------------ acrobot

namespace {

// Book-variant dynamics; state is (t1, t2, dt1, dt2), torque in {-1, 0, 1}.
std::array<double, 4> acrobot_dsdt(const std::array<double, 4>& s, double torque) {
  constexpr double m1 = 1.0, m2 = 1.0;
  constexpr double l1 = 1.0;
  constexpr double lc1 = 0.5, lc2 = 0.5;
  constexpr double i1 = 1.0, i2 = 1.0;
  constexpr double g = 9.8;

  const double t1 = s[0], t2 = s[1], dt1 = s[2], dt2 = s[3];
  const double d1 =
      m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(t2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - kPi / 2.0);
  const double phi1 = -m2 * l1 * lc2 * dt2 * dt2 * std::sin(t2) -
                      2.0 * m2 * l1 * lc2 * dt2 * dt1 * std::sin(t2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(t1 - kPi / 2.0) + phi2;
  const double ddt2 =
      (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dt1 * dt1 * std::sin(t2) - phi2) /
      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddt1 = -(d2 * ddt2 + phi1) / d1;
  return {dt1, dt2, ddt1, ddt2};
}

std::array<double, 4> axpy(const std::array<double, 4>& y, const std::array<double, 4>& k,
                           double h) {
  return {y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]};
}

std::array<double, 4> rk4_step(const std::array<double, 4>& s, double torque, double dt) {
  const auto k1 = acrobot_dsdt(s, torque);
  const auto k2 = acrobot_dsdt(axpy(s, k1, dt / 2.0), torque);
  const auto k3 = acrobot_dsdt(axpy(s, k2, dt / 2.0), torque);
  const auto k4 = acrobot_dsdt(axpy(s, k3, dt), torque);
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i)
    out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace

std::vector<double> AcrobotEnv::reset() {
  for (auto& v : s_) v = rng_.uniform(-0.1, 0.1);
  begin_episode();
  return observation();
}

void AcrobotEnv::set_joint_state(const std::array<double, 4>& s) {
  s_ = s;
  begin_episode();
}

std::vector<double> AcrobotEnv::observation() const {
  return {std::cos(s_[0]), std::sin(s_[0]), std::cos(s_[1]), std::sin(s_[1]), s_[2], s_[3]};
}

StepResult AcrobotEnv::step(int action) {
  require_active();
  if (action < 0 || action > 2) throw std::invalid_argument("acrobot: bad action");

  const double torque = static_cast<double>(action - 1);
  s_ = rk4_step(s_, torque, 0.2);
  s_[0] = wrap_angle(s_[0]);
  s_[1] = wrap_angle(s_[1]);
  s_[2] = clamp(s_[2], -4.0 * kPi, 4.0 * kPi);
  s_[3] = clamp(s_[3], -9.0 * kPi, 9.0 * kPi);

  const bool terminal = -std::cos(s_[0]) - std::cos(s_[1] + s_[0]) > 1.0;
  StepResult r;
  r.next_state = observation();
  r.reward = terminal ? 0.0 : -1.0;
  r.terminal = terminal;
  finish_step(r);
  return r;
}

}  // namespace pgdqn
