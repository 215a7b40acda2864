#include "sadiv/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/core.h>

#include "sadiv/errors.hpp"

namespace sadiv {

namespace {

constexpr double kPlrTolerance = 1e-10;

double sign(unsigned k) { return (k % 2 == 0) ? 1.0 : -1.0; }

double optimizer_upper_bracket(double eps) { return 10.0 / (1.0 - eps); }

void require_open_eps(double eps, const char* what) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::invalid_argument(fmt::format("{}: eps must lie in [0, 1), got {}", what, eps));
  if (eps == 1.0)
    throw DegenerateChannelError(
        fmt::format("{}: eps == 1 erases every packet, throughput is identically zero", what));
}

}  // namespace

double binomial(unsigned n, unsigned k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (unsigned i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / i;
  return std::round(c);
}

double common_decode_rate(double rho, double eps, unsigned k) {
  return rho * std::pow(1.0 - eps, k) * std::exp(-rho * (1.0 - std::pow(eps, k)));
}

double throughput_sa(const ChannelParams& p) {
  p.validate();
  const double g = p.rho * (1.0 - p.eps);
  return g * std::exp(-g);
}

double throughput_uplink_two(const ChannelParams& p) {
  p.validate();
  const double q = 1.0 - p.eps;
  return 2.0 * p.rho * q * std::exp(-p.rho * q) -
         p.rho * q * q * std::exp(-p.rho * (1.0 - p.eps * p.eps));
}

double throughput_uplink(const ChannelParams& p) {
  p.validate();
  double t = 0.0;
  for (unsigned k = 1; k <= p.k_relays; ++k)
    t += sign(k - 1) * binomial(p.k_relays, k) * common_decode_rate(p.rho, p.eps, k);
  return t;
}

double incremental_gain(const ChannelParams& p) {
  p.validate();
  if (p.k_relays < 2) throw std::invalid_argument("incremental_gain needs k_relays >= 2");
  double g = 0.0;
  for (unsigned k = 1; k <= p.k_relays; ++k)
    g += sign(k - 1) * binomial(p.k_relays - 1, k - 1) * common_decode_rate(p.rho, p.eps, k);
  return g;
}

double packet_loss(const ChannelParams& p) {
  p.validate();
  double z = 0.0;
  for (unsigned k = 0; k <= p.k_relays; ++k)
    z += sign(k) * binomial(p.k_relays, k) * std::pow(1.0 - p.eps, k) *
         std::exp(-p.rho * (1.0 - std::pow(p.eps, k)));
  return std::clamp(z, 0.0, 1.0);
}

PeakPoint peak_throughput(double eps, unsigned k_relays) {
  require_open_eps(eps, "peak_throughput");
  if (k_relays < 1) throw std::invalid_argument("peak_throughput: k_relays must be >= 1");
  const auto f = [&](double rho) { return throughput_uplink({rho, eps, k_relays}); };
  const Maximum m = maximize_scalar(f, 0.0, optimizer_upper_bracket(eps));
  return {m.x, m.value};
}

double peak_approx_two(double eps) {
  require_open_eps(eps, "peak_approx_two");
  return 2.0 / std::numbers::e - (1.0 - eps) * std::exp(-1.0 - eps);
}

double load_for_target_plr(double eps, unsigned k_relays, double zeta_target) {
  const ChannelParams base{0.0, eps, k_relays};
  base.validate();
  if (!(zeta_target < 1.0))
    throw std::invalid_argument(
        fmt::format("load_for_target_plr: target {} must be below 1", zeta_target));
  const double floor = std::pow(eps, k_relays);
  if (!(zeta_target > floor))
    throw UnreachableTargetError(fmt::format(
        "target loss {} is at or below the erasure floor eps^K = {}", zeta_target, floor));

  const auto loss = [&](double rho) { return packet_loss({rho, eps, k_relays}); };
  double lo = 0.0;
  double hi = 1.0;
  while (loss(hi) < zeta_target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) throw UnreachableTargetError("load_for_target_plr: no bracket found");
  }
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    mid = 0.5 * (lo + hi);
    const double z = loss(mid);
    if (std::abs(z - zeta_target) <= kPlrTolerance) break;
    (z < zeta_target ? lo : hi) = mid;
  }
  return mid;
}

double sic_gain_two(const ChannelParams& p) {
  p.validate();
  const double q = 1.0 - p.eps;
  return 2.0 * p.rho * p.rho * p.eps * q * q * q * std::exp(-p.rho * (1.0 - p.eps * p.eps));
}

double throughput_af_two(const ChannelParams& p) {
  return throughput_uplink_two(p) + sic_gain_two(p);
}

PeakPoint peak_throughput_af_two(double eps) {
  require_open_eps(eps, "peak_throughput_af_two");
  const auto f = [&](double rho) { return throughput_af_two({rho, eps, 2}); };
  const Maximum m = maximize_scalar(f, 0.0, optimizer_upper_bracket(eps));
  return {m.x, m.value};
}

double peak_approx_af_two(double eps) {
  require_open_eps(eps, "peak_approx_af_two");
  return 2.0 / std::numbers::e - std::exp(-1.0 - eps) * (1.0 - 3.0 * eps + 2.0 * eps * eps);
}

SubsetRateBound rate_bound(const ChannelParams& p, unsigned subset_size) {
  p.validate();
  if (subset_size < 1 || subset_size > p.k_relays)
    throw std::invalid_argument(
        fmt::format("rate_bound: subset size {} outside [1, {}]", subset_size, p.k_relays));
  const unsigned outside = p.k_relays - subset_size;
  double b = throughput_uplink(p);
  for (unsigned k = 1; k <= outside; ++k)
    b += sign(k) * binomial(outside, k) * common_decode_rate(p.rho, p.eps, k);
  return {subset_size, b};
}

}  // namespace sadiv
