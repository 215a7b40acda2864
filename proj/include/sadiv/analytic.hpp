#pragma once

#include "sadiv/channel.hpp"
#include "sadiv/optimize.hpp"

namespace sadiv {

/// Optimal load and the throughput reached there.
struct PeakPoint {
  double rho_star = 0.0;
  double t_star = 0.0;
};

/// Lower bound on the summed downlink rate of any relay subset of a given size.
struct SubsetRateBound {
  unsigned subset_size = 0;
  double bound = 0.0;
};

/// Binomial coefficient as a double.
double binomial(unsigned n, unsigned k);

/// Long-run rate at which a fixed set of `k` relays all decode the same
/// packet: rho (1-eps)^k exp(-rho (1 - eps^k)).
double common_decode_rate(double rho, double eps, unsigned k);

/// Single-receiver slotted Aloha with erasures; k_relays is ignored.
double throughput_sa(const ChannelParams& p);

/// Closed form for two receivers; k_relays is ignored.
double throughput_uplink_two(const ChannelParams& p);

/// Average number of distinct packets collected per slot by K relays.
double throughput_uplink(const ChannelParams& p);

/// T_{up,K} - T_{up,K-1}. Requires k_relays >= 2.
double incremental_gain(const ChannelParams& p);

/// Probability that a transmitted packet is collected by no relay.
double packet_loss(const ChannelParams& p);

/// Numerically maximizes throughput_uplink over rho in (0, 10/(1-eps)].
/// Throws DegenerateChannelError when eps == 1.
PeakPoint peak_throughput(double eps, unsigned k_relays);

/// Two-relay peak estimate obtained at rho = 1/(1-eps).
double peak_approx_two(double eps);

/// Load at which packet_loss reaches `zeta_target`, by bisection.
/// Throws UnreachableTargetError if zeta_target <= eps^K.
double load_for_target_plr(double eps, unsigned k_relays, double zeta_target);

/// Extra packets per slot recovered by gateway SIC with two A&F relays.
double sic_gain_two(const ChannelParams& p);

/// throughput_uplink_two + sic_gain_two.
double throughput_af_two(const ChannelParams& p);

/// Numerically maximizes throughput_af_two over rho in (0, 10/(1-eps)].
PeakPoint peak_throughput_af_two(double eps);

/// A&F peak estimate obtained at rho = 1/(1-eps).
double peak_approx_af_two(double eps);

/// Rate bound for any relay subset S with |S| = subset_size: the long-run
/// rate of packets collected inside S and by nobody outside S.
SubsetRateBound rate_bound(const ChannelParams& p, unsigned subset_size);

}  // namespace sadiv
