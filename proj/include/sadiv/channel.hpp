#pragma once

namespace sadiv {

/// Uplink operating point shared by every analytic and simulated quantity.
///
/// `rho` is the Poisson intensity of transmissions per slot, `eps` the
/// on-off erasure probability of each user-relay link, `k_relays` the
/// number of receivers.
struct ChannelParams {
  double rho = 1.0;
  double eps = 0.0;
  unsigned k_relays = 1;

  /// Throws std::invalid_argument unless rho >= 0, eps in [0, 1], k >= 1.
  void validate() const;
};

}  // namespace sadiv
