#include "sadiv/channel.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace sadiv {

void ChannelParams::validate() const {
  if (!(rho >= 0.0) || !std::isfinite(rho))
    throw std::invalid_argument(fmt::format("rho must be finite and >= 0, got {}", rho));
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::invalid_argument(fmt::format("eps must lie in [0, 1], got {}", eps));
  if (k_relays < 1) throw std::invalid_argument("k_relays must be >= 1");
}

}  // namespace sadiv
