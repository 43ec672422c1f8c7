#include "mfg/model.hpp"

#include <algorithm>
#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

void ModelSpec::validate() const {
  if (d < 1 || d1 < 1 || d2 < 1) throw InvalidArgument("model dimensions must be >= 1");
  if (d > 16 || d * d1 > 64) throw InvalidArgument("model dimensions too large (need d <= 16, d * d1 <= 64)");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("model horizon T must be positive");
  if (!drift || !diffusion || !running_cost || !terminal_cost) {
    throw InvalidArgument("model '" + name + "' is missing a coefficient function");
  }
  if (!(K > 0.0) || !(L > 0.0)) throw InvalidArgument("constants K and L must be positive");
  if (!(c0 > 0.0) || !(r0 > 0.0)) throw InvalidArgument("coercivity constants c0 and r0 must be positive");
  if (gamma_set.dim() != d2) throw InvalidArgument("action set dimension differs from d2");
  if (gamma0.size() != static_cast<std::size_t>(d2) || !gamma_set.contains(gamma0)) {
    throw InvalidArgument("gamma0 must be a point of the action set");
  }
  if (!(delta0 > 0.0) || delta0 > std::min(1.0, T)) {
    throw InvalidArgument("delta0 must lie in (0, min(1, T)]");
  }
}

}  // namespace mfg
