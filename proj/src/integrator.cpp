#include "beamgeo/integrator.hpp"

#include <cmath>

#include "beamgeo/error.hpp"

namespace beamgeo {

std::vector<double> step_grid(double t0, double t_end, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(Errc::InvalidArgument, "step must be positive");
  if (!std::isfinite(t0) || !std::isfinite(t_end)) {
    throw Error(Errc::InvalidArgument, "integration span must be finite");
  }
  const double span = t_end - t0;
  const double dir = span < 0.0 ? -1.0 : 1.0;
  const double ratio = std::abs(span) / h;
  // Spans that are a multiple of h up to rounding do not get a sliver step.
  auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  std::vector<double> grid;
  grid.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k) grid.push_back(t0 + dir * static_cast<double>(k) * h);
  grid.push_back(t_end);
  return grid;
}

}  // namespace beamgeo
