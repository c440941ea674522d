#pragma once

namespace vsimaser {

/// Binomial occupation of the neighbour shell by spin-1/2 nuclei.
struct IsotopeSiteProbabilities {
  double p_central;        // no spin-bearing neighbour
  double p_one_satellite;  // exactly one, split evenly over the two satellites
  double p_multi;          // two or more; not synthesised

  // Central-line population over one satellite's population.
  double central_to_satellite_ratio() const noexcept { return p_central / (0.5 * p_one_satellite); }
};

IsotopeSiteProbabilities isotope_site_probabilities(double abundance, int n_sites);

}  // namespace vsimaser
