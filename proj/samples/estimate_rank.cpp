// Draws one sample from a spiked population and runs every criterion on it.
//
//   ./estimate_rank [n] [p] [k] [snr] [seed]

#include <cstdlib>
#include <iostream>

#include "spikes/spikes.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 500;
  const std::size_t p = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 200;
  const std::size_t k = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 10;
  const double snr = argc > 4 ? std::strtod(argv[4], nullptr) : 1.5;
  const std::uint64_t seed = argc > 5 ? std::strtoull(argv[5], nullptr, 10) : 7;

  try {
    const auto pop = spikes::build_population(p, k, snr);
    const auto x = spikes::sample_population(pop, n, spikes::NoiseKind::gaussian, seed);
    const auto spec = spikes::eigvals_sym(spikes::sample_covariance(x));

    std::cout << "true k = " << k << ", snr = " << snr << ", gamma(auto) = "
              << spikes::default_gamma(n, p) << "\n";
    for (const char* id : {"gic-large:auto", "gic-large:1", "bcf", "gic-fixed:ilp"}) {
      const auto result = spikes::evaluate(spikes::parse_criterion(id), spec);
      std::cout << id << ": k_hat = " << result.k_hat << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
