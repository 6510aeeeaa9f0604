#pragma once

#include <cstddef>
#include <vector>

namespace tsbet {

// Gauss-Hermite rule rescaled to the standard normal: E[f(Z)] ~ sum w_i f(z_i).
struct NormalRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes via Newton iteration on the orthonormal Hermite recurrence. Cached per n.
const NormalRule& normal_rule(std::size_t n = 41);

// E[f(mean + sd * Z)] under the n-point rule.
template <class F>
double normal_expectation(F&& f, double mean, double sd, std::size_t n = 41) {
  const NormalRule& rule = normal_rule(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(mean + sd * rule.nodes[i]);
  }
  return acc;
}

}  // namespace tsbet
