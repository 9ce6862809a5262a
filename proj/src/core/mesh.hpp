#pragma once

#include <nlohmann/json.hpp>
#include <vector>

namespace blowup {

/// 1-D mesh on [0, L] for the Dirichlet problems: strictly increasing
/// nodes with nodes.front() == 0 and nodes.back() == L.
struct Mesh {
  std::vector<double> nodes;
  double L = 1.0;

  std::size_t size() const { return nodes.size(); }
  std::size_t interior() const { return nodes.size() >= 2 ? nodes.size() - 2 : 0; }
  /// Width of the dual cell around interior node i (1 <= i <= interior()).
  double dual_weight(std::size_t i) const { return 0.5 * (nodes[i + 1] - nodes[i - 1]); }

  void validate() const;
  nlohmann::json to_json() const;
  static Mesh from_json(const nlohmann::json& j);

  static Mesh uniform(double L, int cells);
  /// Cells grow geometrically away from 0, finest first: h, h/ratio, ...
  /// capped at `cap`, then a uniform tail with spacing >= cap fills out to
  /// L. Spacings never decrease away from 0.
  static Mesh graded(double L, double finest, double ratio, double cap);
};

}  // namespace blowup
