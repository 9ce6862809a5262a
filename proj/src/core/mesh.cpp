#include "core/mesh.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace blowup {

void Mesh::validate() const {
  require(std::isfinite(L) && L > 0.0, Errc::invalid_argument, "mesh: L must be positive");
  require(nodes.size() >= 3, Errc::invalid_argument, "mesh: need at least one interior node");
  require(nodes.front() == 0.0 && nodes.back() == L, Errc::invalid_argument,
          "mesh: nodes must span [0, L]");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    require(nodes[i] > nodes[i - 1], Errc::invalid_argument,
            "mesh: nodes must be strictly increasing");
}

nlohmann::json Mesh::to_json() const {
  return {{"L", L}, {"nodes", nodes}};
}

Mesh Mesh::from_json(const nlohmann::json& j) {
  Mesh m;
  try {
    m.L = j.at("L").get<double>();
    m.nodes = j.at("nodes").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::json, std::string("mesh: ") + e.what());
  }
  m.validate();
  return m;
}

Mesh Mesh::uniform(double L, int cells) {
  require(std::isfinite(L) && L > 0.0, Errc::invalid_argument, "mesh: L must be positive");
  require(cells >= 2, Errc::invalid_argument, "mesh: at least 2 cells required");
  Mesh m;
  m.L = L;
  m.nodes.reserve(cells + 1);
  for (int i = 0; i <= cells; ++i) m.nodes.push_back(L * static_cast<double>(i) / cells);
  m.nodes.front() = 0.0;
  m.nodes.back() = L;
  m.validate();
  return m;
}

Mesh Mesh::graded(double L, double finest, double ratio, double cap) {
  require(std::isfinite(L) && L > 0.0, Errc::invalid_argument, "mesh: L must be positive");
  require(finest > 0.0 && cap > finest && cap < L, Errc::invalid_argument,
          "mesh: need 0 < finest < cap < L");
  require(ratio > 0.0 && ratio < 1.0, Errc::invalid_argument, "mesh: ratio in (0, 1) required");

  std::vector<double> cells;
  double h = finest, total = 0.0;
  while (h < cap) {
    if (total + h + cap > L) break;  // reserve room for one uniform cell
    cells.push_back(h);
    total += h;
    h = std::min(h / ratio, cap);
  }
  double rest = L - total;
  int k = std::max(1, static_cast<int>(std::floor(rest / cap)));
  double hu = rest / k;  // >= cap whenever the graded stage completed
  Mesh m;
  m.L = L;
  m.nodes.push_back(0.0);
  double x = 0.0;
  for (double c : cells) {
    x += c;
    m.nodes.push_back(x);
  }
  for (int i = 1; i <= k; ++i) m.nodes.push_back(total + hu * i);
  m.nodes.back() = L;
  m.validate();
  return m;
}

}  // namespace blowup
