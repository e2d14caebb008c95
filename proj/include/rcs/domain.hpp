#pragma once

// Discretized compact ground spaces: sites, normalized volume weights (the
// discrete dx), geodesic distances and the nearest-neighbour graph Laplacian.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "json.hpp"
#include "rcs/error.hpp"

namespace rcs {

using Site = std::size_t;

enum class DomainKind { SquareGrid, TorusGrid, SpherePoints };

inline std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::SquareGrid: return "square-grid";
    case DomainKind::TorusGrid: return "torus-grid";
    case DomainKind::SpherePoints: return "sphere-points";
  }
  return "unknown";
}

inline DomainKind parse_domain_kind(std::string_view s) {
  if (s == "square-grid") return DomainKind::SquareGrid;
  if (s == "torus-grid") return DomainKind::TorusGrid;
  if (s == "sphere-points") return DomainKind::SpherePoints;
  throw InvalidArgument("unsupported domain kind '" + std::string(s) + "'");
}

namespace detail {

/// 64-bit FNV-1a; used only to key on-disk caches.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(const T& v) { bytes(&v, sizeof(T)); }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace detail

/// Immutable metric-measure space on finitely many sites.
///
/// Grids live in the unit cube [0,1)^d; the torus uses the wrap-around metric
/// with side length 1, the square grid plain Euclidean distance between cell
/// centres. Sphere point sets sit on the unit sphere in R^3 and use
/// great-circle distance. Weights always sum to one.
class Domain {
 public:
  /// Neighbours per site in the sphere-point adjacency graph (before symmetrization).
  static constexpr int kSphereNeighbours = 6;

  static Domain build(DomainKind kind, int resolution, int dim) {
    if (resolution < 2) throw InvalidArgument("domain resolution must be >= 2");
    Domain d;
    d.kind_ = kind;
    d.resolution_ = resolution;
    d.dim_ = dim;
    switch (kind) {
      case DomainKind::TorusGrid:
      case DomainKind::SquareGrid: {
        if (dim < 1 || dim > 3) {
          throw InvalidArgument("grid domains support dim in {1,2,3}");
        }
        d.ambient_ = dim;
        std::size_t n = 1;
        for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(resolution);
        d.coords_.resize(n * static_cast<std::size_t>(dim));
        const double offset = kind == DomainKind::SquareGrid ? 0.5 : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          auto idx = d.grid_index(i);
          for (int k = 0; k < dim; ++k) {
            d.coords_[i * dim + k] = (idx[k] + offset) / resolution;
          }
        }
        d.weights_.assign(n, 1.0 / static_cast<double>(n));
        d.name_ = std::string(to_string(kind)) + "-" + std::to_string(resolution) + "-d" +
                  std::to_string(dim);
        break;
      }
      case DomainKind::SpherePoints: {
        if (dim != 2) throw InvalidArgument("sphere-points is a dim=2 surface");
        d.ambient_ = 3;
        const auto n = static_cast<std::size_t>(resolution);
        d.coords_.resize(n * 3);
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < n; ++i) {
          const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(n);
          const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
          const double phi = golden * static_cast<double>(i);
          d.coords_[3 * i + 0] = r * std::cos(phi);
          d.coords_[3 * i + 1] = r * std::sin(phi);
          d.coords_[3 * i + 2] = z;
        }
        d.weights_.assign(n, 1.0 / static_cast<double>(n));
        d.name_ = "sphere-points-" + std::to_string(resolution);
        break;
      }
    }
    d.build_adjacency();
    return d;
  }

  /// Rebuilds a domain from stored sites and weights; metric and adjacency are
  /// recomputed from the kind.
  static Domain from_json(const nlohmann::json& j) {
    try {
      const auto kind = parse_domain_kind(j.at("kind").get<std::string>());
      Domain d = build(kind, j.at("resolution").get<int>(), j.at("dim").get<int>());
      const auto& sites = j.at("sites");
      const auto& weights = j.at("weights");
      if (sites.size() != d.size() || weights.size() != d.size()) {
        throw FormatError("domain file: site/weight count does not match kind/resolution/dim");
      }
      for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& c = sites[i];
        if (c.size() != static_cast<std::size_t>(d.ambient_)) {
          throw FormatError("domain file: site " + std::to_string(i) + " has wrong arity");
        }
        for (int k = 0; k < d.ambient_; ++k) d.coords_[i * d.ambient_ + k] = c[k].get<double>();
        d.weights_[i] = weights[i].get<double>();
        if (!(d.weights_[i] >= 0.0)) throw FormatError("domain file: negative weight");
      }
      const double sum = std::accumulate(d.weights_.begin(), d.weights_.end(), 0.0);
      if (std::abs(sum - 1.0) > 1e-12) throw FormatError("domain file: weights do not sum to 1");
      if (j.contains("name")) d.name_ = j.at("name").get<std::string>();
      if (kind == DomainKind::SpherePoints) d.build_adjacency();
      return d;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("domain file: ") + e.what());
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json sites = nlohmann::json::array();
    for (Site i = 0; i < size(); ++i) {
      auto c = site(i);
      sites.push_back(std::vector<double>(c.begin(), c.end()));
    }
    return {{"name", name_},   {"kind", std::string(to_string(kind_))},
            {"dim", dim_},     {"resolution", resolution_},
            {"sites", sites},  {"weights", weights_}};
  }

  const std::string& name() const { return name_; }
  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int resolution() const { return resolution_; }
  int ambient_dim() const { return ambient_; }
  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::vector<Site>>& neighbours() const { return adjacency_; }

  std::span<const double> site(Site i) const {
    return {coords_.data() + i * static_cast<std::size_t>(ambient_),
            static_cast<std::size_t>(ambient_)};
  }

  double distance(Site a, Site b) const {
    const double* x = coords_.data() + a * ambient_;
    const double* y = coords_.data() + b * ambient_;
    switch (kind_) {
      case DomainKind::TorusGrid: {
        double s = 0.0;
        for (int k = 0; k < ambient_; ++k) {
          double t = std::abs(x[k] - y[k]);
          t = std::min(t, 1.0 - t);
          s += t * t;
        }
        return std::sqrt(s);
      }
      case DomainKind::SquareGrid: {
        double s = 0.0;
        for (int k = 0; k < ambient_; ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
        return std::sqrt(s);
      }
      case DomainKind::SpherePoints: {
        if (a == b) return 0.0;
        const double cx = x[1] * y[2] - x[2] * y[1];
        const double cy = x[2] * y[0] - x[0] * y[2];
        const double cz = x[0] * y[1] - x[1] * y[0];
        const double dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
      }
    }
    return 0.0;
  }

  Eigen::MatrixXd distance_matrix() const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = distance(i, j);
    }
    return m;
  }

  double max_distance_from(Site p) const {
    double best = 0.0;
    for (Site i = 0; i < size(); ++i) best = std::max(best, distance(p, i));
    return best;
  }

  /// Combinatorial graph Laplacian D - A of the site adjacency.
  Eigen::SparseMatrix<double> laplacian() const {
    const auto n = static_cast<Eigen::Index>(size());
    std::vector<Eigen::Triplet<double>> t;
    for (Site i = 0; i < size(); ++i) {
      const auto& nb = adjacency_[i];
      t.emplace_back(i, i, static_cast<double>(nb.size()));
      for (Site j : nb) t.emplace_back(i, j, -1.0);
    }
    Eigen::SparseMatrix<double> l(n, n);
    l.setFromTriplets(t.begin(), t.end());
    return l;
  }

  bool connected() const {
    if (size() == 0) return false;
    std::vector<char> seen(size(), 0);
    std::vector<Site> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      Site u = stack.back();
      stack.pop_back();
      for (Site v : adjacency_[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == size();
  }

  /// Hex digest of kind, shape, coordinates and weights.
  std::string hash() const {
    detail::Fnv1a h;
    h.value(static_cast<int>(kind_));
    h.value(dim_);
    h.value(resolution_);
    h.bytes(coords_.data(), coords_.size() * sizeof(double));
    h.bytes(weights_.data(), weights_.size() * sizeof(double));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h.digest()));
    return buf;
  }

  /// Lattice coordinates of a grid site (last axis varies fastest).
  std::array<int, 3> grid_index(Site i) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int k = dim_ - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(i % resolution_);
      i /= resolution_;
    }
    return idx;
  }

  Site grid_site(std::span<const int> idx) const {
    Site s = 0;
    for (int k = 0; k < dim_; ++k) s = s * resolution_ + static_cast<Site>(idx[k]);
    return s;
  }

 private:
  Domain() = default;

  void build_adjacency() {
    const std::size_t n = size();
    adjacency_.assign(n, {});
    if (kind_ == DomainKind::SpherePoints) {
      const std::size_t k = std::min<std::size_t>(kSphereNeighbours, n - 1);
      std::vector<std::pair<double, Site>> row(n);
      for (Site i = 0; i < n; ++i) {
        for (Site j = 0; j < n; ++j) row[j] = {j == i ? INFINITY : distance(i, j), j};
        std::partial_sort(row.begin(), row.begin() + k, row.end());
        for (std::size_t m = 0; m < k; ++m) {
          adjacency_[i].push_back(row[m].second);
          adjacency_[row[m].second].push_back(i);
        }
      }
    } else {
      const bool wrap = kind_ == DomainKind::TorusGrid;
      for (Site i = 0; i < n; ++i) {
        auto idx = grid_index(i);
        for (int k = 0; k < dim_; ++k) {
          for (int step : {-1, 1}) {
            auto nb = idx;
            nb[k] += step;
            if (nb[k] < 0 || nb[k] >= resolution_) {
              if (!wrap) continue;
              nb[k] = (nb[k] + resolution_) % resolution_;
            }
            adjacency_[i].push_back(grid_site(std::span<const int>(nb.data(), 3)));
          }
        }
      }
    }
    for (auto& nb : adjacency_) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
  }

  std::string name_;
  DomainKind kind_ = DomainKind::TorusGrid;
  int resolution_ = 0;
  int dim_ = 0;
  int ambient_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
  std::vector<std::vector<Site>> adjacency_;
};

inline Domain build_domain(DomainKind kind, int resolution, int dim) {
  return Domain::build(kind, resolution, dim);
}

/// Rebuilds a built-in domain from its canonical name, e.g. "torus-grid-16-d2"
/// or "sphere-points-100".
inline Domain domain_from_name(std::string_view name) {
  auto number = [&](std::string_view s) {
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw InvalidArgument("unknown domain name '" + std::string(name) + "'");
    return v;
  };
  constexpr std::string_view sphere = "sphere-points-";
  if (name.substr(0, sphere.size()) == sphere) {
    return build_domain(DomainKind::SpherePoints, number(name.substr(sphere.size())), 2);
  }
  const auto dpos = name.rfind("-d");
  const auto rpos = dpos == std::string_view::npos ? dpos : name.rfind('-', dpos - 1);
  if (rpos == std::string_view::npos) throw InvalidArgument("unknown domain name '" + std::string(name) + "'");
  const auto kind = parse_domain_kind(name.substr(0, rpos));
  return build_domain(kind, number(name.substr(rpos + 1, dpos - rpos - 1)), number(name.substr(dpos + 2)));
}

}  // namespace rcs
