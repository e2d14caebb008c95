#pragma once

// Green's function of the domain's graph Laplacian, normalized to weighted
// zero mean, plus the pair sums the greedy rule and the energy bound use.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "rcs/domain.hpp"
#include "rcs/error.hpp"
#include "rcs/measure.hpp"

namespace rcs {

/// Largest domain the dense kernel is built for.
inline constexpr std::size_t kMaxKernelSites = 20000;

/// Symmetric kernel G with sum_i w_i G(i, j) = 0 for every j.
class GreenKernel {
 public:
  GreenKernel(std::string domain, std::vector<double> weights, Eigen::MatrixXd g)
      : domain_(std::move(domain)), weights_(std::move(weights)), g_(std::move(g)) {}

  const std::string& domain() const { return domain_; }
  std::size_t size() const { return static_cast<std::size_t>(g_.rows()); }
  const std::vector<double>& weights() const { return weights_; }
  const Eigen::MatrixXd& matrix() const { return g_; }
  double operator()(Site i, Site j) const {
    return g_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// Copy of the kernel with a constant added to every entry (argmin tests).
  GreenKernel shifted(double c) const {
    return GreenKernel(domain_, weights_, (g_.array() + c).matrix());
  }

 private:
  std::string domain_;
  std::vector<double> weights_;
  Eigen::MatrixXd g_;
};

namespace detail {

inline std::filesystem::path kernel_cache_path(const std::filesystem::path& dir, const Domain& d) {
  return dir / ("green-" + d.hash() + ".bin");
}

// Cache layout: uint64 n, then n*n row-major doubles, host byte order.
inline bool read_kernel_cache(const std::filesystem::path& file, std::size_t n, Eigen::MatrixXd& out) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return false;
  std::uint64_t stored = 0;
  in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
  if (!in || stored != n) return false;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(n, n);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
  if (!in) return false;
  out = m;
  return true;
}

inline void write_kernel_cache(const std::filesystem::path& file, const Eigen::MatrixXd& g) {
  std::error_code ec;
  std::filesystem::create_directories(file.parent_path(), ec);
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return;
    const std::uint64_t n = static_cast<std::uint64_t>(g.rows());
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m = g;
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
    if (!out) return;
  }
  std::filesystem::rename(tmp, file, ec);
}

}  // namespace detail

/// Builds the centred pseudoinverse of the graph Laplacian.
///
/// Grounding site 0 makes the reduced Laplacian positive definite; its inverse
/// X (padded with a zero row and column) is a generalized inverse of L, and
///   G(i,j) = X(i,j) - u_i - u_j + w.u,   u = X w,
/// is the unique symmetric solution of L G = I - w 1^T with w^T G = 0. For
/// uniform weights this is exactly the Moore-Penrose pseudoinverse.
inline Eigen::MatrixXd compute_green_matrix(const Domain& d) {
  const std::size_t n = d.size();
  if (n > kMaxKernelSites) throw InvalidArgument("green kernel: domain exceeds " + std::to_string(kMaxKernelSites) + " sites");
  if (!d.connected()) throw InvalidDomain("green kernel: site graph is disconnected (multiple zero eigenvalues)");
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(N, N);
  if (n > 1) {
    const Eigen::SparseMatrix<double> lap = d.laplacian();
    const Eigen::SparseMatrix<double> reduced = lap.bottomRightCorner(N - 1, N - 1);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(reduced);
    if (chol.info() != Eigen::Success) throw InvalidDomain("green kernel: grounded Laplacian not positive definite");
    constexpr Eigen::Index kBlock = 256;
    for (Eigen::Index c0 = 0; c0 < N - 1; c0 += kBlock) {
      const Eigen::Index cols = std::min(kBlock, N - 1 - c0);
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(N - 1, cols);
      for (Eigen::Index k = 0; k < cols; ++k) rhs(c0 + k, k) = 1.0;
      x.block(1, 1 + c0, N - 1, cols) = chol.solve(rhs);
    }
    x = 0.5 * (x + x.transpose()).eval();
  }
  Eigen::VectorXd w(N);
  for (Eigen::Index i = 0; i < N; ++i) w(i) = d.weights()[static_cast<std::size_t>(i)];
  const Eigen::VectorXd u = x * w;
  const double c = w.dot(u);
  Eigen::MatrixXd g(N, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i < N; ++i) g(i, j) = x(i, j) - u(i) - u(j) + c;
  }
  return g;
}

/// Green kernel of the domain. When RCS_CACHE_DIR is set the matrix is read
/// from / written to a binary cache keyed by the domain hash.
inline GreenKernel green_kernel(const Domain& d) {
  Eigen::MatrixXd g;
  const char* dir = std::getenv("RCS_CACHE_DIR");
  if (dir != nullptr && *dir != '\0') {
    const auto file = detail::kernel_cache_path(dir, d);
    if (!detail::read_kernel_cache(file, d.size(), g)) {
      g = compute_green_matrix(d);
      detail::write_kernel_cache(file, g);
    }
  } else {
    g = compute_green_matrix(d);
  }
  return GreenKernel(d.name(), d.weights(), std::move(g));
}

/// sum over ordered pairs k != l of G(z_k, z_l).
inline double green_energy(std::span<const Site> points, const GreenKernel& kernel) {
  if (points.empty()) throw InvalidArgument("green_energy needs at least one point");
  double s = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (std::size_t l = 0; l < points.size(); ++l) {
      if (k != l) s += kernel(points[k], points[l]);
    }
  }
  return s;
}

inline double green_energy(const PlacementSeq& points, const GreenKernel& kernel) {
  return green_energy(std::span<const Site>(points.sites), kernel);
}

/// sum_k G(x, x_k); zero for an empty point list.
inline double green_row_sum(Site x, std::span<const Site> points, const GreenKernel& kernel) {
  double s = 0.0;
  for (Site p : points) s += kernel(x, p);
  return s;
}

}  // namespace rcs
