#pragma once

// Reference implementations used only by tests. They deliberately share no
// code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace firelog::testing {

using Points = std::vector<std::vector<double>>;

// O(n^2) Local Outlier Factor straight from the definitions: k-distance,
// k-neighbourhood with ties, reachability distance, lrd, LOF. Infinite lrd
// (neighbourhood entirely at distance 0) scores 1; an infinite neighbour
// density is replaced by the largest finite density.
inline std::vector<double> brute_force_lof(const Points& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < pts[i].size(); ++c) {
        const double t = pts[i][c] - pts[j][c];
        s += t * t;
      }
      dist[i][j] = std::sqrt(s);
    }
  }
  std::vector<double> kdist(n);
  std::vector<std::vector<std::size_t>> hood(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(dist[i][j]);
    }
    std::sort(others.begin(), others.end());
    kdist[i] = others[k - 1];
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && dist[i][j] <= kdist[i]) hood[i].push_back(j);
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (auto j : hood[i]) sum += std::max(kdist[j], dist[i][j]);
    lrd[i] = sum > 0.0 ? static_cast<double>(hood[i].size()) / sum : inf;
  }
  double max_finite = 0.0;
  for (double v : lrd) {
    if (v != inf) max_finite = std::max(max_finite, v);
  }
  std::vector<double> out(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (lrd[i] == inf) continue;
    double sum = 0.0;
    for (auto j : hood[i]) sum += lrd[j] == inf ? max_finite : lrd[j];
    out[i] = sum / static_cast<double>(hood[i].size()) / lrd[i];
  }
  return out;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// (eigenvalues descending, eigenvectors as columns in the same order).
inline std::pair<std::vector<double>, std::vector<std::vector<double>>> jacobi_eigen(
    std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a[r][p], arq = a[r][q];
          a[r][p] = c * arp - s * arq;
          a[r][q] = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a[p][r], aqr = a[q][r];
          a[p][r] = c * apr - s * aqr;
          a[q][r] = s * apr + c * aqr;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v[r][p], vrq = v[r][q];
          v[r][p] = c * vrp - s * vrq;
          v[r][q] = s * vrp + c * vrq;
        }
      }
    }
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return a[x][x] > a[y][y]; });
  std::vector<double> vals;
  std::vector<std::vector<double>> vecs(n, std::vector<double>(n));
  for (std::size_t c = 0; c < n; ++c) {
    vals.push_back(a[idx[c]][idx[c]]);
    for (std::size_t r = 0; r < n; ++r) vecs[r][c] = v[r][idx[c]];
  }
  return {vals, vecs};
}

struct PcaOracle {
  std::vector<double> eigenvalues;  // all, descending
  Points coords;                    // n x 2, arbitrary component signs
};

inline PcaOracle pca_oracle(const Points& x) {
  const std::size_t n = x.size(), d = x[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& row : x) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& row : x) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) cov[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]);
    }
  }
  for (auto& r : cov) {
    for (auto& c : r) c /= static_cast<double>(n - 1);
  }
  auto [vals, vecs] = jacobi_eigen(cov);
  PcaOracle out;
  out.eigenvalues = vals;
  for (const auto& row : x) {
    std::vector<double> p(2, 0.0);
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t j = 0; j < d; ++j) p[c] += (row[j] - mean[j]) * vecs[j][c];
    }
    out.coords.push_back(p);
  }
  return out;
}

}  // namespace firelog::testing
