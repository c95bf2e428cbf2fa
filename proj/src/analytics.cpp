#include "firelog/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

namespace firelog {

namespace {

constexpr std::size_t kLeafSize = 16;

// Kd-tree over the distinct points, with integer multiplicities. Queries
// exclude the query point itself; its duplicates are accounted for by the
// caller through the multiplicity.
class KdTree {
 public:
  KdTree(const std::vector<double>& pts, std::size_t dim)
      : pts_(pts), dim_(dim), n_(dim ? pts.size() / dim : 0), order_(n_) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (n_ > 0) build(0, n_);
  }

  double sq_dist(std::size_t a, std::size_t b) const {
    const double* pa = &pts_[a * dim_];
    const double* pb = &pts_[b * dim_];
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double t = pa[i] - pb[i];
      s += t * t;
    }
    return s;
  }

  // Smallest squared radius r such that the weight of other points within r
  // reaches `need` (need >= 1, and total available weight must suffice).
  double weighted_kth_sq(std::size_t query, std::size_t need,
                         const std::vector<std::size_t>& weight) const {
    std::priority_queue<std::pair<double, std::size_t>> heap;
    std::size_t total = 0;
    knn(0, query, need, weight, heap, total);
    return heap.top().first;
  }

  template <class F>
  void radius(std::size_t query, double r_sq, F&& visit) const {
    radius_impl(0, query, r_sq, visit);
  }

 private:
  struct Node {
    std::size_t begin, end;
    std::size_t split_dim = 0;
    double split = 0.0;
    std::size_t left = 0, right = 0;  // 0 = leaf
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;
    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t i = begin; i < end; ++i) {
        const double v = pts_[order_[i] * dim_ + d];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = d;
      }
    }
    if (best_spread <= 0.0) return id;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       return pts_[a * dim_ + best_dim] < pts_[b * dim_ + best_dim];
                     });
    const double split = pts_[order_[mid] * dim_ + best_dim];
    nodes_[id].split_dim = best_dim;
    nodes_[id].split = split;
    const std::size_t l = build(begin, mid);
    const std::size_t r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void knn(std::size_t id, std::size_t query, std::size_t need,
           const std::vector<std::size_t>& weight,
           std::priority_queue<std::pair<double, std::size_t>>& heap, std::size_t& total) const {
    const Node& node = nodes_[id];
    if (node.left == 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t v = order_[i];
        if (v == query) continue;
        const double d = sq_dist(query, v);
        if (total >= need && d > heap.top().first) continue;
        heap.emplace(d, v);
        total += weight[v];
        while (total - weight[heap.top().second] >= need) {
          total -= weight[heap.top().second];
          heap.pop();
        }
      }
      return;
    }
    const double diff = pts_[query * dim_ + node.split_dim] - node.split;
    const std::size_t near = diff < 0 ? node.left : node.right;
    const std::size_t far = diff < 0 ? node.right : node.left;
    knn(near, query, need, weight, heap, total);
    if (total < need || diff * diff <= heap.top().first) knn(far, query, need, weight, heap, total);
  }

  template <class F>
  void radius_impl(std::size_t id, std::size_t query, double r_sq, F& visit) const {
    const Node& node = nodes_[id];
    if (node.left == 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t v = order_[i];
        if (v == query) continue;
        const double d = sq_dist(query, v);
        if (d <= r_sq) visit(v, d);
      }
      return;
    }
    const double diff = pts_[query * dim_ + node.split_dim] - node.split;
    if (diff < 0 || diff * diff <= r_sq) radius_impl(node.left, query, r_sq, visit);
    if (diff >= 0 || diff * diff <= r_sq) radius_impl(node.right, query, r_sq, visit);
  }

  const std::vector<double>& pts_;
  std::size_t dim_;
  std::size_t n_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace

FeatureMatrix encode_features(const LogTable& table, std::span<const std::string> attributes) {
  if (attributes.empty()) {
    throw Error(Errc::no_attributes_selected, "no attributes selected for feature encoding");
  }
  std::vector<std::size_t> cols;
  for (const auto& a : attributes) cols.push_back(table.schema().index_of(a));
  const std::size_t n = table.row_count();
  if (n == 0) throw Error(Errc::empty_table, "cannot encode features of an empty table");

  FeatureMatrix m;
  m.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  m.row_map.resize(n);
  std::iota(m.row_map.begin(), m.row_map.end(), std::size_t{0});

  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto& col = table.schema().column(cols[j]);
    const auto cells = table.column(cols[j]);
    const auto jj = static_cast<Eigen::Index>(j);
    ColumnEncoding enc{col.name};
    const bool numeric =
        col.kind == AttributeKind::ordinal_numeric || col.kind == AttributeKind::timestamp;
    if (numeric) {
      enc.method = EncodingMethod::zscore;
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& c : cells) {
        if (auto v = c.as_number()) {
          sum += *v;
          ++count;
        }
      }
      const double mean = count ? sum / static_cast<double>(count) : 0.0;
      // Nulls take the mean, so they add nothing to the variance.
      double ss = 0.0;
      for (const auto& c : cells) {
        if (auto v = c.as_number()) ss += (*v - mean) * (*v - mean);
      }
      const double sd = std::sqrt(ss / static_cast<double>(n));
      enc.mean = mean;
      enc.stddev = sd;
      for (std::size_t r = 0; r < n; ++r) {
        const auto v = cells[r].as_number();
        const double x = v ? *v : mean;
        double z = (sd > 0.0 && std::isfinite(sd)) ? (x - mean) / sd : 0.0;
        if (!std::isfinite(z)) z = 0.0;
        m.points(static_cast<Eigen::Index>(r), jj) = z;
      }
    } else {
      enc.method = EncodingMethod::frequency;
      std::map<std::string, std::size_t> freq;
      for (const auto& c : cells) {
        if (!c.is_null()) ++freq[c.to_text()];
      }
      for (std::size_t r = 0; r < n; ++r) {
        double f = 0.0;
        if (!cells[r].is_null()) {
          f = static_cast<double>(freq[cells[r].to_text()]) / static_cast<double>(n);
        }
        m.points(static_cast<Eigen::Index>(r), jj) = f;
      }
    }
    m.encoding.push_back(std::move(enc));
  }
  return m;
}

std::vector<std::string> default_feature_attributes(const LogTable& table) {
  std::vector<std::string> out;
  const auto& schema = table.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    bool is_role = false;
    for (auto r : kAllRoles) is_role = is_role || schema.role(r) == c;
    const auto kind = schema.column(c).kind;
    if (!is_role &&
        (kind == AttributeKind::ordinal_numeric || kind == AttributeKind::categorical)) {
      out.push_back(schema.column(c).name);
    }
  }
  return out;
}

std::size_t clip_k(std::size_t k, std::size_t n) noexcept {
  if (n < 2) return 1;
  return std::max<std::size_t>(1, std::min(k, n - 1));
}

LofScores lof(const Eigen::MatrixXd& points, const LofParams& params) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto d = static_cast<std::size_t>(points.cols());
  const std::size_t k = params.k;
  if (k < 1 || k >= n) {
    throw Error(Errc::k_out_of_range, "LOF needs 1 <= k < n (k=" + std::to_string(k) +
                                          ", n=" + std::to_string(n) + ")");
  }

  // Collapse exact duplicates; every copy of a point has the same score.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row_less = [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < d; ++j) {
      const double x = points(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
      const double y = points(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
      if (x < y) return true;
      if (y < x) return false;
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  std::vector<std::size_t> group_of(n);
  std::vector<double> unique_pts;
  std::vector<std::size_t> weight;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || row_less(order[i - 1], order[i])) {
      weight.push_back(0);
      for (std::size_t j = 0; j < d; ++j) {
        unique_pts.push_back(
            points(static_cast<Eigen::Index>(order[i]), static_cast<Eigen::Index>(j)));
      }
    }
    ++weight.back();
    group_of[order[i]] = weight.size() - 1;
  }
  const std::size_t u = weight.size();

  KdTree tree(unique_pts, d);

  std::vector<double> kdist(u, 0.0);
  for (std::size_t g = 0; g < u; ++g) {
    const std::size_t self_dups = weight[g] - 1;
    if (self_dups < k) kdist[g] = std::sqrt(tree.weighted_kth_sq(g, k - self_dups, weight));
  }

  struct Neighbor {
    std::size_t group;
    double dist;
  };
  std::vector<std::vector<Neighbor>> hood(u);
  std::vector<double> lrd(u, 0.0);
  for (std::size_t g = 0; g < u; ++g) {
    if (kdist[g] > 0.0) {
      // Slightly widened search; membership is decided on the distance itself.
      const double r_sq = kdist[g] * kdist[g] * (1.0 + 1e-12) + 1e-300;
      tree.radius(g, r_sq, [&](std::size_t v, double dsq) {
        const double dist = std::sqrt(dsq);
        if (dist <= kdist[g]) hood[g].push_back({v, dist});
      });
    }
    const double self_dups = static_cast<double>(weight[g] - 1);
    double count = self_dups;
    double reach_sum = self_dups * kdist[g];
    for (const auto& nb : hood[g]) {
      const double w = static_cast<double>(weight[nb.group]);
      count += w;
      reach_sum += w * std::max(kdist[nb.group], nb.dist);
    }
    lrd[g] = reach_sum > 0.0 ? count / reach_sum : std::numeric_limits<double>::infinity();
  }

  double max_finite = 0.0;
  for (double v : lrd) {
    if (std::isfinite(v)) max_finite = std::max(max_finite, v);
  }

  std::vector<double> group_score(u, 1.0);
  for (std::size_t g = 0; g < u; ++g) {
    if (!std::isfinite(lrd[g])) continue;
    const double self_dups = static_cast<double>(weight[g] - 1);
    double count = self_dups;
    double sum = self_dups * lrd[g];
    for (const auto& nb : hood[g]) {
      const double w = static_cast<double>(weight[nb.group]);
      const double o = std::isfinite(lrd[nb.group]) ? lrd[nb.group] : max_finite;
      count += w;
      sum += w * o;
    }
    group_score[g] = sum / (count * lrd[g]);
  }

  LofScores out;
  out.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.scores[i] = group_score[group_of[i]];
  return out;
}

LofScores lof(const FeatureMatrix& m, const LofParams& params) { return lof(m.points, params); }

Projection2D pca_2d(const Eigen::MatrixXd& points) {
  const auto n = points.rows();
  const auto d = points.cols();
  if (n < 2) throw Error(Errc::insufficient_rows, "PCA needs at least 2 rows");
  if (d < 2) throw Error(Errc::insufficient_dims, "PCA needs at least 2 dimensions");

  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Eigen::MatrixXd centered = points.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::invalid_argument, "covariance eigendecomposition failed");
  }
  // Eigenvalues come back ascending.
  Projection2D p;
  p.components.resize(2, d);
  for (int i = 0; i < 2; ++i) {
    const Eigen::Index col = d - 1 - i;
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    p.components.row(i) = v.transpose();
    p.explained_variance[static_cast<std::size_t>(i)] = std::max(0.0, solver.eigenvalues()(col));
  }
  p.coords = centered * p.components.transpose();
  return p;
}

Projection2D pca_2d(const FeatureMatrix& m) { return pca_2d(m.points); }

LogTable threshold_extract(const LogTable& table, const LofScores& scores, double threshold,
                           const std::string& provenance) {
  if (scores.scores.size() != table.row_count()) {
    throw Error(Errc::length_mismatch, "score vector has " + std::to_string(scores.scores.size()) +
                                           " entries for " + std::to_string(table.row_count()) +
                                           " rows");
  }
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < scores.scores.size(); ++r) {
    if (scores.scores[r] > threshold) keep.push_back(r);
  }
  return table.select_rows(keep, provenance);
}

}  // namespace firelog
