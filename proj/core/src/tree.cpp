#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hte/learners.hpp"
#include "hte/random.hpp"

namespace hte {

double TreeModel::predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const Node& nd = nodes[static_cast<std::size_t>(node)];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

Vector TreeModel::predict(const DesignMatrix& X) const {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict_one(X.values.row(i));
  return out;
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();  // child SSE sum
};

struct Workspace {
  std::vector<std::pair<double, std::size_t>> sorted;  // (value, row)
  std::vector<int> feature_pool;
};

// child SSE from weighted moments: sum w y^2 - (sum w y)^2 / sum w
inline double sse(double sw, double swy, double swyy) {
  return sw > 0.0 ? swyy - swy * swy / sw : 0.0;
}

SplitChoice best_split(const Matrix& X, const Vector& y, const Vector* weights,
                       const std::vector<std::size_t>& rows, int min_leaf,
                       const std::vector<int>& features, Workspace& ws) {
  SplitChoice best;
  const std::size_t m = rows.size();

  for (int f : features) {
    ws.sorted.clear();
    for (std::size_t r : rows)
      ws.sorted.emplace_back(X(static_cast<Eigen::Index>(r), f), r);
    std::sort(ws.sorted.begin(), ws.sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double total_w = 0.0, total_wy = 0.0, total_wyy = 0.0;
    for (const auto& [v, r] : ws.sorted) {
      const double w = weights ? (*weights)[static_cast<Eigen::Index>(r)] : 1.0;
      const double yy = y[static_cast<Eigen::Index>(r)];
      total_w += w;
      total_wy += w * yy;
      total_wyy += w * yy * yy;
      (void)v;
    }

    double left_w = 0.0, left_wy = 0.0, left_wyy = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const auto& [v, r] = ws.sorted[i];
      const double w = weights ? (*weights)[static_cast<Eigen::Index>(r)] : 1.0;
      const double yy = y[static_cast<Eigen::Index>(r)];
      left_w += w;
      left_wy += w * yy;
      left_wyy += w * yy * yy;

      const double next = ws.sorted[i + 1].first;
      if (next == v) continue;  // candidate only between distinct values
      const std::size_t n_left = i + 1;
      const std::size_t n_right = m - n_left;
      if (n_left < static_cast<std::size_t>(min_leaf) ||
          n_right < static_cast<std::size_t>(min_leaf))
        continue;

      double mid = v + (next - v) / 2.0;
      if (!(mid >= v && mid < next)) mid = v;

      const double score = sse(left_w, left_wy, left_wyy) +
                           sse(total_w - left_w, total_wy - left_wy, total_wyy - left_wyy);
      if (score < best.score) {
        best.score = score;
        best.feature = f;
        best.threshold = mid;
      }
    }
  }
  return best;
}

}  // namespace

TreeModel grow_tree(const Matrix& X, const Vector& y, const Vector* weights,
                    const std::vector<std::size_t>& rows, const TreeGrowth& opts) {
  if (rows.empty()) throw std::invalid_argument("grow_tree: no rows");
  const int p = static_cast<int>(X.cols());
  const int mtry = opts.mtry > 0 ? std::min(opts.mtry, p) : p;

  TreeModel tree;
  Workspace ws;
  Rng rng(opts.seed);
  std::vector<int> all_features(static_cast<std::size_t>(p));
  std::iota(all_features.begin(), all_features.end(), 0);

  struct Pending {
    int node;
    std::vector<std::size_t> rows;
    int depth;
  };
  std::vector<Pending> stack;

  auto node_moments = [&](const std::vector<std::size_t>& r) {
    double sw = 0.0, swy = 0.0, swyy = 0.0;
    for (std::size_t i : r) {
      const double w = weights ? (*weights)[static_cast<Eigen::Index>(i)] : 1.0;
      const double yy = y[static_cast<Eigen::Index>(i)];
      sw += w;
      swy += w * yy;
      swyy += w * yy * yy;
    }
    return std::array<double, 3>{sw, swy, swyy};
  };

  tree.nodes.push_back({});
  stack.push_back({0, rows, 0});

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    const auto [sw, swy, swyy] = node_moments(cur.rows);
    const double node_sse = sse(sw, swy, swyy);
    tree.nodes[static_cast<std::size_t>(cur.node)].value = sw > 0.0 ? swy / sw : 0.0;

    if (node_sse <= 0.0) continue;  // pure node
    if (cur.depth >= opts.max_depth ||
        cur.rows.size() < 2 * static_cast<std::size_t>(opts.min_leaf))
      continue;

    std::vector<int> features;
    if (mtry >= p) {
      features = all_features;
    } else {
      // per-node feature subsample, kept in ascending order for the tie rule
      auto pool = all_features;
      rng.shuffle(pool);
      features.assign(pool.begin(), pool.begin() + mtry);
      std::sort(features.begin(), features.end());
    }

    SplitChoice split = best_split(X, y, weights, cur.rows, opts.min_leaf, features, ws);
    if (split.feature < 0 || split.score >= node_sse) continue;  // no real improvement

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : cur.rows) {
      if (X(static_cast<Eigen::Index>(r), split.feature) <= split.threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) continue;

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    const int right_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});

    TreeModel::Node& parent = tree.nodes[static_cast<std::size_t>(cur.node)];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left_id;
    parent.right = right_id;

    stack.push_back({right_id, std::move(right_rows), cur.depth + 1});
    stack.push_back({left_id, std::move(left_rows), cur.depth + 1});
  }
  return tree;
}

namespace {

class FittedTree : public FittedRegressor {
 public:
  explicit FittedTree(TreeModel tree) : tree_(std::move(tree)) {}
  Vector predict(const DesignMatrix& X) const override { return tree_.predict(X); }

 private:
  TreeModel tree_;
};

}  // namespace

RegressionTreeRegressor::RegressionTreeRegressor(int max_depth, int min_leaf, std::uint64_t seed) {
  opts_.max_depth = max_depth;
  opts_.min_leaf = min_leaf;
  opts_.seed = seed;
}

std::unique_ptr<FittedRegressor> RegressionTreeRegressor::fit(const DesignMatrix& X,
                                                              const Vector& y,
                                                              const Vector* weights) const {
  validate(X);
  if (y.size() != X.rows()) throw std::invalid_argument("tree fit: rows(X) != len(y)");
  std::vector<std::size_t> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return std::make_unique<FittedTree>(grow_tree(X.values, y, weights, rows, opts_));
}

}  // namespace hte
