#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "sentinel/common/rng.hpp"
#include "sentinel/ml/models.hpp"

namespace sentinel::ml {

double Tree::eval(const Vector& x) const {
  if (nodes.empty()) throw std::logic_error("empty tree");
  int i = 0;
  while (nodes[i].feature >= 0) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
  }
  return best;
}

void Tree::save(BinaryWriter& w) const {
  w.u64(nodes.size());
  for (const auto& n : nodes) {
    w.i64(n.feature);
    w.f64(n.threshold);
    w.i64(n.left);
    w.i64(n.right);
    w.f64(n.value);
  }
}

Tree Tree::load(BinaryReader& r) {
  Tree t;
  const auto n = r.u64();
  if (n > (1u << 26)) throw std::runtime_error("tree: node count out of range");
  t.nodes.resize(n);
  for (auto& node : t.nodes) {
    node.feature = static_cast<int>(r.i64());
    node.threshold = r.f64();
    node.left = static_cast<int>(r.i64());
    node.right = static_cast<int>(r.i64());
    node.value = r.f64();
  }
  for (const auto& node : t.nodes)
    if (node.feature >= 0 && (node.left <= 0 || node.right <= 0 || static_cast<std::size_t>(node.left) >= n ||
                              static_cast<std::size_t>(node.right) >= n))
      throw std::runtime_error("tree: child index out of range");
  return t;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0;
  double score = 0;
};

/// Generic greedy builder. Stats accumulate per side; `score` rates a split
/// from (left, right, parent) stats and `leaf` turns stats into a value.
template <typename Stats, typename AddFn, typename ScoreFn, typename LeafFn, typename ValidFn>
class Builder {
 public:
  Builder(const Matrix& X, std::size_t max_depth, std::size_t min_split, AddFn add, ScoreFn score, LeafFn leaf,
          ValidFn valid)
      : X_(X), max_depth_(max_depth), min_split_(min_split), add_(add), score_(score), leaf_(leaf), valid_(valid) {}

  std::function<std::vector<int>(std::size_t)> features;  ///< candidate columns per node
  std::function<bool(const Stats&)> pure;
  double min_score = 0;
  bool strict = true;

  Tree build(std::vector<std::size_t> rows) {
    Tree t;
    grow(t, rows, 0);
    return t;
  }

 private:
  Stats collect(const std::vector<std::size_t>& rows) const {
    Stats s{};
    for (auto r : rows) add_(s, r);
    return s;
  }

  int grow(Tree& t, std::vector<std::size_t>& rows, std::size_t depth) {
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.push_back({});
    const Stats all = collect(rows);
    t.nodes[id].value = leaf_(all);
    if (depth >= max_depth_ || rows.size() < min_split_ || pure(all)) return id;

    Split best;
    bool found = false;
    std::vector<std::size_t> order = rows;
    for (int f : features(depth)) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = X_(a, f), vb = X_(b, f);
        return va != vb ? va < vb : a < b;
      });
      Stats left{};
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        add_(left, order[i]);
        const double v = X_(order[i], f), next = X_(order[i + 1], f);
        if (v == next) continue;
        Stats right = all;
        subtract(right, left);
        if (!valid_(left, right, i + 1, order.size() - i - 1)) continue;
        const double s = score_(left, right, all);
        const bool better = strict ? s > min_score : s >= min_score;
        if (better && (!found || s > best.score)) {
          found = true;
          best = {f, v + (next - v) / 2, s};
          if (best.threshold >= next) best.threshold = v;
        }
      }
    }
    if (!found) return id;
    std::vector<std::size_t> l, r;
    for (auto row : rows) (X_(row, best.feature) <= best.threshold ? l : r).push_back(row);
    if (l.empty() || r.empty()) return id;
    rows.clear();
    rows.shrink_to_fit();
    t.nodes[id].feature = best.feature;
    t.nodes[id].threshold = best.threshold;
    const int li = grow(t, l, depth + 1);
    const int ri = grow(t, r, depth + 1);
    t.nodes[id].left = li;
    t.nodes[id].right = ri;
    return id;
  }

  static void subtract(Stats& a, const Stats& b) { a -= b; }

  const Matrix& X_;
  std::size_t max_depth_, min_split_;
  AddFn add_;
  ScoreFn score_;
  LeafFn leaf_;
  ValidFn valid_;
};

struct ClassStats {
  double n = 0, pos = 0;
  ClassStats& operator-=(const ClassStats& o) {
    n -= o.n;
    pos -= o.pos;
    return *this;
  }
};

double gini(const ClassStats& s) {
  if (s.n <= 0) return 0;
  const double p = s.pos / s.n;
  return 2 * p * (1 - p);
}

struct GradStats {
  double g = 0, h = 0, n = 0;
  GradStats& operator-=(const GradStats& o) {
    g -= o.g;
    h -= o.h;
    n -= o.n;
    return *this;
  }
};

}  // namespace

Tree build_gini_tree(const Matrix& X, const std::vector<int>& y, const std::vector<std::size_t>& rows,
                     const TreeParams& p) {
  if (rows.empty()) throw std::invalid_argument("tree: no rows");
  const auto d = static_cast<std::size_t>(X.cols());
  auto add = [&](ClassStats& s, std::size_t r) {
    s.n += 1;
    s.pos += y[r];
  };
  auto score = [](const ClassStats& l, const ClassStats& r, const ClassStats& all) {
    return gini(all) - (l.n * gini(l) + r.n * gini(r)) / all.n;
  };
  auto leaf = [](const ClassStats& s) { return s.n > 0 ? s.pos / s.n : 0.0; };
  const std::size_t min_leaf = std::max<std::size_t>(p.min_samples_leaf, 1);
  auto valid = [min_leaf](const ClassStats&, const ClassStats&, std::size_t nl, std::size_t nr) {
    return nl >= min_leaf && nr >= min_leaf;
  };
  Builder<ClassStats, decltype(add), decltype(score), decltype(leaf), decltype(valid)> b(
      X, p.max_depth, std::max<std::size_t>(p.min_samples_split, 2), add, score, leaf, valid);
  b.pure = [](const ClassStats& s) { return s.pos == 0 || s.pos == s.n; };
  b.min_score = -1e-12;
  b.strict = true;
  Rng rng(p.seed);
  const std::size_t m = p.max_features == 0 || p.max_features >= d ? d : p.max_features;
  b.features = [&, m, d](std::size_t) {
    std::vector<int> cols(d);
    std::iota(cols.begin(), cols.end(), 0);
    if (m < d) {
      rng.shuffle(cols);
      cols.resize(m);
      std::sort(cols.begin(), cols.end());
    }
    return cols;
  };
  return b.build(rows);
}

Tree build_gradient_tree(const Matrix& X, const std::vector<double>& g, const std::vector<double>& h,
                         const GradientTreeParams& p) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (n == 0 || g.size() != n || h.size() != n) throw std::invalid_argument("gradient tree: size mismatch");
  const double lambda = p.lambda;
  auto add = [&](GradStats& s, std::size_t r) {
    s.g += g[r];
    s.h += h[r];
    s.n += 1;
  };
  auto term = [lambda](const GradStats& s) { return s.g * s.g / (s.h + lambda); };
  auto score = [term](const GradStats& l, const GradStats& r, const GradStats& all) {
    return term(l) + term(r) - term(all);
  };
  auto leaf = [lambda](const GradStats& s) { return -s.g / (s.h + lambda); };
  const double mch = p.min_child_hessian;
  auto valid = [mch](const GradStats& l, const GradStats& r, std::size_t, std::size_t) {
    return l.h >= mch && r.h >= mch;
  };
  Builder<GradStats, decltype(add), decltype(score), decltype(leaf), decltype(valid)> b(X, p.max_depth, 2, add, score,
                                                                                         leaf, valid);
  b.pure = [](const GradStats&) { return false; };
  b.min_score = 1e-12;
  b.strict = true;
  const auto d = static_cast<int>(X.cols());
  b.features = [d](std::size_t) {
    std::vector<int> cols(d);
    std::iota(cols.begin(), cols.end(), 0);
    return cols;
  };
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return b.build(std::move(rows));
}

}  // namespace sentinel::ml
