#include "sonarsnoop/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "sonarsnoop/pipeline.hpp"

namespace sonarsnoop {

using nlohmann::json;

namespace {

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::GaussianSvm: return "gaussian_svm";
    case Algorithm::QuadraticSvm: return "quadratic_svm";
    case Algorithm::Knn: return "knn";
    case Algorithm::BaggedTrees: return "bagged_trees";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "gaussian_svm") return Algorithm::GaussianSvm;
  if (s == "quadratic_svm") return Algorithm::QuadraticSvm;
  if (s == "knn") return Algorithm::Knn;
  if (s == "bagged_trees") return Algorithm::BaggedTrees;
  throw ConfigError("unknown classifier algorithm '" + std::string(s) + "'");
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// ---- kernel SVM -------------------------------------------------------------

struct Kernel {
  Algorithm kind = Algorithm::GaussianSvm;
  double scale = 1.0;

  double operator()(const std::vector<double>& a, const std::vector<double>& b) const {
    const double s2 = scale * scale;
    if (kind == Algorithm::GaussianSvm) return std::exp(-sq_dist(a, b) / s2);
    const double v = 1.0 + dot(a, b) / s2;
    return v * v;
  }
};

struct BinarySvm {
  int positive = 0;
  int negative = 0;
  double rho = 0.0;
  std::vector<std::vector<double>> support;
  std::vector<double> coef;  // alpha_i * y_i

  double decision(const std::vector<double>& x, const Kernel& k) const {
    double f = -rho;
    for (std::size_t i = 0; i < support.size(); ++i) f += coef[i] * k(support[i], x);
    return f;
  }
};

// Dual C-SVC by SMO with second-order working-set selection.
BinarySvm solve_smo(const std::vector<const std::vector<double>*>& x, const std::vector<int>& y, double c,
                    const Kernel& kernel) {
  const std::size_t n = x.size();
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) K[i * n + j] = K[j * n + i] = kernel(*x[i], *x[j]);
  auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * K[i * n + j]; };

  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  constexpr double eps = 1e-3, tau = 1e-12;
  const std::size_t max_iter = std::max<std::size_t>(10000000, 100 * n);
  auto up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
  auto low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double gmax = -HUGE_VAL;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t)
      if (up(t) && -y[t] * grad[t] >= gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    if (i == n) break;
    double gmin = HUGE_VAL, best_obj = HUGE_VAL;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!low(t)) continue;
      const double v = -y[t] * grad[t];
      gmin = std::min(gmin, v);
      const double b = gmax - v;
      if (b > 0) {
        double a = K[i * n + i] + K[t * n + t] - 2.0 * K[i * n + t];
        if (a <= 0) a = tau;
        const double obj = -(b * b) / a;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (j == n || gmax - gmin < eps) break;

    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * di + Q(t, j) * dj;
  }

  // Offset from free vectors, or the midpoint of the feasible interval.
  double ub = HUGE_VAL, lb = -HUGE_VAL, sum_free = 0.0;
  int n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  BinarySvm m;
  m.rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;
  for (std::size_t t = 0; t < n; ++t)
    if (alpha[t] > 0) {
      m.support.push_back(*x[t]);
      m.coef.push_back(alpha[t] * y[t]);
    }
  return m;
}

// ---- bagged trees -----------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> dist;  // class proportions
};

struct Tree {
  std::vector<TreeNode> nodes;

  const std::vector<double>& leaf(const std::vector<double>& x) const {
    int k = 0;
    while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
      const TreeNode& nd = nodes[static_cast<std::size_t>(k)];
      k = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(k)].dist;
  }
};

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0) return 0.0;
  double s = 1.0;
  for (double c : counts) s -= (c / total) * (c / total);
  return s;
}

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

SplitChoice best_split(const std::vector<std::vector<double>>& x, const std::vector<int>& y, std::size_t n_classes,
                       const std::vector<std::size_t>& idx) {
  SplitChoice best;
  if (idx.size() < 2) return best;
  std::vector<double> total(n_classes, 0.0);
  for (std::size_t i : idx) total[static_cast<std::size_t>(y[i])] += 1.0;
  const double n = static_cast<double>(idx.size());
  const double parent = gini(total, n);
  if (parent <= 0) return best;
  const std::size_t n_features = x[idx[0]].size();
  std::vector<std::size_t> order(idx);
  for (std::size_t f = 0; f < n_features; ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
    std::vector<double> left(n_classes, 0.0);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      left[static_cast<std::size_t>(y[order[k]])] += 1.0;
      const double lo = x[order[k]][f], hi = x[order[k + 1]][f];
      if (!(lo < hi)) continue;
      std::vector<double> right(n_classes);
      for (std::size_t c = 0; c < n_classes; ++c) right[c] = total[c] - left[c];
      const double nl = static_cast<double>(k + 1), nr = n - nl;
      const double gain = parent - (nl / n) * gini(left, nl) - (nr / n) * gini(right, nr);
      if (gain > best.gain + 1e-12) {
        best.gain = gain;
        best.feature = static_cast<int>(f);
        best.threshold = 0.5 * (lo + hi);
      }
    }
  }
  best.gain *= n;  // weight by node size so large nodes split first
  return best;
}

Tree grow_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y, std::size_t n_classes,
               std::vector<std::size_t> idx, int max_splits) {
  Tree t;
  std::vector<std::vector<std::size_t>> members;
  auto make_leaf = [&](std::vector<std::size_t> m) {
    TreeNode nd;
    nd.dist.assign(n_classes, 0.0);
    for (std::size_t i : m) nd.dist[static_cast<std::size_t>(y[i])] += 1.0;
    for (double& d : nd.dist) d /= static_cast<double>(m.size());
    t.nodes.push_back(nd);
    members.push_back(std::move(m));
    return static_cast<int>(t.nodes.size() - 1);
  };
  make_leaf(std::move(idx));
  std::vector<SplitChoice> pending{best_split(x, y, n_classes, members[0])};
  for (int s = 0; s < max_splits; ++s) {
    int pick = -1;
    for (std::size_t k = 0; k < pending.size(); ++k)
      if (t.nodes[k].feature < 0 && pending[k].feature >= 0 &&
          (pick < 0 || pending[k].gain > pending[static_cast<std::size_t>(pick)].gain))
        pick = static_cast<int>(k);
    if (pick < 0) break;
    const auto p = static_cast<std::size_t>(pick);
    const SplitChoice sc = pending[p];
    std::vector<std::size_t> l, r;
    for (std::size_t i : members[p]) (x[i][static_cast<std::size_t>(sc.feature)] < sc.threshold ? l : r).push_back(i);
    const int li = make_leaf(std::move(l));
    const int ri = make_leaf(std::move(r));
    t.nodes[p].feature = sc.feature;
    t.nodes[p].threshold = sc.threshold;
    t.nodes[p].left = li;
    t.nodes[p].right = ri;
    pending.push_back(best_split(x, y, n_classes, members[static_cast<std::size_t>(li)]));
    pending.push_back(best_split(x, y, n_classes, members[static_cast<std::size_t>(ri)]));
  }
  return t;
}

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

// ---- spec -----------------------------------------------------------------

ClassifierSpec ClassifierSpec::preset(std::string_view name) {
  ClassifierSpec s;
  s.name = std::string(name);
  if (name == "medium_gaussian_svm") {
    s.kernel_scale = 2.2;
  } else if (name == "coarse_gaussian_svm") {
    s.kernel_scale = 8.9;
  } else if (name == "fine_gaussian_svm") {
    s.kernel_scale = 0.56;
  } else if (name == "quadratic_svm") {
    s.algorithm = Algorithm::QuadraticSvm;
    s.kernel_scale = 0.0;
  } else if (name == "fine_knn") {
    s.algorithm = Algorithm::Knn;
    s.neighbors = 1;
  } else if (name == "medium_knn") {
    s.algorithm = Algorithm::Knn;
    s.neighbors = 10;
  } else if (name == "cosine_knn") {
    s.algorithm = Algorithm::Knn;
    s.neighbors = 10;
    s.metric = KnnMetric::Cosine;
  } else if (name == "weighted_knn") {
    s.algorithm = Algorithm::Knn;
    s.neighbors = 10;
    s.weighting = KnnWeighting::SquaredInverse;
  } else if (name == "bagged_trees") {
    s.algorithm = Algorithm::BaggedTrees;
    s.max_splits = 11;
    s.learners = 30;
  } else {
    throw ConfigError("unknown classifier preset '" + std::string(name) + "'");
  }
  return s;
}

std::vector<std::string> ClassifierSpec::preset_names() {
  return {"medium_gaussian_svm", "coarse_gaussian_svm", "fine_gaussian_svm", "quadratic_svm", "fine_knn",
          "medium_knn",          "cosine_knn",          "weighted_knn",      "bagged_trees"};
}

void ClassifierSpec::validate() const {
  if (kernel_scale < 0 || !std::isfinite(kernel_scale)) throw ConfigError("classifier: kernel scale must be positive");
  if (box_constraint <= 0) throw ConfigError("classifier: box constraint must be positive");
  if (neighbors < 1) throw ConfigError("classifier: neighbor count must be positive");
  if (max_splits < 1 || learners < 1) throw ConfigError("classifier: split and learner counts must be positive");
}

std::string_view to_string(MicMode mode) {
  switch (mode) {
    case MicMode::Both: return "both";
    case MicMode::Bottom: return "bottom";
    case MicMode::Top: return "top";
  }
  return "?";
}

MicMode parse_mic_mode(std::string_view text) {
  if (text == "both") return MicMode::Both;
  if (text == "bottom") return MicMode::Bottom;
  if (text == "top") return MicMode::Top;
  throw ConfigError("unknown mic mode '" + std::string(text) + "'");
}

std::vector<double> feature_vector(const LabeledStrokeSample& s, MicMode mode) {
  switch (mode) {
    case MicMode::Both: return {s.angle_bottom, s.range_bottom, s.angle_top, s.range_top};
    case MicMode::Bottom: return {s.angle_bottom, s.range_bottom};
    case MicMode::Top: return {s.angle_top, s.range_top};
  }
  return {};
}

std::optional<std::vector<double>> feature_vector(const StrokeObservation& o, MicMode mode) {
  const bool need_b = mode != MicMode::Top, need_t = mode != MicMode::Bottom;
  if ((need_b && !o.bottom) || (need_t && !o.top)) return std::nullopt;
  LabeledStrokeSample s;
  if (o.bottom) {
    s.angle_bottom = o.bottom->angle;
    s.range_bottom = o.bottom->range;
  }
  if (o.top) {
    s.angle_top = o.top->angle;
    s.range_top = o.top->range;
  }
  return feature_vector(s, mode);
}

// ---- classifier -------------------------------------------------------------

struct StrokeClassifier::Impl {
  ClassifierSpec spec;
  MicMode mode = MicMode::Both;
  std::vector<int> classes;
  std::vector<double> mean, scale;
  double kernel_scale = 1.0;
  std::vector<BinarySvm> svms;
  std::vector<std::vector<double>> points;  // k-NN training set, standardized
  std::vector<int> point_class;              // index into classes
  std::vector<Tree> trees;

  std::vector<double> standardize(const std::vector<double>& f) const {
    if (f.size() != mean.size()) throw InputError("classifier: feature vector has wrong length");
    std::vector<double> z(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) z[i] = (f[i] - mean[i]) / scale[i];
    return z;
  }
};

StrokeClassifier::StrokeClassifier() : impl_(std::make_unique<Impl>()) {}
StrokeClassifier::StrokeClassifier(const StrokeClassifier& o) : impl_(std::make_unique<Impl>(*o.impl_)) {}
StrokeClassifier& StrokeClassifier::operator=(const StrokeClassifier& o) {
  if (this != &o) impl_ = std::make_unique<Impl>(*o.impl_);
  return *this;
}
StrokeClassifier::StrokeClassifier(StrokeClassifier&&) noexcept = default;
StrokeClassifier& StrokeClassifier::operator=(StrokeClassifier&&) noexcept = default;
StrokeClassifier::~StrokeClassifier() = default;

const ClassifierSpec& StrokeClassifier::spec() const { return impl_->spec; }
MicMode StrokeClassifier::mic_mode() const { return impl_->mode; }
const std::vector<int>& StrokeClassifier::classes() const { return impl_->classes; }

StrokeClassifier StrokeClassifier::train(const std::vector<LabeledStrokeSample>& samples, const ClassifierSpec& spec,
                                         MicMode mode) {
  spec.validate();
  std::map<int, int> counts;
  for (const auto& s : samples) ++counts[s.stroke_id];
  if (counts.size() < 2) throw TrainingError("classifier: need at least two classes");
  for (auto [label, n] : counts)
    if (n < 2) throw TrainingError("classifier: class " + std::to_string(label) + " has fewer than two samples");

  StrokeClassifier out;
  Impl& m = *out.impl_;
  m.spec = spec;
  m.mode = mode;
  for (auto [label, n] : counts) m.classes.push_back(label);

  std::vector<std::vector<double>> raw;
  for (const auto& s : samples) {
    raw.push_back(feature_vector(s, mode));
    for (double v : raw.back())
      if (!std::isfinite(v)) throw TrainingError("classifier: non-finite feature");
  }
  const std::size_t nf = raw[0].size(), n = raw.size();
  m.mean.assign(nf, 0.0);
  m.scale.assign(nf, 0.0);
  for (const auto& r : raw)
    for (std::size_t f = 0; f < nf; ++f) m.mean[f] += r[f] / static_cast<double>(n);
  for (const auto& r : raw)
    for (std::size_t f = 0; f < nf; ++f) m.scale[f] += (r[f] - m.mean[f]) * (r[f] - m.mean[f]);
  for (double& s : m.scale) {
    s = std::sqrt(s / static_cast<double>(n - 1));
    if (!(s > 1e-12)) s = 1.0;
  }
  std::vector<std::vector<double>> x;
  std::vector<int> cls;
  for (std::size_t i = 0; i < n; ++i) {
    x.push_back(m.standardize(raw[i]));
    cls.push_back(static_cast<int>(std::lower_bound(m.classes.begin(), m.classes.end(), samples[i].stroke_id) -
                                   m.classes.begin()));
  }

  switch (spec.algorithm) {
    case Algorithm::GaussianSvm:
    case Algorithm::QuadraticSvm: {
      m.kernel_scale = spec.kernel_scale > 0 ? spec.kernel_scale : std::sqrt(static_cast<double>(nf));
      const Kernel k{spec.algorithm, m.kernel_scale};
      for (std::size_t p = 0; p < m.classes.size(); ++p)
        for (std::size_t q = p + 1; q < m.classes.size(); ++q) {
          std::vector<const std::vector<double>*> xs;
          std::vector<int> ys;
          for (std::size_t i = 0; i < n; ++i) {
            if (cls[i] == static_cast<int>(p)) {
              xs.push_back(&x[i]);
              ys.push_back(1);
            } else if (cls[i] == static_cast<int>(q)) {
              xs.push_back(&x[i]);
              ys.push_back(-1);
            }
          }
          BinarySvm svm = solve_smo(xs, ys, spec.box_constraint, k);
          svm.positive = static_cast<int>(p);
          svm.negative = static_cast<int>(q);
          m.svms.push_back(std::move(svm));
        }
      break;
    }
    case Algorithm::Knn:
      m.points = std::move(x);
      m.point_class = std::move(cls);
      break;
    case Algorithm::BaggedTrees: {
      for (int l = 0; l < spec.learners; ++l) {
        std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(l)));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> idx(n);
        for (auto& i : idx) i = pick(rng);
        m.trees.push_back(grow_tree(x, cls, m.classes.size(), std::move(idx), spec.max_splits));
      }
      break;
    }
  }
  return out;
}

Prediction StrokeClassifier::predict(const std::vector<double>& features) const {
  const Impl& m = *impl_;
  if (m.classes.empty()) throw InputError("classifier: model is not trained");
  const std::vector<double> z = m.standardize(features);
  const std::size_t nc = m.classes.size();
  std::vector<double> score(nc, 0.0);

  switch (m.spec.algorithm) {
    case Algorithm::GaussianSvm:
    case Algorithm::QuadraticSvm: {
      const Kernel k{m.spec.algorithm, m.kernel_scale};
      for (const auto& svm : m.svms)
        score[static_cast<std::size_t>(svm.decision(z, k) > 0 ? svm.positive : svm.negative)] += 1.0;
      for (double& s : score) s /= static_cast<double>(nc - 1);
      break;
    }
    case Algorithm::Knn: {
      const bool cosine = m.spec.metric == KnnMetric::Cosine;
      const double zn = std::sqrt(dot(z, z));
      std::vector<std::pair<double, std::size_t>> d;
      d.reserve(m.points.size());
      for (std::size_t i = 0; i < m.points.size(); ++i) {
        double dist;
        if (cosine) {
          const double pn = std::sqrt(dot(m.points[i], m.points[i]));
          dist = (zn > 0 && pn > 0) ? 1.0 - dot(z, m.points[i]) / (zn * pn) : 1.0;
          dist = std::max(dist, 0.0);
        } else {
          dist = std::sqrt(sq_dist(z, m.points[i]));
        }
        d.emplace_back(dist, i);
      }
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(m.spec.neighbors), d.size());
      std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
      const bool exact = d[0].first == 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const auto [dist, idx] = d[i];
        double w;
        if (exact) w = dist == 0.0 ? 1.0 : 0.0;
        else w = m.spec.weighting == KnnWeighting::SquaredInverse ? 1.0 / (dist * dist) : 1.0;
        score[static_cast<std::size_t>(m.point_class[idx])] += w;
      }
      const double total = std::accumulate(score.begin(), score.end(), 0.0);
      for (double& s : score) s /= total;
      break;
    }
    case Algorithm::BaggedTrees:
      for (const auto& t : m.trees) {
        const auto& dist = t.leaf(z);
        for (std::size_t c = 0; c < nc; ++c) score[c] += dist[c] / static_cast<double>(m.trees.size());
      }
      break;
  }
  Prediction p;
  p.label = m.classes[argmax_first(score)];
  for (std::size_t c = 0; c < nc; ++c) p.scores.emplace_back(m.classes[c], score[c]);
  return p;
}

std::string StrokeClassifier::serialize() const {
  const Impl& m = *impl_;
  json j;
  j["format"] = "sonarsnoop-classifier";
  j["version"] = 1;
  j["spec"] = {{"name", m.spec.name},
               {"algorithm", algorithm_name(m.spec.algorithm)},
               {"kernel_scale", m.spec.kernel_scale},
               {"box_constraint", m.spec.box_constraint},
               {"neighbors", m.spec.neighbors},
               {"metric", m.spec.metric == KnnMetric::Cosine ? "cosine" : "euclidean"},
               {"weighting", m.spec.weighting == KnnWeighting::SquaredInverse ? "squared_inverse" : "equal"},
               {"max_splits", m.spec.max_splits},
               {"learners", m.spec.learners},
               {"seed", m.spec.seed}};
  j["mic_mode"] = to_string(m.mode);
  j["classes"] = m.classes;
  j["mean"] = m.mean;
  j["scale"] = m.scale;
  j["kernel_scale"] = m.kernel_scale;
  json svms = json::array();
  for (const auto& s : m.svms)
    svms.push_back({{"positive", s.positive}, {"negative", s.negative}, {"rho", s.rho},
                    {"support", s.support}, {"coef", s.coef}});
  j["svms"] = svms;
  j["points"] = m.points;
  j["point_class"] = m.point_class;
  json trees = json::array();
  for (const auto& t : m.trees) {
    json nodes = json::array();
    for (const auto& nd : t.nodes)
      nodes.push_back({{"feature", nd.feature}, {"threshold", nd.threshold}, {"left", nd.left},
                       {"right", nd.right}, {"dist", nd.dist}});
    trees.push_back(nodes);
  }
  j["trees"] = trees;
  return j.dump();
}

StrokeClassifier StrokeClassifier::deserialize(std::string_view text) {
  StrokeClassifier out;
  Impl& m = *out.impl_;
  try {
    const json j = json::parse(text);
    if (j.at("format") != "sonarsnoop-classifier" || j.at("version") != 1)
      throw IoError("classifier: unsupported model format");
    const json& s = j.at("spec");
    m.spec.name = s.at("name");
    m.spec.algorithm = parse_algorithm(s.at("algorithm").get<std::string>());
    m.spec.kernel_scale = s.at("kernel_scale");
    m.spec.box_constraint = s.at("box_constraint");
    m.spec.neighbors = s.at("neighbors");
    m.spec.metric = s.at("metric") == "cosine" ? KnnMetric::Cosine : KnnMetric::Euclidean;
    m.spec.weighting = s.at("weighting") == "squared_inverse" ? KnnWeighting::SquaredInverse : KnnWeighting::Equal;
    m.spec.max_splits = s.at("max_splits");
    m.spec.learners = s.at("learners");
    m.spec.seed = s.at("seed");
    m.mode = parse_mic_mode(j.at("mic_mode").get<std::string>());
    m.classes = j.at("classes").get<std::vector<int>>();
    m.mean = j.at("mean").get<std::vector<double>>();
    m.scale = j.at("scale").get<std::vector<double>>();
    m.kernel_scale = j.at("kernel_scale");
    for (const auto& sv : j.at("svms")) {
      BinarySvm b;
      b.positive = sv.at("positive");
      b.negative = sv.at("negative");
      b.rho = sv.at("rho");
      b.support = sv.at("support").get<std::vector<std::vector<double>>>();
      b.coef = sv.at("coef").get<std::vector<double>>();
      m.svms.push_back(std::move(b));
    }
    m.points = j.at("points").get<std::vector<std::vector<double>>>();
    m.point_class = j.at("point_class").get<std::vector<int>>();
    for (const auto& tj : j.at("trees")) {
      Tree t;
      for (const auto& nj : tj) {
        TreeNode nd;
        nd.feature = nj.at("feature");
        nd.threshold = nj.at("threshold");
        nd.left = nj.at("left");
        nd.right = nj.at("right");
        nd.dist = nj.at("dist").get<std::vector<double>>();
        t.nodes.push_back(std::move(nd));
      }
      m.trees.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("classifier: malformed model: ") + e.what());
  }
  if (m.classes.size() < 2 || m.mean.size() != m.scale.size()) throw IoError("classifier: inconsistent model");
  return out;
}

double accuracy(const StrokeClassifier& model, const std::vector<LabeledStrokeSample>& samples) {
  if (samples.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& s : samples)
    if (model.predict_label(feature_vector(s, model.mic_mode())) == s.stroke_id) ++ok;
  return static_cast<double>(ok) / static_cast<double>(samples.size());
}

std::vector<double> cross_validate(const std::vector<LabeledStrokeSample>& samples, const ClassifierSpec& spec,
                                   MicMode mode, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least two folds");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) by_class[samples[i].stroke_id].push_back(i);
  if (by_class.size() < 2) throw TrainingError("cross-validation: need at least two classes");
  std::vector<int> fold_of(samples.size());
  std::mt19937_64 rng(seed);
  int next = 0;
  for (auto& [label, idx] : by_class) {
    if (idx.size() < static_cast<std::size_t>(folds))
      throw TrainingError("cross-validation: class " + std::to_string(label) + " has fewer samples than folds");
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) fold_of[i] = next++ % folds;
  }
  std::vector<double> out;
  for (int f = 0; f < folds; ++f) {
    std::vector<LabeledStrokeSample> train, test;
    for (std::size_t i = 0; i < samples.size(); ++i) (fold_of[i] == f ? test : train).push_back(samples[i]);
    out.push_back(accuracy(StrokeClassifier::train(train, spec, mode), test));
  }
  return out;
}

}  // namespace sonarsnoop
