#include "lifekv/learn/gbdt.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "lifekv/lifetime/lifetime.h"

namespace lifekv {

double RegressionTree::Evaluate(const FeatureVector& v) const {
  if (nodes.empty()) return 0.0;
  int i = 0;
  while (!nodes[i].leaf) {
    const TreeNode& n = nodes[i];
    const double x = v.slots[n.feature];
    bool left;
    if (FeatureVector::IsMissing(x)) {
      left = n.missing_left;
    } else {
      left = x <= n.threshold;
    }
    i = left ? n.left : n.right;
  }
  return nodes[i].leaf_value;
}

double LifetimeModel::PredictRaw(const FeatureVector& v) const {
  double s = base_score_;
  for (const RegressionTree& t : trees_) s += t.Evaluate(v);
  return s;
}

double LifetimeModel::Predict(const FeatureVector& v) const { return Sigmoid(PredictRaw(v)); }

std::array<double, 3> LifetimeModel::GroupGains() const {
  std::array<double, 3> g{0, 0, 0};
  for (int s = 0; s < kNumFeatureSlots; ++s) g[static_cast<int>(GroupOfSlot(s))] += gains_[s];
  return g;
}

namespace {

// log(1 + e^s) - y*s, evaluated without overflow.
double RowLoss(double score, int label) {
  const double softplus =
      score > 0 ? score + std::log1p(std::exp(-score)) : std::log1p(std::exp(score));
  return softplus - (label == 1 ? score : 0.0);
}

double MeanLoss(const std::vector<double>& scores, const std::vector<int>& labels) {
  double sum = 0;
  for (size_t i = 0; i < scores.size(); ++i) sum += RowLoss(scores[i], labels[i]);
  return sum / static_cast<double>(scores.size());
}

struct BinStats {
  double g = 0;
  double h = 0;
  uint32_t n = 0;
};

// Candidate thresholds per feature; the last one is the largest observed
// value, so every present value falls into bins 1..size. Bin 0 is missing.
struct Binning {
  std::vector<std::vector<double>> cuts;
  std::vector<std::vector<uint8_t>> bins;  // [feature][row]
};

Binning BuildBins(const Dataset& d, int max_bins) {
  const size_t n = d.rows();
  Binning b;
  b.cuts.resize(kNumFeatureSlots);
  b.bins.assign(kNumFeatureSlots, std::vector<uint8_t>(n, 0));
  std::vector<std::vector<std::pair<size_t, double>>> columns(kNumFeatureSlots);
  const auto& offsets = d.row_offsets();
  for (size_t r = 0; r < n; ++r) {
    for (uint32_t i = offsets[r]; i < offsets[r + 1]; ++i) {
      columns[d.slots()[i]].emplace_back(r, d.values()[i]);
    }
  }
  const size_t value_bins = static_cast<size_t>(max_bins - 1);
  for (int f = 0; f < kNumFeatureSlots; ++f) {
    auto& col = columns[f];
    if (col.empty()) continue;
    std::vector<double> sorted;
    sorted.reserve(col.size());
    for (const auto& [r, v] : col) sorted.push_back(v);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq = sorted;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<double>& cuts = b.cuts[f];
    if (uniq.size() <= value_bins) {
      for (size_t i = 0; i + 1 < uniq.size(); ++i) cuts.push_back((uniq[i] + uniq[i + 1]) / 2);
      cuts.push_back(uniq.back());
    } else {
      for (size_t j = 1; j < value_bins; ++j) {
        const double q = sorted[j * sorted.size() / value_bins];
        if (cuts.empty() || q > cuts.back()) cuts.push_back(q);
      }
      if (cuts.empty() || cuts.back() < sorted.back()) cuts.push_back(sorted.back());
    }
    for (const auto& [r, v] : col) {
      const size_t idx = std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin();
      b.bins[f][r] = static_cast<uint8_t>(1 + idx);
    }
  }
  return b;
}

struct Split {
  double gain = 0;
  int feature = -1;
  int bin = 0;  // present bins 1..bin go left
  bool missing_left = true;
};

struct Leaf {
  std::vector<uint32_t> rows;
  std::vector<BinStats> hist;  // kNumFeatureSlots * max_bins
  double g = 0;
  double h = 0;
  int node = 0;
  Split best;
};

class TreeBuilder {
 public:
  TreeBuilder(const Binning& bins, const GbdtParams& p, const std::vector<double>& grad,
              const std::vector<double>& hess)
      : bins_(bins), p_(p), grad_(grad), hess_(hess), width_(p.histogram_bins) {}

  RegressionTree Build(std::array<double, kNumFeatureSlots>* gains) {
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<Leaf> leaves(1);
    leaves[0].rows.resize(grad_.size());
    for (size_t i = 0; i < grad_.size(); ++i) leaves[0].rows[i] = static_cast<uint32_t>(i);
    FillHistogram(&leaves[0]);
    FindBest(&leaves[0]);
    while (static_cast<int>(leaves.size()) < p_.max_leaves) {
      int pick = -1;
      for (size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].best.feature < 0) continue;
        if (pick < 0 || leaves[i].best.gain > leaves[pick].best.gain) pick = static_cast<int>(i);
      }
      if (pick < 0) break;
      Leaf parent = std::move(leaves[pick]);
      const Split s = parent.best;
      (*gains)[s.feature] += s.gain;
      Leaf left, right;
      const auto& col = bins_.bins[s.feature];
      for (uint32_t r : parent.rows) {
        const uint8_t b = col[r];
        const bool go_left = b == 0 ? s.missing_left : b <= s.bin;
        (go_left ? left.rows : right.rows).push_back(r);
      }
      parent.rows.clear();
      parent.rows.shrink_to_fit();
      Leaf& small = left.rows.size() <= right.rows.size() ? left : right;
      Leaf& large = &small == &left ? right : left;
      FillHistogram(&small);
      large.hist = std::move(parent.hist);
      for (size_t i = 0; i < large.hist.size(); ++i) {
        large.hist[i].g -= small.hist[i].g;
        large.hist[i].h -= small.hist[i].h;
        large.hist[i].n -= small.hist[i].n;
      }
      large.g = parent.g - small.g;
      large.h = parent.h - small.h;

      TreeNode& node = tree.nodes[parent.node];
      node.leaf = false;
      node.feature = s.feature;
      node.threshold = bins_.cuts[s.feature][s.bin - 1];
      node.missing_left = s.missing_left;
      node.left = static_cast<int>(tree.nodes.size());
      node.right = node.left + 1;
      left.node = node.left;
      right.node = node.right;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      FindBest(&left);
      FindBest(&right);
      leaves[pick] = std::move(left);
      leaves.push_back(std::move(right));
    }
    for (const Leaf& leaf : leaves) {
      tree.nodes[leaf.node].leaf_value = -leaf.g / (leaf.h + p_.l2_reg) * p_.learning_rate;
    }
    return tree;
  }

 private:
  void FillHistogram(Leaf* leaf) {
    leaf->hist.assign(static_cast<size_t>(kNumFeatureSlots) * width_, BinStats{});
    double g = 0, h = 0;
    for (uint32_t r : leaf->rows) {
      g += grad_[r];
      h += hess_[r];
    }
    leaf->g = g;
    leaf->h = h;
    for (int f = 0; f < kNumFeatureSlots; ++f) {
      if (bins_.cuts[f].empty()) continue;
      BinStats* hist = &leaf->hist[static_cast<size_t>(f) * width_];
      const auto& col = bins_.bins[f];
      for (uint32_t r : leaf->rows) {
        BinStats& b = hist[col[r]];
        b.g += grad_[r];
        b.h += hess_[r];
        ++b.n;
      }
    }
  }

  double Score(double g, double h) const { return g * g / (h + p_.l2_reg); }

  void FindBest(Leaf* leaf) {
    leaf->best = Split{};
    const uint32_t total_n = static_cast<uint32_t>(leaf->rows.size());
    if (total_n < 2u * static_cast<uint32_t>(p_.min_samples_leaf)) return;
    const double parent = Score(leaf->g, leaf->h);
    const uint32_t min_n = static_cast<uint32_t>(p_.min_samples_leaf);
    for (int f = 0; f < kNumFeatureSlots; ++f) {
      const int nb = static_cast<int>(bins_.cuts[f].size());
      if (nb == 0) continue;
      const BinStats* hist = &leaf->hist[static_cast<size_t>(f) * width_];
      const BinStats miss = hist[0];
      double lg = 0, lh = 0;
      uint32_t ln = 0;
      for (int b = 1; b <= nb; ++b) {
        lg += hist[b].g;
        lh += hist[b].h;
        ln += hist[b].n;
        for (int m = 0; m < 2; ++m) {
          const bool missing_left = m == 0;
          if (miss.n == 0 && !missing_left) continue;
          const double gl = lg + (missing_left ? miss.g : 0.0);
          const double hl = lh + (missing_left ? miss.h : 0.0);
          const uint32_t nl = ln + (missing_left ? miss.n : 0);
          const uint32_t nr = total_n - nl;
          if (nl < min_n || nr < min_n) continue;
          const double gain = Score(gl, hl) + Score(leaf->g - gl, leaf->h - hl) - parent;
          if (gain > 1e-12 && gain > leaf->best.gain) {
            leaf->best = Split{gain, f, b, missing_left};
          }
        }
      }
    }
  }

  const Binning& bins_;
  const GbdtParams& p_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  const int width_;
};

void AppendDouble(std::string* out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out->append(buf, res.ptr);
}

bool ParseDouble(std::string_view s, double* v) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), *v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool ParseInt(std::string_view s, long long* v) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), *v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> Fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

double LogLoss(const Dataset& d, const LifetimeModel& model) {
  if (d.empty()) return 0.0;
  double sum = 0;
  for (size_t r = 0; r < d.rows(); ++r) sum += RowLoss(model.PredictRaw(d.Row(r)), d.label(r));
  return sum / static_cast<double>(d.rows());
}

Status TrainModel(const Dataset& d, const GbdtParams& p, LifetimeModel* model) {
  if (d.empty() || d.positives() == 0 || d.positives() == d.rows()) {
    return Status::DegenerateDataset("dataset needs both labels");
  }
  LifetimeModel m;
  m.learning_rate_ = p.learning_rate;
  m.base_score_ = 0.0;
  const size_t n = d.rows();
  const Binning bins = BuildBins(d, p.histogram_bins);
  std::vector<int> labels(n);
  for (size_t r = 0; r < n; ++r) labels[r] = d.label(r);
  std::vector<double> scores(n, m.base_score_), grad(n), hess(n), delta(n);
  double loss = MeanLoss(scores, labels);
  for (int round = 0; round < p.num_trees; ++round) {
    for (size_t r = 0; r < n; ++r) {
      const double prob = Sigmoid(scores[r]);
      grad[r] = prob - labels[r];
      hess[r] = std::max(prob * (1.0 - prob), 1e-16);
    }
    TreeBuilder builder(bins, p, grad, hess);
    RegressionTree tree = builder.Build(&m.gains_);
    // Row outputs of the new tree, via the binned path used for training.
    std::vector<double> tentative(n);
    for (size_t r = 0; r < n; ++r) {
      int i = 0;
      while (!tree.nodes[i].leaf) {
        const TreeNode& node = tree.nodes[i];
        const uint8_t b = bins.bins[node.feature][r];
        const bool left = b == 0 ? node.missing_left
                                 : bins.cuts[node.feature][b - 1] <= node.threshold;
        i = left ? node.left : node.right;
      }
      delta[r] = tree.nodes[i].leaf_value;
    }
    // Shrink the step until the training loss does not go up.
    double new_loss = loss;
    double scale = 1.0;
    for (int attempt = 0; attempt < 30; ++attempt) {
      for (size_t r = 0; r < n; ++r) tentative[r] = scores[r] + scale * delta[r];
      new_loss = MeanLoss(tentative, labels);
      if (new_loss <= loss) break;
      scale *= 0.5;
    }
    if (new_loss > loss) {
      scale = 0.0;
      new_loss = loss;
      tentative = scores;
    }
    if (scale != 1.0) {
      for (TreeNode& node : tree.nodes) node.leaf_value *= scale;
    }
    scores.swap(tentative);
    loss = new_loss;
    m.loss_trace_.push_back(loss);
    m.trees_.push_back(std::move(tree));
  }
  m.version_ = model->version_;
  m.trained_at_seq_ = model->trained_at_seq_;
  *model = std::move(m);
  return Status::OK();
}

std::string LifetimeModel::Serialize() const {
  std::string out = "lifekv-gbdt 1\n";
  out += "version " + std::to_string(version_) + "\n";
  out += "trained_at_seq " + std::to_string(trained_at_seq_) + "\n";
  out += "base_score ";
  AppendDouble(&out, base_score_);
  out += "\nlearning_rate ";
  AppendDouble(&out, learning_rate_);
  out += "\ngains";
  for (double g : gains_) {
    out += ' ';
    AppendDouble(&out, g);
  }
  out += "\ntrees " + std::to_string(trees_.size()) + "\n";
  for (size_t t = 0; t < trees_.size(); ++t) {
    const auto& nodes = trees_[t].nodes;
    out += "tree " + std::to_string(t) + " " + std::to_string(nodes.size()) + "\n";
    for (size_t i = 0; i < nodes.size(); ++i) {
      const TreeNode& n = nodes[i];
      out += std::to_string(t) + " " + std::to_string(i) + (n.leaf ? " L " : " S ");
      out += std::to_string(n.feature) + " ";
      AppendDouble(&out, n.threshold);
      out += n.missing_left ? " L " : " R ";
      out += std::to_string(n.left) + " " + std::to_string(n.right) + " ";
      AppendDouble(&out, n.leaf_value);
      out += "\n";
    }
  }
  out += "end\n";
  return out;
}

Status LifetimeModel::Parse(const std::string& text, LifetimeModel* model) {
  std::istringstream in(text);
  std::string line;
  auto next = [&](std::vector<std::string_view>* f) -> bool {
    if (!std::getline(in, line)) return false;
    *f = Fields(line);
    return true;
  };
  auto corrupt = [](const std::string& why) { return Status::CorruptModel(why); };
  std::vector<std::string_view> f;
  LifetimeModel m;
  long long iv = 0;
  if (!next(&f) || f.size() != 2 || f[0] != "lifekv-gbdt" || f[1] != "1") {
    return corrupt("bad header");
  }
  if (!next(&f) || f.size() != 2 || f[0] != "version" || !ParseInt(f[1], &iv) || iv < 0) {
    return corrupt("bad version");
  }
  m.version_ = static_cast<uint64_t>(iv);
  if (!next(&f) || f.size() != 2 || f[0] != "trained_at_seq" || !ParseInt(f[1], &iv) ||
      iv < 0) {
    return corrupt("bad trained_at_seq");
  }
  m.trained_at_seq_ = static_cast<uint64_t>(iv);
  if (!next(&f) || f.size() != 2 || f[0] != "base_score" || !ParseDouble(f[1], &m.base_score_)) {
    return corrupt("bad base_score");
  }
  if (!next(&f) || f.size() != 2 || f[0] != "learning_rate" ||
      !ParseDouble(f[1], &m.learning_rate_)) {
    return corrupt("bad learning_rate");
  }
  if (!next(&f) || f.size() != 1 + kNumFeatureSlots || f[0] != "gains") {
    return corrupt("bad gains");
  }
  for (int s = 0; s < kNumFeatureSlots; ++s) {
    if (!ParseDouble(f[1 + s], &m.gains_[s])) return corrupt("bad gain value");
  }
  if (!next(&f) || f.size() != 2 || f[0] != "trees" || !ParseInt(f[1], &iv) || iv < 0) {
    return corrupt("bad tree count");
  }
  const long long tree_count = iv;
  for (long long t = 0; t < tree_count; ++t) {
    long long node_count = 0;
    if (!next(&f) || f.size() != 3 || f[0] != "tree" || !ParseInt(f[1], &iv) || iv != t ||
        !ParseInt(f[2], &node_count) || node_count < 1) {
      return corrupt("bad tree line");
    }
    RegressionTree tree;
    tree.nodes.resize(static_cast<size_t>(node_count));
    for (long long i = 0; i < node_count; ++i) {
      if (!next(&f) || f.size() != 9) return corrupt("truncated tree");
      long long tid = 0, nid = 0, feature = 0, left = 0, right = 0;
      TreeNode& n = tree.nodes[i];
      if (!ParseInt(f[0], &tid) || tid != t || !ParseInt(f[1], &nid) || nid != i ||
          (f[2] != "L" && f[2] != "S") || !ParseInt(f[3], &feature) ||
          !ParseDouble(f[4], &n.threshold) || (f[5] != "L" && f[5] != "R") ||
          !ParseInt(f[6], &left) || !ParseInt(f[7], &right) ||
          !ParseDouble(f[8], &n.leaf_value)) {
        return corrupt("bad node line");
      }
      n.leaf = f[2] == "L";
      n.missing_left = f[5] == "L";
      n.feature = static_cast<int>(feature);
      n.left = static_cast<int>(left);
      n.right = static_cast<int>(right);
      if (!n.leaf) {
        if (feature < 0 || feature >= kNumFeatureSlots) return corrupt("bad split feature");
        // Children always follow their parent, so chains cannot cycle.
        if (left <= i || right <= i || left >= node_count || right >= node_count) {
          return corrupt("dangling child reference");
        }
      }
    }
    m.trees_.push_back(std::move(tree));
  }
  if (!next(&f) || f.size() != 1 || f[0] != "end") return corrupt("missing end marker");
  *model = std::move(m);
  return Status::OK();
}

Status LifetimeModel::Save(Env* env, const std::string& path) const {
  return WriteStringToFile(env, Serialize(), path, FileKind::kModel, /*sync=*/true);
}

Status LifetimeModel::Load(Env* env, const std::string& path, LifetimeModel* model) {
  std::string text;
  LIFEKV_RETURN_IF_ERROR(env->ReadFileToString(path, &text));
  return Parse(text, model);
}

}  // namespace lifekv
