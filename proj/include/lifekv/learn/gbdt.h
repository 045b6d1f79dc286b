#ifndef LIFEKV_LEARN_GBDT_H_
#define LIFEKV_LEARN_GBDT_H_

// Gradient-boosted regression trees for binary classification.
//
// Trees grow leaf-wise on histogram-binned features with logistic loss.
// Each split learns which side missing values take. Leaf output is
// -G / (H + l2_reg) * learning_rate.
//
// Text format:
//
//     lifekv-gbdt 1
//     version <n>
//     trained_at_seq <n>
//     base_score <double>
//     learning_rate <double>
//     gains <43 doubles>
//     trees <count>
//     tree <tree_id> <node_count>
//     <tree_id> <node_id> <kind> <feature> <threshold> <missing_dir> <left> <right> <leaf_value>
//     ...
//     end
//
// kind is S (split) or L (leaf); missing_dir is L or R. Doubles use the
// shortest round-trip decimal form.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lifekv/core/config.h"
#include "lifekv/core/env.h"
#include "lifekv/core/status.h"
#include "lifekv/features/features.h"
#include "lifekv/learn/samples.h"

namespace lifekv {

struct TreeNode {
  bool leaf = true;
  int feature = -1;
  double threshold = 0;     // go left iff value <= threshold
  bool missing_left = true;
  int left = -1;
  int right = -1;
  double leaf_value = 0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double Evaluate(const FeatureVector& v) const;
};

class LifetimeModel {
 public:
  LifetimeModel() { gains_.fill(0.0); }

  // Raw additive score before the sigmoid.
  double PredictRaw(const FeatureVector& v) const;
  // Probability of a long remaining lifetime.
  double Predict(const FeatureVector& v) const;
  static bool IsLong(double score) { return score >= 0.5; }

  size_t num_trees() const { return trees_.size(); }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  uint64_t version() const { return version_; }
  void set_version(uint64_t v) { version_ = v; }
  uint64_t trained_at_seq() const { return trained_at_seq_; }
  void set_trained_at_seq(uint64_t s) { trained_at_seq_ = s; }
  double base_score() const { return base_score_; }
  double learning_rate() const { return learning_rate_; }
  // Split-gain tally per input slot.
  const std::array<double, kNumFeatureSlots>& gains() const { return gains_; }
  std::array<double, 3> GroupGains() const;
  // Training logloss after each boosting round.
  const std::vector<double>& loss_trace() const { return loss_trace_; }

  std::string Serialize() const;
  static Status Parse(const std::string& text, LifetimeModel* model);
  Status Save(Env* env, const std::string& path) const;
  static Status Load(Env* env, const std::string& path, LifetimeModel* model);

 private:
  friend Status TrainModel(const Dataset&, const GbdtParams&, LifetimeModel*);

  std::vector<RegressionTree> trees_;
  uint64_t version_ = 0;
  uint64_t trained_at_seq_ = 0;
  double base_score_ = 0.0;
  double learning_rate_ = 0.1;
  std::array<double, kNumFeatureSlots> gains_;
  std::vector<double> loss_trace_;
};

// DegenerateDataset when the dataset is empty or carries a single label.
Status TrainModel(const Dataset& dataset, const GbdtParams& params, LifetimeModel* model);

double LogLoss(const Dataset& dataset, const LifetimeModel& model);

}  // namespace lifekv

#endif  // LIFEKV_LEARN_GBDT_H_
