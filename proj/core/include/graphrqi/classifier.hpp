#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "graphrqi/features.hpp"
#include "graphrqi/trajectory.hpp"

namespace graphrqi {

/// Declaration order is the tie-break order of predict().
enum class BehaviorLabel { kImpatient, kReckless, kThreatening, kCareful, kCautious, kTimid };
inline constexpr int kNumClasses = 6;
inline constexpr std::array<BehaviorLabel, kNumClasses> kAllLabels = {
    BehaviorLabel::kImpatient, BehaviorLabel::kReckless, BehaviorLabel::kThreatening,
    BehaviorLabel::kCareful,   BehaviorLabel::kCautious, BehaviorLabel::kTimid};

enum class Superclass { kAggressive, kConservative };

Superclass superclass_of(BehaviorLabel label) noexcept;
std::string_view label_name(BehaviorLabel label) noexcept;
std::string_view superclass_name(Superclass s) noexcept;
std::optional<BehaviorLabel> parse_label(std::string_view name);
inline int class_index(BehaviorLabel label) noexcept { return static_cast<int>(label); }

using LabelMap = std::map<AgentId, BehaviorLabel>;

/// Header `agent_id,label`.
std::string format_labels_csv(const LabelMap& labels);
void write_labels_csv(const LabelMap& labels, const std::filesystem::path& path);
LabelMap parse_labels_csv(std::string_view text);
LabelMap load_labels_csv(const std::filesystem::path& path);

/// Labels for each feature row. Throws DegenerateDataError naming the first
/// unlabeled agent.
std::vector<BehaviorLabel> align_labels(const FeatureMatrix& fm, const LabelMap& labels);

/// One tanh hidden layer and a linear output layer, or with hidden == 0 a
/// single linear layer (one linear score per class).
struct MLPParams {
  int input_dim = 0;
  int hidden = 0;
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // 6 x hidden, or 6 x input when linear
  Eigen::VectorXd b2;

  bool linear() const noexcept { return hidden == 0; }
  friend bool operator==(const MLPParams& a, const MLPParams& b);
};

struct TrainOptions {
  int hidden = 32;
  bool linear = false;
  double learning_rate = 0.1;
  int epochs = 3000;
  std::uint64_t seed = 1;
  double l2 = 0.0;
  bool inverse_frequency = false;
  /// z-score columns on the training rows; folded into the first layer of
  /// the returned parameters, so predict() takes raw features.
  bool standardize = true;
};

struct TrainResult {
  MLPParams params;
  /// Loss after every accepted epoch, element 0 at initialization.
  std::vector<double> loss_history;
};

/// Full-batch gradient descent on the weighted mean of 1/2 ||out - onehot||^2
/// plus l2/2 ||W||^2. A step that raises the loss is halved until it does
/// not. Throws DegenerateDataError with fewer than two classes.
TrainResult train(const Eigen::MatrixXd& x, const std::vector<BehaviorLabel>& y,
                  const TrainOptions& options);

/// Random initialization used by train().
MLPParams init_params(int input_dim, int hidden, std::uint64_t seed);

/// Loss and gradient in the same layout as the parameters.
struct LossGradient {
  double loss = 0.0;
  MLPParams grad;
};
LossGradient loss_and_gradient(const MLPParams& p, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& targets, const Eigen::VectorXd& weights,
                               double l2);

/// Flattened parameter view, for optimizers and finite-difference checks.
Eigen::VectorXd flatten(const MLPParams& p);
void unflatten(MLPParams& p, const Eigen::VectorXd& theta);

/// One-hot rows, 6 columns.
Eigen::MatrixXd one_hot(const std::vector<BehaviorLabel>& y);

struct Prediction {
  BehaviorLabel label = BehaviorLabel::kImpatient;
  std::array<double, kNumClasses> scores{};
};

/// Output scores for each row (rows x 6).
Eigen::MatrixXd forward(const MLPParams& p, const Eigen::MatrixXd& x);
std::vector<Prediction> predict(const MLPParams& p, const Eigen::MatrixXd& x);
std::vector<BehaviorLabel> predicted_labels(const std::vector<Prediction>& preds);

/// confusion(t, p) counts truth class t predicted as p.
Eigen::Matrix<long, kNumClasses, kNumClasses> confusion_matrix(const std::vector<BehaviorLabel>& pred,
                                                               const std::vector<BehaviorLabel>& truth);
/// Recall per class; NaN for classes absent from truth.
std::array<double, kNumClasses> per_class_recall(const std::vector<BehaviorLabel>& pred,
                                                 const std::vector<BehaviorLabel>& truth);
/// Sum over classes of (class frequency in truth) x (class recall).
double weighted_accuracy(const std::vector<BehaviorLabel>& pred, const std::vector<BehaviorLabel>& truth);
double superclass_accuracy(const std::vector<BehaviorLabel>& pred,
                           const std::vector<BehaviorLabel>& truth);

/// true = train. Per class, round(train_fraction * count) rows go to train,
/// keeping at least one on each side when the class has two or more rows.
std::vector<bool> stratified_split(const std::vector<BehaviorLabel>& y, double train_fraction,
                                   std::uint64_t seed);

/// Line 1 `k h 6`, then w1 rows, b1, w2 rows, b2 (w2/b2 only when h = 0).
std::string format_model(const MLPParams& p);
void write_model(const MLPParams& p, const std::filesystem::path& path);
MLPParams parse_model(std::string_view text);
MLPParams load_model(const std::filesystem::path& path);

}  // namespace graphrqi
