#include "graphrqi/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "file_util.hpp"
#include "graphrqi/errors.hpp"
#include "text_util.hpp"

namespace graphrqi {

Superclass superclass_of(BehaviorLabel label) noexcept {
  return class_index(label) < 3 ? Superclass::kAggressive : Superclass::kConservative;
}

std::string_view label_name(BehaviorLabel label) noexcept {
  switch (label) {
    case BehaviorLabel::kImpatient: return "impatient";
    case BehaviorLabel::kReckless: return "reckless";
    case BehaviorLabel::kThreatening: return "threatening";
    case BehaviorLabel::kCareful: return "careful";
    case BehaviorLabel::kCautious: return "cautious";
    case BehaviorLabel::kTimid: return "timid";
  }
  return "?";
}

std::string_view superclass_name(Superclass s) noexcept {
  return s == Superclass::kAggressive ? "aggressive" : "conservative";
}

std::optional<BehaviorLabel> parse_label(std::string_view name) {
  for (const auto l : kAllLabels) {
    if (label_name(l) == name) return l;
  }
  return std::nullopt;
}

std::string format_labels_csv(const LabelMap& labels) {
  std::string out = "agent_id,label\n";
  for (const auto& [id, l] : labels) {
    out += std::to_string(id);
    out += ',';
    out += label_name(l);
    out += '\n';
  }
  return out;
}

void write_labels_csv(const LabelMap& labels, const std::filesystem::path& path) {
  detail::write_file(path, format_labels_csv(labels));
}

LabelMap parse_labels_csv(std::string_view text) {
  LabelMap out;
  bool first = true;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto row = detail::trim(raw);
    if (row.empty()) return;
    const auto fields = detail::split(row, ',');
    if (first) {
      first = false;
      if (fields.size() == 2 && fields[0] == "agent_id" && fields[1] == "label") return;
    }
    if (fields.size() != 2) throw ParseError("expected 'agent_id,label'", line);
    const auto id = detail::parse_number<AgentId>(fields[0]);
    if (!id) throw ParseError("cannot parse agent_id '" + std::string(fields[0]) + "'", line);
    const auto l = parse_label(fields[1]);
    if (!l) throw ParseError("unknown label '" + std::string(fields[1]) + "'", line);
    if (!out.emplace(*id, *l).second) {
      throw ParseError("agent " + std::to_string(*id) + " labeled twice", line);
    }
  });
  return out;
}

LabelMap load_labels_csv(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  try {
    return parse_labels_csv(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::vector<BehaviorLabel> align_labels(const FeatureMatrix& fm, const LabelMap& labels) {
  std::vector<BehaviorLabel> out;
  out.reserve(fm.agent_ids.size());
  for (const AgentId id : fm.agent_ids) {
    const auto it = labels.find(id);
    if (it == labels.end()) throw DegenerateDataError("agent " + std::to_string(id) + " has no label");
    out.push_back(it->second);
  }
  return out;
}

bool operator==(const MLPParams& a, const MLPParams& b) {
  return a.input_dim == b.input_dim && a.hidden == b.hidden && a.w1 == b.w1 && a.b1 == b.b1 &&
         a.w2 == b.w2 && a.b2 == b.b2;
}

MLPParams init_params(int input_dim, int hidden, std::uint64_t seed) {
  if (input_dim < 1) throw ArgumentError("input dimension must be positive");
  if (hidden < 0) throw ArgumentError("hidden size must be non-negative");
  std::mt19937_64 rng(seed);
  auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-a, a);
    Eigen::MatrixXd m(rows, cols);
    // Explicit loop: fill order must not depend on Eigen's traversal.
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
  };
  MLPParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  if (hidden > 0) {
    p.w1 = glorot(hidden, input_dim);
    p.b1 = Eigen::VectorXd::Zero(hidden);
    p.w2 = glorot(kNumClasses, hidden);
  } else {
    p.w2 = glorot(kNumClasses, input_dim);
  }
  p.b2 = Eigen::VectorXd::Zero(kNumClasses);
  return p;
}

namespace {

void check_input(const MLPParams& p, const Eigen::MatrixXd& x) {
  if (x.cols() != p.input_dim) {
    throw ArgumentError("feature dimension " + std::to_string(x.cols()) + " does not match model input " +
                        std::to_string(p.input_dim));
  }
}

Eigen::MatrixXd hidden_layer(const MLPParams& p, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd h = x * p.w1.transpose();
  h.rowwise() += p.b1.transpose();
  return h.array().tanh().matrix();
}

}  // namespace

Eigen::MatrixXd forward(const MLPParams& p, const Eigen::MatrixXd& x) {
  check_input(p, x);
  Eigen::MatrixXd out = p.linear() ? Eigen::MatrixXd(x * p.w2.transpose())
                                   : Eigen::MatrixXd(hidden_layer(p, x) * p.w2.transpose());
  out.rowwise() += p.b2.transpose();
  return out;
}

LossGradient loss_and_gradient(const MLPParams& p, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& targets, const Eigen::VectorXd& weights,
                               double l2) {
  check_input(p, x);
  if (targets.rows() != x.rows() || targets.cols() != kNumClasses || weights.size() != x.rows()) {
    throw ArgumentError("loss_and_gradient: shape mismatch");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) throw ArgumentError("loss_and_gradient: weights must sum to a positive value");

  Eigen::MatrixXd h;
  const Eigen::MatrixXd& layer_in = p.linear() ? x : (h = hidden_layer(p, x));
  Eigen::MatrixXd out = layer_in * p.w2.transpose();
  out.rowwise() += p.b2.transpose();
  const Eigen::MatrixXd r = out - targets;

  LossGradient lg;
  lg.loss = 0.5 * (r.rowwise().squaredNorm().array() * weights.array()).sum() / total;
  lg.loss += 0.5 * l2 * (p.w1.squaredNorm() + p.w2.squaredNorm());

  const Eigen::MatrixXd d_out = (weights / total).asDiagonal() * r;
  lg.grad.input_dim = p.input_dim;
  lg.grad.hidden = p.hidden;
  lg.grad.w2 = d_out.transpose() * layer_in + l2 * p.w2;
  lg.grad.b2 = d_out.colwise().sum().transpose();
  if (!p.linear()) {
    const Eigen::MatrixXd d_h = ((d_out * p.w2).array() * (1.0 - h.array().square())).matrix();
    lg.grad.w1 = d_h.transpose() * x + l2 * p.w1;
    lg.grad.b1 = d_h.colwise().sum().transpose();
  }
  return lg;
}

Eigen::VectorXd flatten(const MLPParams& p) {
  Eigen::VectorXd theta(p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size());
  Eigen::Index at = 0;
  for (const auto* m : {&p.w1, &p.w2}) {
    theta.segment(at, m->size()) = m->reshaped();
    at += m->size();
  }
  for (const auto* v : {&p.b1, &p.b2}) {
    theta.segment(at, v->size()) = *v;
    at += v->size();
  }
  return theta;
}

void unflatten(MLPParams& p, const Eigen::VectorXd& theta) {
  Eigen::Index at = 0;
  for (auto* m : {&p.w1, &p.w2}) {
    m->reshaped() = theta.segment(at, m->size());
    at += m->size();
  }
  for (auto* v : {&p.b1, &p.b2}) {
    *v = theta.segment(at, v->size());
    at += v->size();
  }
}

Eigen::MatrixXd one_hot(const std::vector<BehaviorLabel>& y) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), kNumClasses);
  for (std::size_t i = 0; i < y.size(); ++i) t(static_cast<Eigen::Index>(i), class_index(y[i])) = 1.0;
  return t;
}

namespace {

// Rewrites p so that it acts on raw x the way it acted on (x - mean) / scale.
void fold_standardization(MLPParams& p, const Eigen::VectorXd& mean, const Eigen::VectorXd& scale) {
  Eigen::MatrixXd& w = p.linear() ? p.w2 : p.w1;
  Eigen::VectorXd& b = p.linear() ? p.b2 : p.b1;
  w = w * scale.cwiseInverse().asDiagonal();
  b -= w * mean;
}

}  // namespace

TrainResult train(const Eigen::MatrixXd& x, const std::vector<BehaviorLabel>& y,
                  const TrainOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ArgumentError("train: row/label count mismatch");
  if (x.rows() == 0 || x.cols() == 0) throw DegenerateDataError("train: empty training set");
  if (!x.allFinite()) throw DegenerateDataError("train: non-finite features");
  if (options.epochs < 0) throw ArgumentError("train: negative epoch count");
  if (!(options.learning_rate > 0.0)) throw ArgumentError("train: learning rate must be positive");
  if (options.l2 < 0.0) throw ArgumentError("train: negative l2");
  if (!options.linear && options.hidden < 1) throw ArgumentError("train: hidden size must be positive");

  std::array<int, kNumClasses> counts{};
  for (const auto l : y) ++counts[static_cast<std::size_t>(class_index(l))];
  if (std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) < 2) {
    throw DegenerateDataError("training set needs at least two distinct classes");
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(x.cols());
  if (options.standardize) {
    mean = x.colwise().mean().transpose();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double sd = std::sqrt((x.col(j).array() - mean[j]).square().mean());
      scale[j] = sd > 1e-12 ? sd : 1.0;
    }
  }
  const Eigen::MatrixXd z = (x.rowwise() - mean.transpose()) * scale.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd targets = one_hot(y);
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(x.rows());
  if (options.inverse_frequency) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      weights[static_cast<Eigen::Index>(i)] = 1.0 / counts[static_cast<std::size_t>(class_index(y[i]))];
    }
  }

  TrainResult res;
  MLPParams p = init_params(static_cast<int>(x.cols()), options.linear ? 0 : options.hidden, options.seed);
  LossGradient cur = loss_and_gradient(p, z, targets, weights, options.l2);
  res.loss_history.push_back(cur.loss);
  double lr = options.learning_rate;
  Eigen::VectorXd theta = flatten(p);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const Eigen::VectorXd g = flatten(cur.grad);
    if (g.norm() < 1e-14) break;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      MLPParams trial = p;
      unflatten(trial, theta - lr * g);
      LossGradient next = loss_and_gradient(trial, z, targets, weights, options.l2);
      if (std::isfinite(next.loss) && next.loss <= cur.loss) {
        p = std::move(trial);
        theta = flatten(p);
        cur = std::move(next);
        accepted = true;
        lr *= 1.05;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) break;
    res.loss_history.push_back(cur.loss);
  }
  fold_standardization(p, mean, scale);
  res.params = std::move(p);
  return res;
}

std::vector<Prediction> predict(const MLPParams& p, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd out = forward(p, x);
  std::vector<Prediction> preds(static_cast<std::size_t>(out.rows()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    auto& pr = preds[static_cast<std::size_t>(i)];
    int best = 0;
    for (int c = 0; c < kNumClasses; ++c) {
      pr.scores[static_cast<std::size_t>(c)] = out(i, c);
      if (out(i, c) > out(i, best)) best = c;
    }
    pr.label = kAllLabels[static_cast<std::size_t>(best)];
  }
  return preds;
}

std::vector<BehaviorLabel> predicted_labels(const std::vector<Prediction>& preds) {
  std::vector<BehaviorLabel> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(p.label);
  return out;
}

namespace {

void check_aligned(const std::vector<BehaviorLabel>& pred, const std::vector<BehaviorLabel>& truth) {
  if (pred.size() != truth.size()) throw ArgumentError("prediction and truth lengths differ");
  if (truth.empty()) throw ArgumentError("no labels to score");
}

}  // namespace

Eigen::Matrix<long, kNumClasses, kNumClasses> confusion_matrix(const std::vector<BehaviorLabel>& pred,
                                                               const std::vector<BehaviorLabel>& truth) {
  if (pred.size() != truth.size()) throw ArgumentError("prediction and truth lengths differ");
  Eigen::Matrix<long, kNumClasses, kNumClasses> m = Eigen::Matrix<long, kNumClasses, kNumClasses>::Zero();
  for (std::size_t i = 0; i < pred.size(); ++i) ++m(class_index(truth[i]), class_index(pred[i]));
  return m;
}

std::array<double, kNumClasses> per_class_recall(const std::vector<BehaviorLabel>& pred,
                                                 const std::vector<BehaviorLabel>& truth) {
  check_aligned(pred, truth);
  std::array<long, kNumClasses> hit{}, total{};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto t = static_cast<std::size_t>(class_index(truth[i]));
    ++total[t];
    if (pred[i] == truth[i]) ++hit[t];
  }
  std::array<double, kNumClasses> r{};
  for (std::size_t c = 0; c < r.size(); ++c) {
    r[c] = total[c] ? static_cast<double>(hit[c]) / static_cast<double>(total[c])
                    : std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

double weighted_accuracy(const std::vector<BehaviorLabel>& pred, const std::vector<BehaviorLabel>& truth) {
  check_aligned(pred, truth);
  const auto recall = per_class_recall(pred, truth);
  std::array<long, kNumClasses> total{};
  for (const auto t : truth) ++total[static_cast<std::size_t>(class_index(t))];
  double acc = 0.0;
  for (std::size_t c = 0; c < total.size(); ++c) {
    if (total[c]) acc += static_cast<double>(total[c]) / static_cast<double>(truth.size()) * recall[c];
  }
  return acc;
}

double superclass_accuracy(const std::vector<BehaviorLabel>& pred, const std::vector<BehaviorLabel>& truth) {
  check_aligned(pred, truth);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += superclass_of(pred[i]) == superclass_of(truth[i]);
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

std::vector<bool> stratified_split(const std::vector<BehaviorLabel>& y, double train_fraction,
                                   std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train fraction must be in (0, 1)");
  std::vector<bool> is_train(y.size(), false);
  std::mt19937_64 rng(seed);
  for (const auto l : kAllLabels) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == l) idx.push_back(i);
    }
    if (idx.empty()) continue;
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    else n_train = 1;
    for (std::size_t j = 0; j < n_train; ++j) is_train[idx[j]] = true;
  }
  return is_train;
}

std::string format_model(const MLPParams& p) {
  std::string out = std::to_string(p.input_dim) + " " + std::to_string(p.hidden) + " " +
                    std::to_string(kNumClasses) + "\n";
  auto put_matrix = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out += ' ';
        out += detail::format_sig17(m(i, j));
      }
      out += '\n';
    }
  };
  if (!p.linear()) {
    put_matrix(p.w1);
    put_matrix(p.b1.transpose());
  }
  put_matrix(p.w2);
  put_matrix(p.b2.transpose());
  return out;
}

void write_model(const MLPParams& p, const std::filesystem::path& path) {
  detail::write_file(path, format_model(p));
}

MLPParams parse_model(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto row = detail::trim(raw);
    if (row.empty()) return;
    std::vector<double> vals;
    for (const auto f : detail::split_ws(row)) {
      const auto v = detail::parse_number<double>(f);
      if (!v || !std::isfinite(*v)) throw ParseError("bad model value '" + std::string(f) + "'", line);
      vals.push_back(*v);
    }
    rows.push_back(std::move(vals));
    lines.push_back(line);
  });
  if (rows.empty() || rows[0].size() != 3) throw ParseError("expected 'k h 6'", rows.empty() ? 0 : lines[0]);
  const int k = static_cast<int>(rows[0][0]);
  const int h = static_cast<int>(rows[0][1]);
  if (k < 1 || h < 0 || rows[0][2] != kNumClasses) throw ParseError("bad model header", lines[0]);

  std::size_t at = 1;
  auto take = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i, ++at) {
      if (at >= rows.size()) throw ParseError("model file truncated", lines.back());
      if (static_cast<Eigen::Index>(rows[at].size()) != c) {
        throw ParseError("expected " + std::to_string(c) + " values", lines[at]);
      }
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[at][static_cast<std::size_t>(j)];
    }
    return m;
  };
  MLPParams p;
  p.input_dim = k;
  p.hidden = h;
  if (h > 0) {
    p.w1 = take(h, k);
    p.b1 = take(1, h).transpose();
  }
  p.w2 = take(kNumClasses, h > 0 ? h : k);
  p.b2 = take(1, kNumClasses).transpose();
  if (at != rows.size()) throw ParseError("trailing data in model file", lines[at]);
  return p;
}

MLPParams load_model(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  try {
    return parse_model(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

}  // namespace graphrqi
