#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgnn/model.hpp"

namespace sgnn {

struct TrainConfig {
  double margin = 0.015;
  double l2_lambda = 1e-5;
  double learning_rate = 1e-4;
  int batch_size = 1000;
  int K = 2;
  int d = 128;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  int patience = 5;  // non-improving dev evaluations tolerated
  uint64_t seed = 1;

  Composition composition = Composition::Concatenation;
  Metric metric = Metric::Euclidean;
  bool use_attention = true;
  // The displayed loss sums hinges over all k candidates; the j = gold term
  // is the constant `margin` and changes no gradient. Excluded by default.
  bool include_gold_hinge = false;
  bool finetune_embeddings = false;
  int max_epochs = 20;

  void validate() const;
};

// Hinge ranking loss plus L2:
//   sum_{j != gold} max(0, margin - s_gold + s_j) + (lambda/2) * params_sq_norm
// (plus a constant `margin` when include_gold_hinge).
double margin_loss(std::span<const double> scores, int gold, const TrainConfig& cfg,
                   double params_sq_norm);

// Gradients of the hinge part of the loss. The L2 term is added separately
// (add_l2), matching how the optimizer applies it once per step.
struct ParamGrads {
  SgnnParams tensors;  // same shapes as the model, gradient values
  std::map<int, std::vector<double>> pred_rows, arg_rows;  // fine-tuning only

  void accumulate(const ParamGrads& other);
};

ParamGrads zero_grads(const SgnnParams& p);

// Exact reverse-mode gradients of the per-instance hinge loss through
// scoring, attention, the K propagation steps and composition; with
// cfg.finetune_embeddings also into the embedding rows the instance touched.
ParamGrads backward(const SgnnModel& m, const ForwardCache& cache, int gold,
                    const TrainConfig& cfg);

void add_l2(ParamGrads& grads, const SgnnParams& p, double lambda);

// Running mean of squared gradients per parameter.
struct OptimizerState {
  std::vector<Mat> acc;           // parallel to param_refs order
  Mat acc_pred, acc_arg;          // allocated when fine-tuning
  uint64_t step = 0;
};

OptimizerState init_optimizer(const SgnnModel& m, const TrainConfig& cfg);

//   acc <- decay*acc + (1-decay)*grad^2
//   param <- param - lr * grad / sqrt(acc + epsilon)
void rmsprop_step(SgnnModel& m, const ParamGrads& grads, OptimizerState& state,
                  const TrainConfig& cfg);

// Central-difference comparison against a given gradient set. Relative error
// uses |a-n| / max(|a|, |n|, 1e-4), so near-zero gradients are compared
// absolutely at 1e-8.
struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  double analytic = 0.0, numeric = 0.0;
};

GradCheckReport fd_compare(SgnnModel& m, const Instance& inst, const Neeg& g,
                           const ParamGrads& analytic, const TrainConfig& cfg, double eps);

// backward + L2 against central differences; reports the worst coordinate.
GradCheckReport grad_check(SgnnModel& m, const Instance& inst, const Neeg& g,
                           const TrainConfig& cfg, double eps = 1e-5);

struct CurvePoint {
  double wall_seconds = 0;
  int epoch = 0;
  double train_loss = 0;
  double dev_accuracy = 0;
};

struct TrainResult {
  SgnnModel best;
  std::vector<CurvePoint> curve;
  std::vector<double> batch_losses;
  double best_dev_accuracy = 0.0;
  int best_epoch = 0;
  bool diverged = false;
  std::string diagnostic;
};

// Minibatch RMSprop over shuffled instances with a dev evaluation per epoch.
// Stops after `patience` non-improving evaluations and returns the best-dev
// checkpoint. A non-finite batch loss aborts with the last finite (best)
// checkpoint and a diagnostic. Deterministic given the config seed.
TrainResult train_sgnn(const std::vector<Instance>& train, const std::vector<Instance>& dev,
                       const Neeg& g, EmbeddingTable pred, EmbeddingTable arg,
                       const TrainConfig& cfg);

// Learning-curve CSV: "wall_seconds,epoch,train_loss,dev_accuracy".
void save_curve(const std::vector<CurvePoint>& curve, const std::string& path);
std::vector<CurvePoint> load_curve(const std::string& path);

}  // namespace sgnn
