#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sgnn/event.hpp"
#include "sgnn/neeg.hpp"
#include "sgnn/train.hpp"

namespace sgnn {

// Multiple-choice evaluation over a fixed instance set.
struct EvalReport {
  size_t n = 0;
  size_t correct = 0;
  double accuracy = 0.0;
  std::vector<size_t> pos_n, pos_correct;  // per gold position
  bool has_flags = false;                  // generator confound flags present
  size_t conf_n = 0, conf_correct = 0;
  size_t unconf_n = 0, unconf_correct = 0;
  size_t failures = 0;      // predictor exceptions, counted as incorrect
  double wall_seconds = 0;  // excluded from the deterministic report file
};

struct Prediction {
  int gold = 0;
  int pred = -1;
  int confounded = -1;
};

using Chooser = std::function<int(const Instance&)>;

struct EvalResult {
  EvalReport report;
  std::vector<Prediction> predictions;
};

// Runs the chooser over every instance. A chooser exception is logged to the
// `failures` counter and scored as incorrect; the sweep never aborts.
EvalResult evaluate(const Chooser& chooser, const std::vector<Instance>& instances);

// Deterministic JSON report (wall time deliberately omitted) and the
// per-instance dump the report can be recomputed from.
void save_report(const EvalReport& r, const std::string& path);
void save_predictions(const std::vector<Prediction>& preds, const std::string& path);
std::vector<Prediction> load_predictions(const std::string& path);
EvalReport report_from_predictions(const std::vector<Prediction>& preds);

// Comparative sweeps over one factor with everything else shared.
// reference_accuracy carries the published large-corpus result for the same
// setting; those numbers come from an unavailable licensed corpus and are
// emitted for context only, never asserted against.
enum class SweepAxis { Composition, Metric };

inline constexpr double kReferenceComposition[3] = {43.42, 51.54, 52.38};  // avg, nonlinear, concat
inline constexpr double kReferenceMetric[4] = {50.11, 50.81, 51.62, 52.38};  // man, cos, dot, euc

struct SweepCell {
  std::string setting;
  double dev_accuracy = 0.0;
  double test_accuracy = 0.0;
  double reference_accuracy = 0.0;
  bool failed = false;
  std::string error;
};

std::vector<SweepCell> run_comparative(SweepAxis axis, const std::vector<Instance>& train,
                                       const std::vector<Instance>& dev,
                                       const std::vector<Instance>& test, const Neeg& g,
                                       const EmbeddingTable& pred, const EmbeddingTable& arg,
                                       const TrainConfig& base);

// CSV: setting,dev_accuracy,test_accuracy,reference_accuracy
void save_sweep(const std::vector<SweepCell>& cells, const std::string& path);

}  // namespace sgnn
