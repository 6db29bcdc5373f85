#include "sgnn/harness.hpp"

#include <chrono>
#include <fstream>

#include <json.hpp>

#include "sgnn/common.hpp"

namespace sgnn {

EvalResult evaluate(const Chooser& chooser, const std::vector<Instance>& instances) {
  EvalResult result;
  auto start = std::chrono::steady_clock::now();
  auto& r = result.report;
  result.predictions.reserve(instances.size());
  for (const auto& inst : instances) {
    Prediction p;
    p.gold = inst.gold;
    p.confounded = inst.confounded;
    try {
      p.pred = chooser(inst);
    } catch (const std::exception&) {
      p.pred = -1;
      ++r.failures;
    }
    bool correct = p.pred == p.gold;
    ++r.n;
    if (correct) ++r.correct;
    size_t pos = static_cast<size_t>(inst.gold);
    if (r.pos_n.size() <= pos) {
      r.pos_n.resize(pos + 1, 0);
      r.pos_correct.resize(pos + 1, 0);
    }
    ++r.pos_n[pos];
    if (correct) ++r.pos_correct[pos];
    if (inst.confounded >= 0) {
      r.has_flags = true;
      if (inst.confounded == 1) {
        ++r.conf_n;
        if (correct) ++r.conf_correct;
      } else {
        ++r.unconf_n;
        if (correct) ++r.unconf_correct;
      }
    }
    result.predictions.push_back(p);
  }
  r.accuracy = r.n == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.n);
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void save_report(const EvalReport& r, const std::string& path) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["correct"] = r.correct;
  j["accuracy"] = r.accuracy;
  j["failures"] = r.failures;
  nlohmann::ordered_json pos = nlohmann::ordered_json::array();
  for (size_t i = 0; i < r.pos_n.size(); ++i) {
    nlohmann::ordered_json row;
    row["gold_position"] = i;
    row["n"] = r.pos_n[i];
    row["correct"] = r.pos_correct[i];
    row["accuracy"] =
        r.pos_n[i] == 0 ? 0.0 : static_cast<double>(r.pos_correct[i]) / static_cast<double>(r.pos_n[i]);
    pos.push_back(row);
  }
  j["per_gold_position"] = pos;
  if (r.has_flags) {
    j["confounded"] = {{"n", r.conf_n},
                       {"correct", r.conf_correct},
                       {"accuracy", r.conf_n == 0 ? 0.0
                                                  : static_cast<double>(r.conf_correct) /
                                                        static_cast<double>(r.conf_n)}};
    j["unconfounded"] = {{"n", r.unconf_n},
                         {"correct", r.unconf_correct},
                         {"accuracy", r.unconf_n == 0 ? 0.0
                                                      : static_cast<double>(r.unconf_correct) /
                                                            static_cast<double>(r.unconf_n)}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void save_predictions(const std::vector<Prediction>& preds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "#pred:1\n";
  for (size_t i = 0; i < preds.size(); ++i)
    out << i << ' ' << preds[i].gold << ' ' << preds[i].pred << ' ' << preds[i].confounded
        << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<Prediction> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line) || trim(line) != "#pred:1")
    throw ParseError(1, "missing '#pred:1' header");
  ++line_no;
  std::vector<Prediction> preds;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = tokens(line);
    if (f.size() != 4) throw ParseError(line_no, "bad prediction row");
    Prediction p;
    p.gold = std::stoi(std::string(f[1]));
    p.pred = std::stoi(std::string(f[2]));
    p.confounded = std::stoi(std::string(f[3]));
    preds.push_back(p);
  }
  return preds;
}

EvalReport report_from_predictions(const std::vector<Prediction>& preds) {
  EvalReport r;
  for (const auto& p : preds) {
    bool correct = p.pred == p.gold;
    ++r.n;
    if (correct) ++r.correct;
    size_t pos = static_cast<size_t>(p.gold);
    if (r.pos_n.size() <= pos) {
      r.pos_n.resize(pos + 1, 0);
      r.pos_correct.resize(pos + 1, 0);
    }
    ++r.pos_n[pos];
    if (correct) ++r.pos_correct[pos];
    if (p.confounded >= 0) {
      r.has_flags = true;
      if (p.confounded == 1) {
        ++r.conf_n;
        if (correct) ++r.conf_correct;
      } else {
        ++r.unconf_n;
        if (correct) ++r.unconf_correct;
      }
    }
    if (p.pred < 0) ++r.failures;
  }
  r.accuracy = r.n == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.n);
  return r;
}

std::vector<SweepCell> run_comparative(SweepAxis axis, const std::vector<Instance>& train,
                                       const std::vector<Instance>& dev,
                                       const std::vector<Instance>& test, const Neeg& g,
                                       const EmbeddingTable& pred, const EmbeddingTable& arg,
                                       const TrainConfig& base) {
  std::vector<SweepCell> cells;
  auto run_cell = [&](const std::string& name, TrainConfig cfg, double reference) {
    SweepCell cell;
    cell.setting = name;
    cell.reference_accuracy = reference;
    try {
      TrainResult res = train_sgnn(train, dev, g, pred, arg, cfg);
      cell.dev_accuracy = res.best_dev_accuracy;
      if (!test.empty()) {
        auto eval = evaluate(
            [&](const Instance& inst) { return predict(res.best, inst, g); }, test);
        cell.test_accuracy = eval.report.accuracy;
      }
      if (res.diverged) {
        cell.failed = true;
        cell.error = res.diagnostic;
      }
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  };

  if (axis == SweepAxis::Composition) {
    const Composition comps[3] = {Composition::Average, Composition::Nonlinear,
                                  Composition::Concatenation};
    for (int i = 0; i < 3; ++i) {
      TrainConfig cfg = base;
      cfg.composition = comps[i];
      run_cell(composition_name(comps[i]), cfg, kReferenceComposition[i]);
    }
  } else {
    const Metric metrics[4] = {Metric::Manhattan, Metric::Cosine, Metric::Dot,
                               Metric::Euclidean};
    for (int i = 0; i < 4; ++i) {
      TrainConfig cfg = base;
      cfg.metric = metrics[i];
      run_cell(metric_name(metrics[i]), cfg, kReferenceMetric[i]);
    }
  }
  return cells;
}

void save_sweep(const std::vector<SweepCell>& cells, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "# reference_accuracy: published results for the same setting on the original\n"
         "# licensed news corpus; shown for context, not reproducible from this run.\n";
  out << "setting,dev_accuracy,test_accuracy,reference_accuracy,error\n";
  for (const auto& c : cells)
    out << c.setting << ',' << format_double(c.dev_accuracy) << ','
        << format_double(c.test_accuracy) << ',' << format_double(c.reference_accuracy) << ','
        << (c.failed ? c.error : "") << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sgnn
