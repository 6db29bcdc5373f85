#include "sgnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sgnn {

void TrainConfig::validate() const {
  if (margin <= 0) throw ConfigError("train: margin must be positive");
  if (learning_rate <= 0) throw ConfigError("train: learning rate must be positive");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (K < 0 || d < 1) throw ConfigError("train: need K >= 0 and d >= 1");
  if (patience < 1 || max_epochs < 1) throw ConfigError("train: patience/max_epochs must be >= 1");
  if (rmsprop_decay <= 0 || rmsprop_decay >= 1)
    throw ConfigError("train: rmsprop decay must lie in (0,1)");
}

double margin_loss(std::span<const double> scores, int gold, const TrainConfig& cfg,
                   double params_sq_norm) {
  if (gold < 0 || gold >= static_cast<int>(scores.size()))
    throw ConfigError("margin_loss: gold out of range");
  double s_gold = scores[static_cast<size_t>(gold)];
  double loss = 0;
  for (int j = 0; j < static_cast<int>(scores.size()); ++j) {
    if (j == gold) {
      if (cfg.include_gold_hinge) loss += std::max(0.0, cfg.margin);
      continue;
    }
    loss += std::max(0.0, cfg.margin - s_gold + scores[static_cast<size_t>(j)]);
  }
  return loss + 0.5 * cfg.l2_lambda * params_sq_norm;
}

ParamGrads zero_grads(const SgnnParams& p) {
  ParamGrads g;
  g.tensors = p;
  for (auto& [name, m] : param_refs(g.tensors)) m->fill(0.0);
  return g;
}

void ParamGrads::accumulate(const ParamGrads& other) {
  auto dst = param_refs(tensors);
  auto src = param_refs(other.tensors);
  for (size_t i = 0; i < dst.size(); ++i) add_inplace(*dst[i].second, *src[i].second);
  for (const auto& [row, vec] : other.pred_rows) {
    auto& acc = pred_rows[row];
    if (acc.empty()) acc.assign(vec.size(), 0.0);
    for (size_t i = 0; i < vec.size(); ++i) acc[i] += vec[i];
  }
  for (const auto& [row, vec] : other.arg_rows) {
    auto& acc = arg_rows[row];
    if (acc.empty()) acc.assign(vec.size(), 0.0);
    for (size_t i = 0; i < vec.size(); ++i) acc[i] += vec[i];
  }
}

void add_l2(ParamGrads& grads, const SgnnParams& p, double lambda) {
  auto dst = param_refs(grads.tensors);
  auto src = param_refs(p);
  for (size_t i = 0; i < dst.size(); ++i) axpy_inplace(*dst[i].second, lambda, *src[i].second);
}

namespace {

// Gradient of g(x, y) w.r.t. both vectors, scaled by dg and accumulated.
void metric_backward(Metric m, std::span<const double> x, std::span<const double> y, double dg,
                     std::span<double> gx, std::span<double> gy) {
  size_t d = x.size();
  switch (m) {
    case Metric::Dot:
      for (size_t i = 0; i < d; ++i) {
        gx[i] += dg * y[i];
        gy[i] += dg * x[i];
      }
      return;
    case Metric::Cosine: {
      double nx = norm(x), ny = norm(y);
      if (nx == 0.0 || ny == 0.0) return;  // score pinned to 0
      double c = dot(x, y) / (nx * ny);
      for (size_t i = 0; i < d; ++i) {
        gx[i] += dg * (y[i] / (nx * ny) - c * x[i] / (nx * nx));
        gy[i] += dg * (x[i] / (nx * ny) - c * y[i] / (ny * ny));
      }
      return;
    }
    case Metric::Manhattan:
      for (size_t i = 0; i < d; ++i) {
        double s = x[i] > y[i] ? 1.0 : (x[i] < y[i] ? -1.0 : 0.0);
        gx[i] -= dg * s;
        gy[i] += dg * s;
      }
      return;
    case Metric::Euclidean: {
      double e = 0;
      for (size_t i = 0; i < d; ++i) e += (x[i] - y[i]) * (x[i] - y[i]);
      e = std::sqrt(e);
      if (e == 0.0) return;
      for (size_t i = 0; i < d; ++i) {
        gx[i] -= dg * (x[i] - y[i]) / e;
        gy[i] += dg * (x[i] - y[i]) / e;
      }
      return;
    }
  }
}

}  // namespace

ParamGrads backward(const SgnnModel& m, const ForwardCache& cache, int gold,
                    const TrainConfig& cfg) {
  const SgnnParams& p = m.params;
  if (cache.h.empty()) throw ConfigError("backward: missing forward cache");
  const int n = cache.n, k = cache.k, N = n + k, H = p.H;
  ParamGrads grads = zero_grads(p);

  // d loss / d scores from the hinge terms
  std::vector<double> ds(static_cast<size_t>(k), 0.0);
  double s_gold = cache.scores[static_cast<size_t>(gold)];
  for (int j = 0; j < k; ++j) {
    if (j == gold) continue;
    if (cfg.margin - s_gold + cache.scores[static_cast<size_t>(j)] > 0) {
      ds[static_cast<size_t>(j)] += 1.0;
      ds[static_cast<size_t>(gold)] -= 1.0;
    }
  }

  // Scoring layer: dG over pair similarities, dH over final hidden states.
  const Mat& hK = cache.hK();
  Mat dG(n, k);
  Mat dH(N, H);
  if (p.use_attention) {
    Mat dalpha(n, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) {
        dG(i, j) = ds[static_cast<size_t>(j)] * cache.alpha(i, j);
        dalpha(i, j) = ds[static_cast<size_t>(j)] * cache.gvals(i, j);
      }
    // softmax over the n context events, per candidate column
    Mat du(n, k);
    for (int j = 0; j < k; ++j) {
      double inner = 0;
      for (int i = 0; i < n; ++i) inner += cache.alpha(i, j) * dalpha(i, j);
      for (int i = 0; i < n; ++i) du(i, j) = cache.alpha(i, j) * (dalpha(i, j) - inner);
    }
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) {
        double dpre = du(i, j) * (1.0 - cache.u(i, j) * cache.u(i, j));
        if (dpre == 0.0) continue;
        auto hi = hK.row(i);
        auto hc = hK.row(n + j);
        for (int t = 0; t < H; ++t) {
          grads.tensors.att_wh(0, t) += dpre * hi[static_cast<size_t>(t)];
          grads.tensors.att_wc(0, t) += dpre * hc[static_cast<size_t>(t)];
          dH(i, t) += dpre * p.att_wh(0, t);
          dH(n + j, t) += dpre * p.att_wc(0, t);
        }
        grads.tensors.att_bu(0, 0) += dpre;
      }
  } else {
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) dG(i, j) = ds[static_cast<size_t>(j)] / n;
  }
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i)
      if (dG(i, j) != 0.0)
        metric_backward(p.metric, hK.row(i), hK.row(n + j), dG(i, j), dH.row(i), dH.row(n + j));

  // Backpropagation through the K propagation steps.
  Mat G = std::move(dH);
  for (int t = p.K - 1; t >= 0; --t) {
    const Mat& prev = cache.h[static_cast<size_t>(t)];
    const Mat& at = cache.a[static_cast<size_t>(t)];
    const Mat& zt = cache.z[static_cast<size_t>(t)];
    const Mat& rt = cache.r[static_cast<size_t>(t)];
    const Mat& ct = cache.c[static_cast<size_t>(t)];

    Mat dz(N, H), dc(N, H), Gprev(N, H);
    for (size_t i = 0; i < G.a.size(); ++i) {
      dz.a[i] = G.a[i] * (ct.a[i] - prev.a[i]);
      dc.a[i] = G.a[i] * zt.a[i];
      Gprev.a[i] = G.a[i] * (1.0 - zt.a[i]);
    }
    Mat dq(N, H);
    for (size_t i = 0; i < dq.a.size(); ++i) dq.a[i] = dc.a[i] * (1.0 - ct.a[i] * ct.a[i]);
    add_inplace(grads.tensors.W, matmul_tn(dq, at));
    Mat rh = hadamard(rt, prev);
    add_inplace(grads.tensors.U, matmul_tn(dq, rh));
    Mat da = matmul(dq, p.W);
    Mat drh = matmul(dq, p.U);
    Mat dr(N, H);
    for (size_t i = 0; i < dr.a.size(); ++i) {
      dr.a[i] = drh.a[i] * prev.a[i];
      Gprev.a[i] += drh.a[i] * rt.a[i];
    }
    Mat dpz(N, H), dpr(N, H);
    for (size_t i = 0; i < dpz.a.size(); ++i) {
      dpz.a[i] = dz.a[i] * zt.a[i] * (1.0 - zt.a[i]);
      dpr.a[i] = dr.a[i] * rt.a[i] * (1.0 - rt.a[i]);
    }
    add_inplace(grads.tensors.Wz, matmul_tn(dpz, at));
    add_inplace(grads.tensors.Uz, matmul_tn(dpz, prev));
    add_inplace(da, matmul(dpz, p.Wz));
    add_inplace(Gprev, matmul(dpz, p.Uz));
    add_inplace(grads.tensors.Wr, matmul_tn(dpr, at));
    add_inplace(grads.tensors.Ur, matmul_tn(dpr, prev));
    add_inplace(da, matmul(dpr, p.Wr));
    add_inplace(Gprev, matmul(dpr, p.Ur));
    add_inplace(grads.tensors.b_a, col_sums(da));
    add_inplace(Gprev, matmul(cache.A, da));  // a = A^T h + b  =>  dh += A da
    G = std::move(Gprev);
  }

  // Composition backward; G now holds d loss / d h0.
  bool need_inputs = cfg.finetune_embeddings;
  Mat dvin[4];
  if (p.composition == Composition::Nonlinear) {
    const Mat& h0 = cache.h[0];
    Mat dM(N, p.d);
    for (size_t i = 0; i < dM.a.size(); ++i) dM.a[i] = G.a[i] * (1.0 - h0.a[i] * h0.a[i]);
    add_inplace(grads.tensors.comp_Wp, matmul_tn(dM, cache.vin[0]));
    add_inplace(grads.tensors.comp_W0, matmul_tn(dM, cache.vin[1]));
    add_inplace(grads.tensors.comp_W1, matmul_tn(dM, cache.vin[2]));
    add_inplace(grads.tensors.comp_W2, matmul_tn(dM, cache.vin[3]));
    add_inplace(grads.tensors.comp_b, col_sums(dM));
    if (need_inputs) {
      dvin[0] = matmul(dM, p.comp_Wp);
      dvin[1] = matmul(dM, p.comp_W0);
      dvin[2] = matmul(dM, p.comp_W1);
      dvin[3] = matmul(dM, p.comp_W2);
    }
  } else if (need_inputs && p.composition == Composition::Average) {
    for (int t = 0; t < 4; ++t) {
      dvin[t] = G;
      for (auto& v : dvin[t].a) v *= 0.25;
    }
  } else if (need_inputs && p.composition == Composition::Concatenation) {
    for (int t = 0; t < 4; ++t) {
      dvin[t] = Mat(N, p.d);
      for (int s = 0; s < N; ++s)
        for (int i = 0; i < p.d; ++i) dvin[t](s, i) = G(s, t * p.d + i);
    }
  }
  if (need_inputs) {
    for (int s = 0; s < N; ++s) {
      const auto& rows = cache.in_rows[static_cast<size_t>(s)];
      for (int t = 0; t < 4; ++t) {
        int row = rows[static_cast<size_t>(t)];
        if (row == 0) continue;  // reserved zero row never trains
        auto& target = t == 0 ? grads.pred_rows[row] : grads.arg_rows[row];
        if (target.empty()) target.assign(static_cast<size_t>(p.d), 0.0);
        for (int i = 0; i < p.d; ++i) target[static_cast<size_t>(i)] += dvin[t](s, i);
      }
    }
  }
  return grads;
}

OptimizerState init_optimizer(const SgnnModel& m, const TrainConfig& cfg) {
  OptimizerState st;
  for (auto& [name, mat] : param_refs(m.params)) st.acc.emplace_back(mat->rows, mat->cols);
  if (cfg.finetune_embeddings) {
    st.acc_pred = Mat(m.pred.vectors.rows, m.pred.vectors.cols);
    st.acc_arg = Mat(m.arg.vectors.rows, m.arg.vectors.cols);
  }
  return st;
}

void rmsprop_step(SgnnModel& m, const ParamGrads& grads, OptimizerState& state,
                  const TrainConfig& cfg) {
  auto params = param_refs(m.params);
  auto gs = param_refs(grads.tensors);
  if (state.acc.size() != params.size()) throw ConfigError("rmsprop_step: state shape mismatch");
  const double decay = cfg.rmsprop_decay, eps = cfg.rmsprop_epsilon, lr = cfg.learning_rate;
  for (size_t t = 0; t < params.size(); ++t) {
    Mat& theta = *params[t].second;
    const Mat& g = *gs[t].second;
    Mat& acc = state.acc[t];
    for (size_t i = 0; i < theta.a.size(); ++i) {
      acc.a[i] = decay * acc.a[i] + (1.0 - decay) * g.a[i] * g.a[i];
      theta.a[i] -= lr * g.a[i] / std::sqrt(acc.a[i] + eps);
    }
  }
  auto update_rows = [&](Mat& table, Mat& acc, const std::map<int, std::vector<double>>& rows) {
    for (const auto& [row, g] : rows)
      for (int i = 0; i < table.cols; ++i) {
        double& ac = acc(row, i);
        ac = decay * ac + (1.0 - decay) * g[static_cast<size_t>(i)] * g[static_cast<size_t>(i)];
        table(row, i) -= lr * g[static_cast<size_t>(i)] / std::sqrt(ac + eps);
      }
  };
  if (cfg.finetune_embeddings) {
    update_rows(m.pred.vectors, state.acc_pred, grads.pred_rows);
    update_rows(m.arg.vectors, state.acc_arg, grads.arg_rows);
  }
  ++state.step;
}

namespace {

double instance_loss(SgnnModel& m, const Instance& inst, const Neeg& g, const TrainConfig& cfg) {
  ForwardCache cache = forward_instance(m, inst, g);
  return margin_loss(cache.scores, inst.gold, cfg, param_sq_norm(m.params));
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-4});
}

}  // namespace

GradCheckReport fd_compare(SgnnModel& m, const Instance& inst, const Neeg& g,
                           const ParamGrads& analytic, const TrainConfig& cfg, double eps) {
  GradCheckReport report;
  auto params = param_refs(m.params);
  auto gs = param_refs(analytic.tensors);
  auto consider = [&](const std::string& name, int idx, double grad, double& theta) {
    double keep = theta;
    theta = keep + eps;
    double up = instance_loss(m, inst, g, cfg);
    theta = keep - eps;
    double down = instance_loss(m, inst, g, cfg);
    theta = keep;
    double numeric = (up - down) / (2.0 * eps);
    double err = rel_err(grad, numeric);
    if (err > report.max_rel_err) {
      report.max_rel_err = err;
      report.worst_param = name;
      report.worst_index = idx;
      report.analytic = grad;
      report.numeric = numeric;
    }
  };
  for (size_t t = 0; t < params.size(); ++t) {
    Mat& theta = *params[t].second;
    const Mat& grad = *gs[t].second;
    for (size_t i = 0; i < theta.a.size(); ++i)
      consider(params[t].first, static_cast<int>(i), grad.a[i], theta.a[i]);
  }
  if (cfg.finetune_embeddings) {
    for (const auto& [row, vec] : analytic.pred_rows)
      for (int i = 0; i < m.pred.vectors.cols; ++i)
        consider("pred.row" + std::to_string(row), i, vec[static_cast<size_t>(i)],
                 m.pred.vectors(row, i));
    for (const auto& [row, vec] : analytic.arg_rows)
      for (int i = 0; i < m.arg.vectors.cols; ++i)
        consider("arg.row" + std::to_string(row), i, vec[static_cast<size_t>(i)],
                 m.arg.vectors(row, i));
  }
  return report;
}

GradCheckReport grad_check(SgnnModel& m, const Instance& inst, const Neeg& g,
                           const TrainConfig& cfg, double eps) {
  ForwardCache cache = forward_instance(m, inst, g);
  ParamGrads grads = backward(m, cache, inst.gold, cfg);
  add_l2(grads, m.params, cfg.l2_lambda);
  return fd_compare(m, inst, g, grads, cfg, eps);
}

TrainResult train_sgnn(const std::vector<Instance>& train, const std::vector<Instance>& dev,
                       const Neeg& g, EmbeddingTable pred, EmbeddingTable arg,
                       const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty() || dev.empty()) throw ConfigError("train_sgnn: empty dataset");
  if (pred.dim() != cfg.d || arg.dim() != cfg.d)
    throw ConfigError("train_sgnn: embedding dimension != d");

  SgnnModel model;
  Rng init_rng(splitmix64(cfg.seed ^ 0x5347494eULL));
  model.params = init_params(cfg.composition, cfg.metric, cfg.use_attention, cfg.K, cfg.d,
                             init_rng);
  model.pred = std::move(pred);
  model.arg = std::move(arg);
  model.meta.init_seed = cfg.seed;
  model.meta.learning_rate = cfg.learning_rate;
  model.meta.rmsprop_decay = cfg.rmsprop_decay;
  model.meta.rmsprop_epsilon = cfg.rmsprop_epsilon;
  model.meta.margin = cfg.margin;
  model.meta.l2_lambda = cfg.l2_lambda;
  model.meta.include_gold_hinge = cfg.include_gold_hinge;
  model.meta.finetune_embeddings = cfg.finetune_embeddings;

  OptimizerState opt = init_optimizer(model, cfg);
  TrainResult result;
  result.best = model;

  auto dev_accuracy = [&](const SgnnModel& mm) {
    size_t correct = 0;
    for (const auto& inst : dev)
      if (predict(mm, inst, g) == inst.gold) ++correct;
    return static_cast<double>(correct) / static_cast<double>(dev.size());
  };

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(splitmix64(cfg.seed ^ 0x53485546ULL));

  auto start = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  double best_acc = -1.0;
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.index(i)]);

    double epoch_loss = 0;
    size_t batches = 0;
    for (size_t b = 0; b < order.size(); b += static_cast<size_t>(cfg.batch_size)) {
      size_t e = std::min(order.size(), b + static_cast<size_t>(cfg.batch_size));
      ParamGrads batch_grads = zero_grads(model.params);
      double hinge_sum = 0;
      for (size_t i = b; i < e; ++i) {
        const Instance& inst = train[order[i]];
        ForwardCache cache = forward_instance(model, inst, g);
        TrainConfig hinge_only = cfg;
        hinge_only.l2_lambda = 0;
        hinge_sum += margin_loss(cache.scores, inst.gold, hinge_only, 0.0);
        batch_grads.accumulate(backward(model, cache, inst.gold, cfg));
      }
      double batch_loss = hinge_sum + 0.5 * cfg.l2_lambda * param_sq_norm(model.params);
      if (!std::isfinite(batch_loss)) {
        result.diverged = true;
        result.diagnostic = "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batches + 1) + "; returning last finite checkpoint";
        return result;
      }
      result.batch_losses.push_back(batch_loss);
      epoch_loss += batch_loss;
      ++batches;
      add_l2(batch_grads, model.params, cfg.l2_lambda);
      rmsprop_step(model, batch_grads, opt, cfg);
    }

    double acc = dev_accuracy(model);
    result.curve.push_back({wall(), epoch, epoch_loss / static_cast<double>(batches), acc});
    if (acc > best_acc) {
      best_acc = acc;
      since_best = 0;
      result.best = model;
      result.best.meta.epoch = epoch;
      result.best.meta.dev_accuracy = acc;
      result.best_dev_accuracy = acc;
      result.best_epoch = epoch;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

void save_curve(const std::vector<CurvePoint>& curve, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "wall_seconds,epoch,train_loss,dev_accuracy\n";
  for (const auto& p : curve)
    out << format_double(p.wall_seconds) << ',' << p.epoch << ','
        << format_double(p.train_loss) << ',' << format_double(p.dev_accuracy) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<CurvePoint> load_curve(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "wall_seconds,epoch,train_loss,dev_accuracy")
    throw ParseError(1, "bad curve header");
  std::vector<CurvePoint> curve;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split(trim(line), ',');
    if (f.size() != 4) throw ParseError(line_no, "bad curve row");
    CurvePoint p;
    p.wall_seconds = std::stod(std::string(f[0]));
    p.epoch = std::stoi(std::string(f[1]));
    p.train_loss = std::stod(std::string(f[2]));
    p.dev_accuracy = std::stod(std::string(f[3]));
    curve.push_back(p);
  }
  return curve;
}

}  // namespace sgnn
