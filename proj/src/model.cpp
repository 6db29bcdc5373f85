#include "sgnn/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace sgnn {

const char* composition_name(Composition c) {
  switch (c) {
    case Composition::Average: return "average";
    case Composition::Nonlinear: return "nonlinear";
    case Composition::Concatenation: return "concatenation";
  }
  return "?";
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Manhattan: return "manhattan";
    case Metric::Cosine: return "cosine";
    case Metric::Dot: return "dot";
    case Metric::Euclidean: return "euclidean";
  }
  return "?";
}

Composition composition_from(std::string_view s) {
  if (s == "average") return Composition::Average;
  if (s == "nonlinear") return Composition::Nonlinear;
  if (s == "concatenation" || s == "concat") return Composition::Concatenation;
  throw ConfigError("unknown composition '" + std::string(s) + "'");
}

Metric metric_from(std::string_view s) {
  if (s == "manhattan") return Metric::Manhattan;
  if (s == "cosine") return Metric::Cosine;
  if (s == "dot") return Metric::Dot;
  if (s == "euclidean") return Metric::Euclidean;
  throw ConfigError("unknown metric '" + std::string(s) + "'");
}

int hidden_size(Composition c, int d) { return c == Composition::Concatenation ? 4 * d : d; }

namespace {

Mat glorot(int rows, int cols, Rng& rng) {
  Mat m(rows, cols);
  double bound = std::sqrt(6.0 / (rows + cols));
  for (auto& v : m.a) v = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

SgnnParams init_params(Composition comp, Metric metric, bool use_attention, int K, int d,
                       Rng& rng) {
  if (d < 1) throw ConfigError("init_params: d must be positive");
  if (K < 0) throw ConfigError("init_params: K must be >= 0");
  SgnnParams p;
  p.composition = comp;
  p.metric = metric;
  p.use_attention = use_attention;
  p.K = K;
  p.d = d;
  p.H = hidden_size(comp, d);
  if (comp == Composition::Nonlinear) {
    p.comp_Wp = glorot(d, d, rng);
    p.comp_W0 = glorot(d, d, rng);
    p.comp_W1 = glorot(d, d, rng);
    p.comp_W2 = glorot(d, d, rng);
    p.comp_b = Mat(1, d);
  }
  p.Wz = glorot(p.H, p.H, rng);
  p.Uz = glorot(p.H, p.H, rng);
  p.Wr = glorot(p.H, p.H, rng);
  p.Ur = glorot(p.H, p.H, rng);
  p.W = glorot(p.H, p.H, rng);
  p.U = glorot(p.H, p.H, rng);
  p.b_a = Mat(1, p.H);
  if (use_attention) {
    p.att_wh = glorot(1, p.H, rng);
    p.att_wc = glorot(1, p.H, rng);
    p.att_bu = Mat(1, 1);
  }
  return p;
}

std::vector<std::pair<std::string, Mat*>> param_refs(SgnnParams& p) {
  std::vector<std::pair<std::string, Mat*>> refs;
  if (p.composition == Composition::Nonlinear) {
    refs.emplace_back("comp.Wp", &p.comp_Wp);
    refs.emplace_back("comp.W0", &p.comp_W0);
    refs.emplace_back("comp.W1", &p.comp_W1);
    refs.emplace_back("comp.W2", &p.comp_W2);
    refs.emplace_back("comp.b", &p.comp_b);
  }
  refs.emplace_back("ggnn.Wz", &p.Wz);
  refs.emplace_back("ggnn.Uz", &p.Uz);
  refs.emplace_back("ggnn.Wr", &p.Wr);
  refs.emplace_back("ggnn.Ur", &p.Ur);
  refs.emplace_back("ggnn.W", &p.W);
  refs.emplace_back("ggnn.U", &p.U);
  refs.emplace_back("ggnn.b", &p.b_a);
  if (p.use_attention) {
    refs.emplace_back("att.wh", &p.att_wh);
    refs.emplace_back("att.wc", &p.att_wc);
    refs.emplace_back("att.bu", &p.att_bu);
  }
  return refs;
}

std::vector<std::pair<std::string, const Mat*>> param_refs(const SgnnParams& p) {
  std::vector<std::pair<std::string, const Mat*>> out;
  for (auto& [name, m] : param_refs(const_cast<SgnnParams&>(p))) out.emplace_back(name, m);
  return out;
}

double param_sq_norm(const SgnnParams& p) {
  double s = 0;
  for (auto& [name, m] : param_refs(p)) s += m->sq_norm();
  return s;
}

std::vector<double> compose_event(const SgnnParams& p,
                                  const std::array<std::span<const double>, 4>& v) {
  const int d = static_cast<int>(v[0].size());
  for (const auto& vi : v)
    if (static_cast<int>(vi.size()) != d) throw ConfigError("compose_event: dimension mismatch");
  switch (p.composition) {
    case Composition::Average: {
      std::vector<double> out(static_cast<size_t>(d));
      for (int i = 0; i < d; ++i)
        out[static_cast<size_t>(i)] = (v[0][i] + v[1][i] + v[2][i] + v[3][i]) / 4.0;
      return out;
    }
    case Composition::Nonlinear: {
      if (p.comp_Wp.rows != d || p.comp_Wp.cols != d)
        throw ConfigError("compose_event: nonlinear parameters do not match d");
      std::vector<double> out(static_cast<size_t>(d));
      const Mat* Ws[4] = {&p.comp_Wp, &p.comp_W0, &p.comp_W1, &p.comp_W2};
      for (int i = 0; i < d; ++i) {
        double s = p.comp_b(0, i);
        for (int t = 0; t < 4; ++t) {
          const Mat& Wm = *Ws[t];
          for (int j = 0; j < d; ++j) s += Wm(i, j) * v[static_cast<size_t>(t)][j];
        }
        out[static_cast<size_t>(i)] = std::tanh(s);
      }
      return out;
    }
    case Composition::Concatenation: {
      std::vector<double> out;
      out.reserve(static_cast<size_t>(4) * d);
      for (const auto& vi : v) out.insert(out.end(), vi.begin(), vi.end());
      return out;
    }
  }
  throw ConfigError("compose_event: bad composition");
}

double similarity(Metric m, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("similarity: dimension mismatch");
  switch (m) {
    case Metric::Dot:
      return dot(a, b);
    case Metric::Cosine: {
      double na = norm(a), nb = norm(b);
      if (na == 0.0 || nb == 0.0) return 0.0;
      return dot(a, b) / (na * nb);
    }
    case Metric::Manhattan: {
      double s = 0;
      for (size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
      return -s;
    }
    case Metric::Euclidean: {
      double s = 0;
      for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      return -std::sqrt(s);
    }
  }
  throw ConfigError("similarity: bad metric");
}

void ggnn_forward(const Mat& h0, const Mat& A, const SgnnParams& p, ForwardCache& cache) {
  if (h0.cols != p.H) throw ConfigError("ggnn_forward: h0 width != H");
  if (A.rows != A.cols || A.rows != h0.rows)
    throw ConfigError("ggnn_forward: adjacency shape mismatch");
  if (p.Wz.rows != p.H || p.Wz.cols != p.H) throw ConfigError("ggnn_forward: bad parameter shapes");
  cache.A = A;
  cache.h.clear();
  cache.a.clear();
  cache.z.clear();
  cache.r.clear();
  cache.c.clear();
  cache.h.push_back(h0);
  for (int t = 0; t < p.K; ++t) {
    const Mat& prev = cache.h.back();
    Mat at = matmul_tn(A, prev);  // a_i = sum_j A[j,i] h_j + b
    add_row_broadcast(at, p.b_a);
    Mat zt = matmul_nt(at, p.Wz);
    add_inplace(zt, matmul_nt(prev, p.Uz));
    zt = map(zt, sigmoid);
    Mat rt = matmul_nt(at, p.Wr);
    add_inplace(rt, matmul_nt(prev, p.Ur));
    rt = map(rt, sigmoid);
    Mat ct = matmul_nt(at, p.W);
    add_inplace(ct, matmul_nt(hadamard(rt, prev), p.U));
    ct = map(ct, [](double x) { return std::tanh(x); });
    Mat ht(prev.rows, prev.cols);
    for (size_t i = 0; i < ht.a.size(); ++i)
      ht.a[i] = (1.0 - zt.a[i]) * prev.a[i] + zt.a[i] * ct.a[i];
    cache.a.push_back(std::move(at));
    cache.z.push_back(std::move(zt));
    cache.r.push_back(std::move(rt));
    cache.c.push_back(std::move(ct));
    cache.h.push_back(std::move(ht));
  }
}

Mat attention_weights(const Mat& h_ctx, const Mat& h_cand, const SgnnParams& p, Mat* u_out) {
  if (!p.use_attention) throw ConfigError("attention_weights: attention disabled");
  const int n = h_ctx.rows, k = h_cand.rows;
  Mat u(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      u(i, j) = std::tanh(dot(p.att_wh.row(0), h_ctx.row(i)) +
                          dot(p.att_wc.row(0), h_cand.row(j)) + p.att_bu(0, 0));
  Mat alpha(n, k);
  for (int j = 0; j < k; ++j) {
    double mx = u(0, j);
    for (int i = 1; i < n; ++i) mx = std::max(mx, u(i, j));
    double total = 0;
    for (int i = 0; i < n; ++i) total += std::exp(u(i, j) - mx);
    for (int i = 0; i < n; ++i) alpha(i, j) = std::exp(u(i, j) - mx) / total;
  }
  if (u_out) *u_out = std::move(u);
  return alpha;
}

void score_candidates(const SgnnParams& p, ForwardCache& cache) {
  const Mat& hK = cache.hK();
  const int n = cache.n, k = cache.k;
  cache.gvals = Mat(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      cache.gvals(i, j) = similarity(p.metric, hK.row(i), hK.row(n + j));
  if (p.use_attention) {
    Mat h_ctx(n, p.H), h_cand(k, p.H);
    for (int i = 0; i < n; ++i) std::copy(hK.row(i).begin(), hK.row(i).end(), h_ctx.row(i).begin());
    for (int j = 0; j < k; ++j)
      std::copy(hK.row(n + j).begin(), hK.row(n + j).end(), h_cand.row(j).begin());
    cache.alpha = attention_weights(h_ctx, h_cand, p, &cache.u);
  }
  cache.scores.assign(static_cast<size_t>(k), 0.0);
  for (int j = 0; j < k; ++j) {
    double s = 0;
    for (int i = 0; i < n; ++i)
      s += (p.use_attention ? cache.alpha(i, j) : 1.0 / n) * cache.gvals(i, j);
    cache.scores[static_cast<size_t>(j)] = s;
  }
}

ForwardCache forward_instance(const SgnnModel& m, const Instance& inst, const Neeg& g) {
  const SgnnParams& p = m.params;
  if (m.pred.dim() != p.d || m.arg.dim() != p.d)
    throw ConfigError("forward_instance: embedding dimension != d");
  const int n = static_cast<int>(inst.context.size());
  const int k = static_cast<int>(inst.candidates.size());
  const int N = n + k;

  ForwardCache cache;
  cache.n = n;
  cache.k = k;
  for (auto& vin : cache.vin) vin = Mat(N, p.d);
  cache.in_rows.resize(static_cast<size_t>(N));
  Mat h0(N, p.H);
  for (int s = 0; s < N; ++s) {
    const Event& e = s < n ? inst.context[static_cast<size_t>(s)]
                           : inst.candidates[static_cast<size_t>(s - n)];
    EventVectors ev = event_input_vectors(m.pred, m.arg, e);
    cache.in_rows[static_cast<size_t>(s)] = {m.pred.row_of(e.predicate_gr()),
                                             m.arg.row_of(e.args[0]), m.arg.row_of(e.args[1]),
                                             m.arg.row_of(e.args[2])};
    for (int t = 0; t < 4; ++t)
      std::copy(ev.v[static_cast<size_t>(t)].begin(), ev.v[static_cast<size_t>(t)].end(),
                cache.vin[t].row(s).begin());
    auto composed = compose_event(p, ev.v);
    std::copy(composed.begin(), composed.end(), h0.row(s).begin());
  }
  cache.h0 = h0;
  ggnn_forward(h0, subgraph_adjacency(g, inst).a, p, cache);
  score_candidates(p, cache);
  return cache;
}

int argmax_score(std::span<const double> scores) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(scores.size()); ++j)
    if (scores[static_cast<size_t>(j)] > scores[static_cast<size_t>(best)]) best = j;
  return best;
}

int predict(const SgnnModel& m, const Instance& inst, const Neeg& g) {
  return argmax_score(forward_instance(m, inst, g).scores);
}

namespace {

constexpr char kCkptMagic[8] = {'S', 'G', 'N', 'N', 'C', 'K', 'P', '1'};

void write_mat(std::ostream& out, const std::string& name, const Mat& m) {
  uint32_t len = static_cast<uint32_t>(name.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(name.data(), len);
  uint32_t rows = static_cast<uint32_t>(m.rows), cols = static_cast<uint32_t>(m.cols);
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  out.write(reinterpret_cast<const char*>(m.a.data()),
            static_cast<std::streamsize>(m.a.size() * sizeof(double)));
}

std::pair<std::string, Mat> read_mat(std::istream& in) {
  uint32_t len;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string name(len, '\0');
  in.read(name.data(), len);
  uint32_t rows, cols;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  Mat m(static_cast<int>(rows), static_cast<int>(cols));
  in.read(reinterpret_cast<char*>(m.a.data()),
          static_cast<std::streamsize>(m.a.size() * sizeof(double)));
  return {std::move(name), std::move(m)};
}

}  // namespace

void save_model(const SgnnModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kCkptMagic, sizeof(kCkptMagic));
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["composition"] = composition_name(m.params.composition);
  j["metric"] = metric_name(m.params.metric);
  j["use_attention"] = m.params.use_attention;
  j["K"] = m.params.K;
  j["d"] = m.params.d;
  j["H"] = m.params.H;
  j["init_seed"] = m.meta.init_seed;
  j["init_scheme"] = m.meta.init_scheme;
  j["optimizer"] = m.meta.optimizer;
  j["learning_rate"] = m.meta.learning_rate;
  j["rmsprop_decay"] = m.meta.rmsprop_decay;
  j["rmsprop_epsilon"] = m.meta.rmsprop_epsilon;
  j["margin"] = m.meta.margin;
  j["l2_lambda"] = m.meta.l2_lambda;
  j["include_gold_hinge"] = m.meta.include_gold_hinge;
  j["finetune_embeddings"] = m.meta.finetune_embeddings;
  j["train_mode"] = m.meta.train_mode;
  j["epoch"] = m.meta.epoch;
  j["dev_accuracy"] = m.meta.dev_accuracy;
  std::string meta = j.dump();
  uint64_t meta_len = meta.size();
  out.write(reinterpret_cast<const char*>(&meta_len), sizeof(meta_len));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  auto refs = param_refs(m.params);
  uint32_t count = static_cast<uint32_t>(refs.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (auto& [name, mat] : refs) write_mat(out, name, *mat);
  write_embeddings_binary(m.pred, out);
  write_embeddings_binary(m.arg, out);
  if (!out) throw IoError("write failed: " + path);
}

SgnnModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCkptMagic, sizeof(kCkptMagic)) != 0)
    throw IoError(path + ": not a checkpoint file");
  uint64_t meta_len;
  in.read(reinterpret_cast<char*>(&meta_len), sizeof(meta_len));
  std::string meta(meta_len, '\0');
  in.read(meta.data(), static_cast<std::streamsize>(meta_len));
  nlohmann::json j = nlohmann::json::parse(meta);

  SgnnModel m;
  m.params.composition = composition_from(j["composition"].get<std::string>());
  m.params.metric = metric_from(j["metric"].get<std::string>());
  m.params.use_attention = j["use_attention"].get<bool>();
  m.params.K = j["K"].get<int>();
  m.params.d = j["d"].get<int>();
  m.params.H = j["H"].get<int>();
  m.meta.init_seed = j["init_seed"].get<uint64_t>();
  m.meta.init_scheme = j["init_scheme"].get<std::string>();
  m.meta.optimizer = j["optimizer"].get<std::string>();
  m.meta.learning_rate = j["learning_rate"].get<double>();
  m.meta.rmsprop_decay = j["rmsprop_decay"].get<double>();
  m.meta.rmsprop_epsilon = j["rmsprop_epsilon"].get<double>();
  m.meta.margin = j["margin"].get<double>();
  m.meta.l2_lambda = j["l2_lambda"].get<double>();
  m.meta.include_gold_hinge = j["include_gold_hinge"].get<bool>();
  m.meta.finetune_embeddings = j["finetune_embeddings"].get<bool>();
  m.meta.train_mode = j["train_mode"].get<std::string>();
  m.meta.epoch = j["epoch"].get<int>();
  m.meta.dev_accuracy = j["dev_accuracy"].get<double>();

  uint32_t count;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  auto refs = param_refs(m.params);
  if (count != refs.size()) throw IoError(path + ": tensor count mismatch");
  for (auto& [name, mat] : refs) {
    auto [rname, rmat] = read_mat(in);
    if (rname != name) throw IoError(path + ": tensor order mismatch at " + rname);
    *mat = std::move(rmat);
  }
  m.pred = read_embeddings_binary(in);
  m.arg = read_embeddings_binary(in);
  if (!in) throw IoError(path + ": truncated checkpoint");
  return m;
}

}  // namespace sgnn
