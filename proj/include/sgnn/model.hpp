#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgnn/embed.hpp"
#include "sgnn/event.hpp"
#include "sgnn/matrix.hpp"
#include "sgnn/neeg.hpp"
#include "sgnn/rng.hpp"

namespace sgnn {

enum class Composition { Average, Nonlinear, Concatenation };
enum class Metric { Manhattan, Cosine, Dot, Euclidean };

const char* composition_name(Composition c);
const char* metric_name(Metric m);
Composition composition_from(std::string_view s);
Metric metric_from(std::string_view s);

// Hidden size for a composition method: 4d for concatenation, d otherwise.
int hidden_size(Composition c, int d);

// All trainable tensors. Biases are stored as 1 x H rows; the attention
// projections map a hidden vector to a scalar, so they are 1 x H as well.
struct SgnnParams {
  Composition composition = Composition::Concatenation;
  Metric metric = Metric::Euclidean;
  bool use_attention = true;
  int K = 2;
  int d = 128;
  int H = 512;

  // nonlinear composition: v_e = tanh(Wp*vp + W0*a0 + W1*a1 + W2*a2 + b)
  Mat comp_Wp, comp_W0, comp_W1, comp_W2, comp_b;
  // propagation: a = A^T h + b, then GRU-style gating
  Mat Wz, Uz, Wr, Ur, W, U, b_a;
  // attention: u_ij = tanh(wh.h_i + wc.h_cj + bu)
  Mat att_wh, att_wc, att_bu;
};

// Uniform Glorot init for matrices, zeros for biases.
SgnnParams init_params(Composition comp, Metric metric, bool use_attention, int K, int d,
                       Rng& rng);

// Trainable tensors for this configuration, in a fixed order.
std::vector<std::pair<std::string, Mat*>> param_refs(SgnnParams& p);
std::vector<std::pair<std::string, const Mat*>> param_refs(const SgnnParams& p);
double param_sq_norm(const SgnnParams& p);

// Composition of one event's four d-vectors into an H-vector.
std::vector<double> compose_event(const SgnnParams& p,
                                  const std::array<std::span<const double>, 4>& v);

// Similarity score; higher always means more related. Manhattan and
// euclidean distances are negated. Cosine with a zero vector is 0.
double similarity(Metric m, std::span<const double> a, std::span<const double> b);

// Everything the backward pass needs from one forward evaluation.
struct ForwardCache {
  int n = 0, k = 0;
  Mat vin[4];                                // (n+k) x d input vectors
  std::vector<std::array<int, 4>> in_rows;   // per slot: pred row, arg rows
  Mat A;
  Mat h0;
  std::vector<Mat> a, z, r, c;               // per propagation step
  std::vector<Mat> h;                        // h[0] = h0, h[t] = state after step t
  Mat u, alpha;                              // n x k, attention only
  Mat gvals;                                 // n x k pair similarities
  std::vector<double> scores;                // k
  const Mat& hK() const { return h.back(); }
};

// Runs the K-step gated propagation:
//   a^t = A^T h^{t-1} + b        (node i aggregates its weighted predecessors;
//                                 with edge 0->1 of weight w, a_1 = w*h_0 + b)
//   z^t = sigmoid(Wz a^t + Uz h^{t-1})
//   r^t = sigmoid(Wr a^t + Ur h^{t-1})
//   c^t = tanh(W a^t + U (r^t . h^{t-1}))
//   h^t = (1 - z^t) . h^{t-1} + z^t . c^t
// K = 0 returns h0 unchanged. Shapes are validated before any computation.
void ggnn_forward(const Mat& h0, const Mat& A, const SgnnParams& p, ForwardCache& cache);

// Attention weights for candidate j over the n context events; rows sum to 1.
Mat attention_weights(const Mat& h_ctx, const Mat& h_cand, const SgnnParams& p, Mat* u_out);

// Candidate scores from the final hidden states. Without attention
// s_j = mean_i g(h_i, h_cj); with attention s_j = sum_i alpha_ij g(h_i, h_cj).
void score_candidates(const SgnnParams& p, ForwardCache& cache);

struct ModelMeta {
  uint64_t init_seed = 0;
  std::string init_scheme = "glorot-uniform";
  std::string optimizer = "rmsprop";
  double learning_rate = 1e-4, rmsprop_decay = 0.9, rmsprop_epsilon = 1e-8;
  double margin = 0.015, l2_lambda = 1e-5;
  bool include_gold_hinge = false, finetune_embeddings = false;
  std::string train_mode = "single-thread";
  int epoch = 0;
  double dev_accuracy = 0.0;
};

struct SgnnModel {
  EmbeddingTable pred;
  EmbeddingTable arg;
  SgnnParams params;
  ModelMeta meta;
};

// Full forward pass for one instance against the graph.
ForwardCache forward_instance(const SgnnModel& m, const Instance& inst, const Neeg& g);

// Argmax candidate; ties break to the lowest index.
int predict(const SgnnModel& m, const Instance& inst, const Neeg& g);
int argmax_score(std::span<const double> scores);

// Versioned binary checkpoint holding flags, hyperparameters, all parameter
// tensors and both embedding tables.
void save_model(const SgnnModel& m, const std::string& path);
SgnnModel load_model(const std::string& path);

}  // namespace sgnn
