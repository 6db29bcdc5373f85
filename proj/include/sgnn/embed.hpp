#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/event.hpp"
#include "sgnn/matrix.hpp"
#include "sgnn/neeg.hpp"

namespace sgnn {

// Token -> d-dimensional vector table. Row 0 is reserved for the "-"
// placeholder, stays all-zero, and is returned for out-of-vocabulary lookups.
struct EmbeddingTable {
  Vocab vocab;
  Mat vectors;

  EmbeddingTable() { vocab.intern(kAbsent); }
  int dim() const { return vectors.cols; }

  // Row index for a token; 0 (the zero row) for "-" and unknown tokens.
  int row_of(std::string_view token) const {
    int id = vocab.find(token);
    return id < 0 ? 0 : id;
  }
  std::span<const double> lookup(std::string_view token) const {
    return vectors.row(row_of(token));
  }
};

struct WalkConfig {
  int walks_per_node = 10;
  int walk_length = 40;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  uint64_t seed = 1;
  double lr = 0.025;
  int threads = 1;             // >1: sharded-parallel with per-epoch averaging
  bool uniform_walks = false;  // ignore edge weights when stepping (ablation)

  void validate() const;
};

// walks_per_node random walks from every node; steps follow outgoing edge
// weights (or uniform over neighbors when uniform_walks); a walk halts early
// at a sink. Each walk has its own seed stream, so output is independent of
// scheduling. Returns node-token sequences.
std::vector<std::vector<std::string>> random_walks(const Neeg& g, const WalkConfig& cfg);

// Skip-gram with negative sampling over arbitrary token sequences; returns
// the input-vector table. Negative distribution is unigram^0.75. "-" tokens
// never train and never serve as context. Deterministic when threads == 1.
// context_out, when given, receives the output-side (context) vectors.
EmbeddingTable train_skipgram(const std::vector<std::vector<std::string>>& sequences, int d,
                              const WalkConfig& cfg, Mat* context_out = nullptr);

// Loss and gradients of one (center, positive, negatives) triple:
//   L = -log sigmoid(v.u_pos) - sum_i log sigmoid(-v.u_neg_i)
// Exposed so the update rule can be checked against finite differences.
double sgns_loss(std::span<const double> v, std::span<const double> u_pos,
                 const std::vector<std::vector<double>>& u_negs);
double sgns_grads(std::span<const double> v, std::span<const double> u_pos,
                  const std::vector<std::vector<double>>& u_negs, std::span<double> gv,
                  std::span<double> gu_pos, std::vector<std::vector<double>>& gu_negs);

// Chain linearizations.
// Argument corpus: per chain, the non-"-" argument tokens in event order
// (a0, a1, a2 per event); verbs excluded.
std::vector<std::vector<std::string>> arg_sequences(const std::vector<Chain>& chains);
// Event-token corpus: per chain, each event's predicate-GR token followed by
// its non-"-" arguments (used by the chain-embedding baseline).
std::vector<std::vector<std::string>> event_token_sequences(const std::vector<Chain>& chains);

// (v_p, v_a0, v_a1, v_a2) for an event; the verb is looked up by
// predicate-GR in pred, arguments in arg. Absent and unknown tokens resolve
// to zero vectors. Tables must share their dimension.
struct EventVectors {
  std::array<std::span<const double>, 4> v;
};
EventVectors event_input_vectors(const EmbeddingTable& pred, const EmbeddingTable& arg,
                                 const Event& e);

// Text format: "#emb:1", then "<d> <vocab>", then "token \t v1 ... v_d"
// rows (row 0 = "-" included). Binary variant: magic "SGNNEMB1", u32 d,
// u64 vocab, then per row a u32-length token and d doubles.
void save_embeddings(const EmbeddingTable& t, const std::string& path, bool binary = false);
EmbeddingTable load_embeddings(const std::string& path);

// Stream-level binary form, also embedded in model checkpoints.
void write_embeddings_binary(const EmbeddingTable& t, std::ostream& out);
EmbeddingTable read_embeddings_binary(std::istream& in);

}  // namespace sgnn
