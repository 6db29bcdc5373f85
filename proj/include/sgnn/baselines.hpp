#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/embed.hpp"
#include "sgnn/event.hpp"
#include "sgnn/model.hpp"

namespace sgnn {

// Ordered predicate-GR co-occurrence within a window of chain positions,
// plus unigram occurrence counts.
struct CooccurrenceCounts {
  Vocab vocab;
  std::unordered_map<uint64_t, uint64_t> joint;  // (a << 32 | b), a before b
  std::vector<uint64_t> unigram;
  std::vector<uint64_t> out_total;  // sum_b joint(a, b)
  uint64_t total_unigrams = 0;
  uint64_t total_joint = 0;
  int window = 2;

  uint64_t joint_count(int a, int b) const;
  uint64_t joint_count(std::string_view a, std::string_view b) const;
};

// Counts every ordered pair (events[i], events[j]) with 0 < j - i <= window.
CooccurrenceCounts count_cooccurrence(const std::vector<Chain>& chains, int window = 2);
CooccurrenceCounts merge_counts(const CooccurrenceCounts& a, const CooccurrenceCounts& b);

// Additive smoothing with delta over V unigrams and V^2 ordered pairs:
//   P(a,b) = (joint(a,b)+delta) / (J+delta*V^2)
//   P(a)   = (uni(a)+delta) / (U+delta*V)
//   pmi(a,b) = log(P(a,b) / (P(a) P(b)))
// Candidate score is the sum of pmi(ctx_i, cand) over context events.
double pmi(const CooccurrenceCounts& c, std::string_view a, std::string_view b,
           double delta = 0.5);
int pmi_choose(const CooccurrenceCounts& c, const Instance& inst, double delta = 0.5);

//   P(b|a) = (joint(a,b)+delta) / (out(a)+delta*V)
// Candidate score is the sum of log P(cand | ctx_i) over context events.
double bigram_logprob(const CooccurrenceCounts& c, std::string_view a, std::string_view b,
                      double delta = 0.5);
int bigram_choose(const CooccurrenceCounts& c, const Instance& inst, double delta = 0.5);

// Embedding-similarity chooser. ChainConcat represents an event as the
// concatenation of its predicate-GR and argument vectors from one
// chain-trained table; GraphPredicate uses the bare predicate-GR vector from
// a graph-trained table. Score = mean similarity to the context events.
enum class EmbedStyle { ChainConcat, GraphPredicate };
int embedding_choose(const EmbeddingTable& table, const Instance& inst, Metric metric,
                     EmbedStyle style);

// Text export: "#cooc:1", "#window W", a unigram section and the joint
// section as "a \t b \t count" rows.
void save_counts(const CooccurrenceCounts& c, const std::string& path);
CooccurrenceCounts load_counts(const std::string& path);

}  // namespace sgnn
