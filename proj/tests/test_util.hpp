#pragma once

// Shared helpers for the test suites.

#include <string>
#include <vector>

#include "sgnn/embed.hpp"
#include "sgnn/event.hpp"
#include "sgnn/model.hpp"
#include "sgnn/neeg.hpp"
#include "sgnn/rng.hpp"

namespace sgnn::testutil {

inline Event ev(const std::string& verb, Dep dep = Dep::Subj,
                const std::array<std::string, 3>& args = {"-", "-", "-"}) {
  Event e;
  e.verb = verb;
  e.dep = dep;
  e.args = args;
  return e;
}

inline Chain chain_of(const std::vector<std::string>& verbs) {
  Chain c;
  c.protagonist = "p";
  for (const auto& v : verbs) c.events.push_back(ev(v));
  return c;
}

// Table with explicit rows; row 0 stays the reserved zero row.
inline EmbeddingTable table_of(const std::vector<std::pair<std::string, std::vector<double>>>& rows,
                               int d) {
  EmbeddingTable t;
  t.vectors = Mat(static_cast<int>(rows.size()) + 1, d);
  for (const auto& [tok, vec] : rows) {
    int r = t.vocab.intern(tok);
    for (int i = 0; i < d; ++i) t.vectors(r, i) = vec[static_cast<size_t>(i)];
  }
  return t;
}

// Random embedding tables covering every token an instance set uses.
inline void random_tables(const std::vector<Instance>& instances, int d, uint64_t seed,
                          EmbeddingTable& pred, EmbeddingTable& arg) {
  Rng rng(seed);
  pred = EmbeddingTable();
  arg = EmbeddingTable();
  std::vector<std::pair<std::string, std::vector<double>>> prows, arows;
  auto add = [&](EmbeddingTable& t, const std::string& tok) {
    if (t.vocab.find(tok) >= 0 || tok == "-") return;
    t.vocab.intern(tok);
  };
  for (const auto& inst : instances) {
    for (const auto& e : inst.context) {
      add(pred, e.predicate_gr());
      for (const auto& a : e.args) add(arg, a);
    }
    for (const auto& e : inst.candidates) {
      add(pred, e.predicate_gr());
      for (const auto& a : e.args) add(arg, a);
    }
  }
  auto fill = [&](EmbeddingTable& t) {
    t.vectors = Mat(static_cast<int>(t.vocab.size()), d);
    for (int r = 1; r < t.vectors.rows; ++r)
      for (int i = 0; i < d; ++i) t.vectors(r, i) = rng.uniform(-0.8, 0.8);
  };
  fill(pred);
  fill(arg);
}

// A small random instance over an ad-hoc event vocabulary.
inline Instance random_instance(int n, int k, uint64_t seed) {
  Rng rng(seed);
  Instance inst;
  auto random_event = [&]() {
    Event e;
    e.verb = "v" + std::to_string(rng.index(12));
    e.dep = static_cast<Dep>(rng.index(3));
    for (auto& a : e.args)
      if (rng.bernoulli(0.7)) a = "w" + std::to_string(rng.index(15));
    return e;
  };
  for (int i = 0; i < n; ++i) inst.context.push_back(random_event());
  for (int j = 0; j < k; ++j) inst.candidates.push_back(random_event());
  inst.gold = static_cast<int>(rng.index(static_cast<uint64_t>(k)));
  return inst;
}

// A random graph over the same vocabulary so subgraphs are non-trivial.
inline Neeg random_graph(uint64_t seed) {
  Rng rng(seed);
  std::vector<Chain> chains;
  for (int c = 0; c < 60; ++c) {
    Chain chain;
    chain.protagonist = "p";
    int len = 2 + static_cast<int>(rng.index(6));
    for (int i = 0; i < len; ++i) {
      Event e;
      e.verb = "v" + std::to_string(rng.index(12));
      e.dep = static_cast<Dep>(rng.index(3));
      chain.events.push_back(e);
    }
    chains.push_back(std::move(chain));
  }
  return build_neeg(chains);
}

inline SgnnModel random_model(Composition comp, Metric metric, bool attention, int K, int d,
                              const std::vector<Instance>& instances, uint64_t seed) {
  SgnnModel m;
  Rng rng(seed);
  m.params = init_params(comp, metric, attention, K, d, rng);
  random_tables(instances, d, seed + 1, m.pred, m.arg);
  return m;
}

}  // namespace sgnn::testutil
