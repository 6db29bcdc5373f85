#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/event.hpp"
#include "sgnn/matrix.hpp"

namespace sgnn {

// Directed weighted graph over predicate-GR nodes. Edges carry the raw bigram
// count and the row-normalized weight count(i,j) / sum_k count(i,k). Counts
// are primary (stored and merged); weights are always derived from them.
// CSR layout: edges of node i live in [offsets[i], offsets[i+1]), sorted by
// destination id.
struct Neeg {
  Vocab nodes;                    // predicate-GR strings, first-observation order
  std::vector<uint64_t> offsets;  // size nodes+1
  std::vector<uint32_t> dst;
  std::vector<uint64_t> counts;
  std::vector<double> weights;
  std::vector<uint64_t> out_totals;  // per-node outgoing count sums

  size_t num_nodes() const { return nodes.size(); }
  size_t num_edges() const { return dst.size(); }

  // Normalized weight of src -> dst; 0 when either node or the edge is absent.
  double edge_weight(std::string_view src, std::string_view dst) const;
  double edge_weight_ids(int src, int dst) const;

  // Recomputes weights and out_totals from counts.
  void normalize();
};

Neeg build_neeg(const std::vector<Chain>& chains, int shards = 1);

// Count-wise merge; node ids of `a` are kept, new nodes of `b` appended in
// b's order. Merging shard-built graphs equals building from the
// concatenated corpus.
Neeg merge_neeg(const Neeg& a, const Neeg& b);

// Per-instance adjacency over the n context slots followed by the k
// candidate slots. A[i][j] is the full-graph weight of slot i's node toward
// slot j's node, 0 when no edge exists. Slots whose predicate-GR is unseen
// get an all-zero row and column and are tallied in unknown_slots.
struct SubgraphAdjacency {
  Mat a;
  std::vector<int> node_ids;            // slot -> node id, -1 if unknown
  std::vector<std::string> node_names;  // slot -> predicate-GR
  int unknown_slots = 0;
};

SubgraphAdjacency subgraph_adjacency(const Neeg& g, const Instance& inst);

// Versioned binary format (native endianness):
//   magic "NEEGBIN1", u64 node_count, u64 edge_count,
//   node strings (u32 length + bytes each),
//   offsets (node_count+1 u64), dst (u32 each), counts (u64 each).
// Weights are recomputed on load.
void save_neeg(const Neeg& g, const std::string& path);
Neeg load_neeg(const std::string& path);

// Plain-text export for diffing: "src \t dst \t count \t weight" per edge.
void export_neeg_text(const Neeg& g, std::ostream& out);

}  // namespace sgnn
