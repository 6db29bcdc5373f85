#include "sgnn/neeg.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <ostream>
#include <thread>
#include <unordered_map>

namespace sgnn {

namespace {

uint64_t pair_key(int src, int dst) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(src)) << 32) |
         static_cast<uint32_t>(dst);
}

struct CountMap {
  Vocab nodes;
  std::unordered_map<uint64_t, uint64_t> counts;

  void add_chain(const Chain& c) {
    int prev = -1;
    for (const auto& e : c.events) {
      int id = nodes.intern(e.predicate_gr());
      if (prev >= 0) ++counts[pair_key(prev, id)];
      prev = id;
    }
  }
};

Neeg finalize(CountMap&& cm) {
  Neeg g;
  g.nodes = std::move(cm.nodes);
  size_t n = g.nodes.size();
  std::vector<std::vector<std::pair<uint32_t, uint64_t>>> adj(n);
  for (const auto& [key, cnt] : cm.counts)
    adj[key >> 32].emplace_back(static_cast<uint32_t>(key), cnt);
  g.offsets.assign(n + 1, 0);
  for (size_t i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    g.offsets[i + 1] = g.offsets[i] + adj[i].size();
  }
  g.dst.reserve(g.offsets[n]);
  g.counts.reserve(g.offsets[n]);
  for (size_t i = 0; i < n; ++i)
    for (auto [d, c] : adj[i]) {
      g.dst.push_back(d);
      g.counts.push_back(c);
    }
  g.normalize();
  return g;
}

}  // namespace

void Neeg::normalize() {
  size_t n = num_nodes();
  out_totals.assign(n, 0);
  weights.assign(counts.size(), 0.0);
  for (size_t i = 0; i < n; ++i) {
    uint64_t total = 0;
    for (uint64_t e = offsets[i]; e < offsets[i + 1]; ++e) total += counts[e];
    out_totals[i] = total;
    for (uint64_t e = offsets[i]; e < offsets[i + 1]; ++e)
      weights[e] = static_cast<double>(counts[e]) / static_cast<double>(total);
  }
}

double Neeg::edge_weight_ids(int src, int dst_id) const {
  if (src < 0 || dst_id < 0 || static_cast<size_t>(src) >= num_nodes()) return 0.0;
  auto begin = dst.begin() + static_cast<ptrdiff_t>(offsets[src]);
  auto end = dst.begin() + static_cast<ptrdiff_t>(offsets[src + 1]);
  auto it = std::lower_bound(begin, end, static_cast<uint32_t>(dst_id));
  if (it == end || *it != static_cast<uint32_t>(dst_id)) return 0.0;
  return weights[static_cast<size_t>(it - dst.begin())];
}

double Neeg::edge_weight(std::string_view src, std::string_view dst_name) const {
  return edge_weight_ids(nodes.find(src), nodes.find(dst_name));
}

Neeg build_neeg(const std::vector<Chain>& chains, int shards) {
  if (chains.empty()) throw ConfigError("build_neeg: empty chain corpus");
  if (shards < 1) throw ConfigError("build_neeg: shards must be >= 1");
  if (shards == 1 || chains.size() < static_cast<size_t>(shards)) {
    CountMap cm;
    for (const auto& c : chains) cm.add_chain(c);
    return finalize(std::move(cm));
  }
  // Contiguous shards counted in parallel, merged in shard order; the result
  // is identical to the monolithic build.
  std::vector<Neeg> parts(shards);
  std::vector<std::thread> workers;
  size_t per = (chains.size() + shards - 1) / shards;
  for (int s = 0; s < shards; ++s) {
    workers.emplace_back([&, s] {
      CountMap cm;
      size_t b = per * static_cast<size_t>(s);
      size_t e = std::min(chains.size(), b + per);
      for (size_t i = b; i < e; ++i) cm.add_chain(chains[i]);
      parts[s] = finalize(std::move(cm));
    });
  }
  for (auto& w : workers) w.join();
  Neeg g = std::move(parts[0]);
  for (int s = 1; s < shards; ++s) g = merge_neeg(g, parts[s]);
  return g;
}

Neeg merge_neeg(const Neeg& a, const Neeg& b) {
  CountMap cm;
  cm.nodes = a.nodes;
  for (size_t i = 0; i < a.num_nodes(); ++i)
    for (uint64_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e)
      cm.counts[pair_key(static_cast<int>(i), static_cast<int>(a.dst[e]))] = a.counts[e];
  std::vector<int> remap(b.num_nodes());
  for (size_t i = 0; i < b.num_nodes(); ++i)
    remap[i] = cm.nodes.intern(b.nodes.name(static_cast<int>(i)));
  for (size_t i = 0; i < b.num_nodes(); ++i)
    for (uint64_t e = b.offsets[i]; e < b.offsets[i + 1]; ++e)
      cm.counts[pair_key(remap[i], remap[b.dst[e]])] += b.counts[e];
  return finalize(std::move(cm));
}

SubgraphAdjacency subgraph_adjacency(const Neeg& g, const Instance& inst) {
  SubgraphAdjacency sub;
  size_t n = inst.context.size() + inst.candidates.size();
  sub.a = Mat(static_cast<int>(n), static_cast<int>(n));
  sub.node_ids.reserve(n);
  sub.node_names.reserve(n);
  auto add_slot = [&](const Event& e) {
    std::string pgr = e.predicate_gr();
    int id = g.nodes.find(pgr);
    if (id < 0) ++sub.unknown_slots;
    sub.node_ids.push_back(id);
    sub.node_names.push_back(std::move(pgr));
  };
  for (const auto& e : inst.context) add_slot(e);
  for (const auto& e : inst.candidates) add_slot(e);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      sub.a(static_cast<int>(i), static_cast<int>(j)) =
          g.edge_weight_ids(sub.node_ids[i], sub.node_ids[j]);
  return sub;
}

namespace {

constexpr char kMagic[8] = {'N', 'E', 'E', 'G', 'B', 'I', 'N', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

template <typename T>
void read_vec(std::istream& in, std::vector<T>& v, size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
}

}  // namespace

void save_neeg(const Neeg& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, static_cast<uint64_t>(g.num_nodes()));
  write_pod(out, static_cast<uint64_t>(g.num_edges()));
  for (size_t i = 0; i < g.num_nodes(); ++i) {
    const std::string& s = g.nodes.name(static_cast<int>(i));
    write_pod(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  write_vec(out, g.offsets);
  write_vec(out, g.dst);
  write_vec(out, g.counts);
  if (!out) throw IoError("write failed: " + path);
}

Neeg load_neeg(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError(path + ": not a graph file");
  Neeg g;
  auto n = read_pod<uint64_t>(in);
  auto m = read_pod<uint64_t>(in);
  for (uint64_t i = 0; i < n; ++i) {
    auto len = read_pod<uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    g.nodes.intern(s);
  }
  read_vec(in, g.offsets, n + 1);
  read_vec(in, g.dst, m);
  read_vec(in, g.counts, m);
  if (!in) throw IoError(path + ": truncated graph file");
  g.normalize();
  return g;
}

void export_neeg_text(const Neeg& g, std::ostream& out) {
  for (size_t i = 0; i < g.num_nodes(); ++i)
    for (uint64_t e = g.offsets[i]; e < g.offsets[i + 1]; ++e)
      out << g.nodes.name(static_cast<int>(i)) << '\t' << g.nodes.name(static_cast<int>(g.dst[e]))
          << '\t' << g.counts[e] << '\t' << format_double(g.weights[e]) << '\n';
}

}  // namespace sgnn
