#include "sgnn/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "sgnn/rng.hpp"

namespace sgnn {

void WalkConfig::validate() const {
  if (walks_per_node < 1 || walk_length < 1 || window < 1 || negatives < 1 || epochs < 1 ||
      threads < 1)
    throw ConfigError("walk config: counts must be positive");
  if (lr <= 0) throw ConfigError("walk config: lr must be positive");
}

std::vector<std::vector<std::string>> random_walks(const Neeg& g, const WalkConfig& cfg) {
  cfg.validate();
  if (g.num_nodes() == 0) throw ConfigError("random_walks: empty graph");
  size_t n = g.num_nodes();
  std::vector<std::vector<std::string>> walks(n * static_cast<size_t>(cfg.walks_per_node));
  auto run_node = [&](size_t v) {
    for (int w = 0; w < cfg.walks_per_node; ++w) {
      Rng rng = Rng::stream(cfg.seed, v * static_cast<size_t>(cfg.walks_per_node) + w);
      auto& walk = walks[v * static_cast<size_t>(cfg.walks_per_node) + w];
      walk.reserve(cfg.walk_length);
      size_t cur = v;
      walk.push_back(g.nodes.name(static_cast<int>(cur)));
      for (int step = 1; step < cfg.walk_length; ++step) {
        uint64_t begin = g.offsets[cur], end = g.offsets[cur + 1];
        if (begin == end) break;  // sink
        size_t next;
        if (cfg.uniform_walks) {
          next = g.dst[begin + rng.index(end - begin)];
        } else {
          double r = rng.real();
          double acc = 0;
          uint64_t e = begin;
          for (; e + 1 < end; ++e) {
            acc += g.weights[e];
            if (r < acc) break;
          }
          next = g.dst[e];
        }
        walk.push_back(g.nodes.name(static_cast<int>(next)));
        cur = next;
      }
    }
  };
  if (cfg.threads == 1) {
    for (size_t v = 0; v < n; ++v) run_node(v);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < cfg.threads; ++t)
      pool.emplace_back([&, t] {
        for (size_t v = static_cast<size_t>(t); v < n; v += static_cast<size_t>(cfg.threads))
          run_node(v);
      });
    for (auto& th : pool) th.join();
  }
  return walks;
}

double sgns_loss(std::span<const double> v, std::span<const double> u_pos,
                 const std::vector<std::vector<double>>& u_negs) {
  double loss = -std::log(sigmoid(dot(v, u_pos)));
  for (const auto& u : u_negs) loss -= std::log(sigmoid(-dot(v, u)));
  return loss;
}

double sgns_grads(std::span<const double> v, std::span<const double> u_pos,
                  const std::vector<std::vector<double>>& u_negs, std::span<double> gv,
                  std::span<double> gu_pos, std::vector<std::vector<double>>& gu_negs) {
  size_t d = v.size();
  std::fill(gv.begin(), gv.end(), 0.0);
  double f = sigmoid(dot(v, u_pos));
  double loss = -std::log(f);
  for (size_t i = 0; i < d; ++i) {
    gu_pos[i] = (f - 1.0) * v[i];
    gv[i] += (f - 1.0) * u_pos[i];
  }
  gu_negs.assign(u_negs.size(), std::vector<double>(d, 0.0));
  for (size_t j = 0; j < u_negs.size(); ++j) {
    double fn = sigmoid(dot(v, u_negs[j]));
    loss -= std::log(1.0 - fn);
    for (size_t i = 0; i < d; ++i) {
      gu_negs[j][i] = fn * v[i];
      gv[i] += fn * u_negs[j][i];
    }
  }
  return loss;
}

namespace {

struct SgnsCorpus {
  Vocab vocab;                                 // row 0 = "-"
  std::vector<std::vector<int>> seqs;          // token ids, "-" dropped
  std::vector<uint64_t> counts;                // per row
  std::vector<double> neg_cum;                 // cumulative unigram^0.75 over rows >= 1
};

SgnsCorpus index_corpus(const std::vector<std::vector<std::string>>& sequences) {
  SgnsCorpus c;
  c.vocab.intern(kAbsent);
  c.counts.push_back(0);
  for (const auto& seq : sequences) {
    std::vector<int> ids;
    ids.reserve(seq.size());
    for (const auto& tok : seq) {
      if (tok == kAbsent) continue;
      int id = c.vocab.intern(tok);
      if (id == static_cast<int>(c.counts.size())) c.counts.push_back(0);
      ++c.counts[id];
      ids.push_back(id);
    }
    if (!ids.empty()) c.seqs.push_back(std::move(ids));
  }
  c.neg_cum.resize(c.counts.size(), 0.0);
  double run = 0;
  for (size_t i = 1; i < c.counts.size(); ++i)
    c.neg_cum[i] = (run += std::pow(static_cast<double>(c.counts[i]), 0.75));
  return c;
}

int sample_negative(const SgnsCorpus& c, Rng& rng) {
  double r = rng.real() * c.neg_cum.back();
  auto it = std::upper_bound(c.neg_cum.begin() + 1, c.neg_cum.end(), r);
  return static_cast<int>(it - c.neg_cum.begin());
}

void train_pass(const SgnsCorpus& c, std::span<const std::vector<int>* const> seqs, Mat& in,
                Mat& out, const WalkConfig& cfg, Rng& rng) {
  const int d = in.cols;
  std::vector<double> verr(d);
  for (const auto* seq_ptr : seqs) {
    const auto& seq = *seq_ptr;
    for (size_t center = 0; center < seq.size(); ++center) {
      int v_id = seq[center];
      auto v = in.row(v_id);
      for (int off = -cfg.window; off <= cfg.window; ++off) {
        if (off == 0) continue;
        ptrdiff_t pos = static_cast<ptrdiff_t>(center) + off;
        if (pos < 0 || pos >= static_cast<ptrdiff_t>(seq.size())) continue;
        int target = seq[static_cast<size_t>(pos)];
        std::fill(verr.begin(), verr.end(), 0.0);
        // positive pair, then `negatives` samples with label 0
        for (int s = 0; s <= cfg.negatives; ++s) {
          int u_id;
          double label;
          if (s == 0) {
            u_id = target;
            label = 1.0;
          } else {
            u_id = sample_negative(c, rng);
            if (u_id == target) continue;
            label = 0.0;
          }
          auto u = out.row(u_id);
          double g = (label - sigmoid(dot(v, u))) * cfg.lr;
          for (int i = 0; i < d; ++i) verr[i] += g * u[i];
          for (int i = 0; i < d; ++i) u[i] += g * v[i];
        }
        for (int i = 0; i < d; ++i) v[i] += verr[i];
      }
    }
  }
}

}  // namespace

EmbeddingTable train_skipgram(const std::vector<std::vector<std::string>>& sequences, int d,
                              const WalkConfig& cfg, Mat* context_out) {
  cfg.validate();
  if (d < 1) throw ConfigError("train_skipgram: dimension must be positive");
  SgnsCorpus corpus = index_corpus(sequences);
  if (corpus.vocab.size() <= 1) throw ConfigError("train_skipgram: empty vocabulary");

  EmbeddingTable table;
  table.vocab = corpus.vocab;
  table.vectors = Mat(static_cast<int>(corpus.vocab.size()), d);
  Mat out(static_cast<int>(corpus.vocab.size()), d);
  Rng init_rng(splitmix64(cfg.seed ^ 0x534b4950ULL));
  for (int r = 1; r < table.vectors.rows; ++r)
    for (int i = 0; i < d; ++i) table.vectors(r, i) = (init_rng.real() - 0.5) / d;

  if (cfg.threads == 1) {
    std::vector<const std::vector<int>*> all;
    for (const auto& s : corpus.seqs) all.push_back(&s);
    Rng rng(splitmix64(cfg.seed ^ 0x5347445fULL));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
      train_pass(corpus, all, table.vectors, out, cfg, rng);
  } else {
    // Round-robin shards train on parameter copies; copies are averaged
    // after every epoch. Reproducible for a fixed thread count.
    std::vector<std::vector<const std::vector<int>*>> shards(cfg.threads);
    for (size_t i = 0; i < corpus.seqs.size(); ++i)
      shards[i % static_cast<size_t>(cfg.threads)].push_back(&corpus.seqs[i]);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::vector<Mat> ins(cfg.threads, table.vectors), outs(cfg.threads, out);
      std::vector<std::thread> pool;
      for (int t = 0; t < cfg.threads; ++t)
        pool.emplace_back([&, t] {
          Rng rng = Rng::stream(cfg.seed, 0xe90c * static_cast<uint64_t>(epoch) + t);
          train_pass(corpus, shards[t], ins[t], outs[t], cfg, rng);
        });
      for (auto& th : pool) th.join();
      table.vectors.fill(0.0);
      out.fill(0.0);
      for (int t = 0; t < cfg.threads; ++t) {
        axpy_inplace(table.vectors, 1.0 / cfg.threads, ins[t]);
        axpy_inplace(out, 1.0 / cfg.threads, outs[t]);
      }
    }
  }
  // row 0 is the reserved zero row
  for (int i = 0; i < d; ++i) table.vectors(0, i) = 0.0;
  if (context_out) *context_out = std::move(out);
  return table;
}

std::vector<std::vector<std::string>> arg_sequences(const std::vector<Chain>& chains) {
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(chains.size());
  for (const auto& c : chains) {
    std::vector<std::string> toks;
    for (const auto& e : c.events)
      for (const auto& a : e.args)
        if (a != kAbsent) toks.push_back(a);
    if (!toks.empty()) seqs.push_back(std::move(toks));
  }
  return seqs;
}

std::vector<std::vector<std::string>> event_token_sequences(const std::vector<Chain>& chains) {
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(chains.size());
  for (const auto& c : chains) {
    std::vector<std::string> toks;
    for (const auto& e : c.events) {
      toks.push_back(e.predicate_gr());
      for (const auto& a : e.args)
        if (a != kAbsent) toks.push_back(a);
    }
    if (!toks.empty()) seqs.push_back(std::move(toks));
  }
  return seqs;
}

EventVectors event_input_vectors(const EmbeddingTable& pred, const EmbeddingTable& arg,
                                 const Event& e) {
  if (pred.dim() != arg.dim())
    throw ConfigError("event_input_vectors: table dimensions differ");
  EventVectors out;
  out.v[0] = pred.lookup(e.predicate_gr());
  for (int i = 0; i < 3; ++i) out.v[i + 1] = arg.lookup(e.args[i]);
  return out;
}

namespace {
constexpr char kEmbMagic[8] = {'S', 'G', 'N', 'N', 'E', 'M', 'B', '1'};
}

void write_embeddings_binary(const EmbeddingTable& t, std::ostream& out) {
  out.write(kEmbMagic, sizeof(kEmbMagic));
  uint32_t d = static_cast<uint32_t>(t.dim());
  uint64_t n = t.vocab.size();
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (size_t r = 0; r < n; ++r) {
    const std::string& tok = t.vocab.name(static_cast<int>(r));
    uint32_t len = static_cast<uint32_t>(tok.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(tok.data(), len);
    out.write(reinterpret_cast<const char*>(t.vectors.row(static_cast<int>(r)).data()),
              static_cast<std::streamsize>(sizeof(double) * d));
  }
}

EmbeddingTable read_embeddings_binary(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kEmbMagic, sizeof(kEmbMagic)) != 0)
    throw IoError("not a binary embedding blob");
  EmbeddingTable t;
  t.vocab = Vocab();
  uint32_t d;
  uint64_t n;
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  t.vectors = Mat(static_cast<int>(n), static_cast<int>(d));
  for (uint64_t r = 0; r < n; ++r) {
    uint32_t len;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string tok(len, '\0');
    in.read(tok.data(), len);
    t.vocab.intern(tok);
    in.read(reinterpret_cast<char*>(t.vectors.row(static_cast<int>(r)).data()),
            static_cast<std::streamsize>(sizeof(double) * d));
  }
  if (!in) throw IoError("truncated embedding blob");
  if (t.vocab.size() == 0 || t.vocab.name(0) != kAbsent)
    throw IoError("embedding table must reserve row 0 for '-'");
  return t;
}

void save_embeddings(const EmbeddingTable& t, const std::string& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  if (binary) {
    write_embeddings_binary(t, out);
  } else {
    out << "#emb:1\n" << t.dim() << ' ' << t.vocab.size() << '\n';
    for (size_t r = 0; r < t.vocab.size(); ++r) {
      out << t.vocab.name(static_cast<int>(r));
      for (double v : t.vectors.row(static_cast<int>(r))) out << '\t' << format_double(v);
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  EmbeddingTable t;
  t.vocab = Vocab();
  if (in && std::memcmp(magic, kEmbMagic, sizeof(kEmbMagic)) == 0) {
    in.seekg(0);
    t = read_embeddings_binary(in);
    return t;
  } else {
    in.clear();
    in.seekg(0);
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line) || trim(line) != "#emb:1")
      throw ParseError(1, "missing '#emb:1' header");
    ++line_no;
    if (!std::getline(in, line)) throw ParseError(2, "missing dimension line");
    ++line_no;
    std::istringstream hdr{line};
    int d = 0;
    size_t n = 0;
    hdr >> d >> n;
    if (d < 1 || n < 1) throw ParseError(line_no, "bad dimension line");
    t.vectors = Mat(static_cast<int>(n), d);
    for (size_t r = 0; r < n; ++r) {
      if (!std::getline(in, line)) throw ParseError(line_no + 1, "truncated embedding file");
      ++line_no;
      auto f = tokens(line);
      if (f.size() != static_cast<size_t>(d) + 1)
        throw ParseError(line_no, "bad embedding row");
      t.vocab.intern(f[0]);
      for (int i = 0; i < d; ++i)
        t.vectors(static_cast<int>(r), i) = std::stod(std::string(f[static_cast<size_t>(i) + 1]));
    }
  }
  if (t.vocab.size() == 0 || t.vocab.name(0) != kAbsent)
    throw IoError(path + ": embedding table must reserve row 0 for '-'");
  return t;
}

}  // namespace sgnn
