#include "sgnn/baselines.hpp"

#include <cmath>
#include <fstream>

namespace sgnn {

namespace {
uint64_t pair_key(int a, int b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}
}  // namespace

uint64_t CooccurrenceCounts::joint_count(int a, int b) const {
  if (a < 0 || b < 0) return 0;
  auto it = joint.find(pair_key(a, b));
  return it == joint.end() ? 0 : it->second;
}

uint64_t CooccurrenceCounts::joint_count(std::string_view a, std::string_view b) const {
  return joint_count(vocab.find(a), vocab.find(b));
}

CooccurrenceCounts count_cooccurrence(const std::vector<Chain>& chains, int window) {
  if (window < 1) throw ConfigError("count_cooccurrence: window must be >= 1");
  CooccurrenceCounts c;
  c.window = window;
  for (const auto& chain : chains) {
    std::vector<int> ids;
    ids.reserve(chain.events.size());
    for (const auto& e : chain.events) {
      int id = c.vocab.intern(e.predicate_gr());
      if (id == static_cast<int>(c.unigram.size())) {
        c.unigram.push_back(0);
        c.out_total.push_back(0);
      }
      ++c.unigram[static_cast<size_t>(id)];
      ++c.total_unigrams;
      ids.push_back(id);
    }
    for (size_t i = 0; i < ids.size(); ++i)
      for (size_t j = i + 1; j < ids.size() && j - i <= static_cast<size_t>(window); ++j) {
        ++c.joint[pair_key(ids[i], ids[j])];
        ++c.out_total[static_cast<size_t>(ids[i])];
        ++c.total_joint;
      }
  }
  return c;
}

CooccurrenceCounts merge_counts(const CooccurrenceCounts& a, const CooccurrenceCounts& b) {
  if (a.window != b.window) throw ConfigError("merge_counts: window mismatch");
  CooccurrenceCounts c = a;
  std::vector<int> remap(b.vocab.size());
  for (size_t i = 0; i < b.vocab.size(); ++i) {
    int id = c.vocab.intern(b.vocab.name(static_cast<int>(i)));
    if (id == static_cast<int>(c.unigram.size())) {
      c.unigram.push_back(0);
      c.out_total.push_back(0);
    }
    remap[i] = id;
  }
  for (size_t i = 0; i < b.vocab.size(); ++i) {
    c.unigram[static_cast<size_t>(remap[i])] += b.unigram[i];
    c.out_total[static_cast<size_t>(remap[i])] += b.out_total[i];
  }
  for (const auto& [key, cnt] : b.joint)
    c.joint[pair_key(remap[key >> 32], remap[static_cast<uint32_t>(key)])] += cnt;
  c.total_unigrams += b.total_unigrams;
  c.total_joint += b.total_joint;
  return c;
}

double pmi(const CooccurrenceCounts& c, std::string_view a, std::string_view b, double delta) {
  double v = static_cast<double>(c.vocab.size());
  int ia = c.vocab.find(a), ib = c.vocab.find(b);
  double pj = (static_cast<double>(c.joint_count(ia, ib)) + delta) /
              (static_cast<double>(c.total_joint) + delta * v * v);
  double ua = ia < 0 ? 0.0 : static_cast<double>(c.unigram[static_cast<size_t>(ia)]);
  double ub = ib < 0 ? 0.0 : static_cast<double>(c.unigram[static_cast<size_t>(ib)]);
  double denom = static_cast<double>(c.total_unigrams) + delta * v;
  double pa = (ua + delta) / denom;
  double pb = (ub + delta) / denom;
  return std::log(pj / (pa * pb));
}

int pmi_choose(const CooccurrenceCounts& c, const Instance& inst, double delta) {
  std::vector<double> scores(inst.candidates.size(), 0.0);
  for (size_t j = 0; j < inst.candidates.size(); ++j) {
    std::string cand = inst.candidates[j].predicate_gr();
    for (const auto& ctx : inst.context) scores[j] += pmi(c, ctx.predicate_gr(), cand, delta);
  }
  return argmax_score(scores);
}

double bigram_logprob(const CooccurrenceCounts& c, std::string_view a, std::string_view b,
                      double delta) {
  double v = static_cast<double>(c.vocab.size());
  int ia = c.vocab.find(a), ib = c.vocab.find(b);
  double out = ia < 0 ? 0.0 : static_cast<double>(c.out_total[static_cast<size_t>(ia)]);
  return std::log((static_cast<double>(c.joint_count(ia, ib)) + delta) / (out + delta * v));
}

int bigram_choose(const CooccurrenceCounts& c, const Instance& inst, double delta) {
  std::vector<double> scores(inst.candidates.size(), 0.0);
  for (size_t j = 0; j < inst.candidates.size(); ++j) {
    std::string cand = inst.candidates[j].predicate_gr();
    for (const auto& ctx : inst.context)
      scores[j] += bigram_logprob(c, ctx.predicate_gr(), cand, delta);
  }
  return argmax_score(scores);
}

namespace {

std::vector<double> event_embedding(const EmbeddingTable& t, const Event& e, EmbedStyle style) {
  if (style == EmbedStyle::GraphPredicate) {
    auto v = t.lookup(e.predicate_gr());
    return {v.begin(), v.end()};
  }
  std::vector<double> out;
  out.reserve(static_cast<size_t>(4) * t.dim());
  auto push = [&](std::span<const double> v) { out.insert(out.end(), v.begin(), v.end()); };
  push(t.lookup(e.predicate_gr()));
  for (const auto& a : e.args) push(t.lookup(a));
  return out;
}

}  // namespace

int embedding_choose(const EmbeddingTable& table, const Instance& inst, Metric metric,
                     EmbedStyle style) {
  std::vector<std::vector<double>> ctx;
  ctx.reserve(inst.context.size());
  for (const auto& e : inst.context) ctx.push_back(event_embedding(table, e, style));
  std::vector<double> scores(inst.candidates.size(), 0.0);
  for (size_t j = 0; j < inst.candidates.size(); ++j) {
    auto cand = event_embedding(table, inst.candidates[j], style);
    double s = 0;
    for (const auto& cv : ctx) s += similarity(metric, cv, cand);
    scores[j] = s / static_cast<double>(ctx.size());
  }
  return argmax_score(scores);
}

void save_counts(const CooccurrenceCounts& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "#cooc:1\n#window " << c.window << "\n#unigrams " << c.vocab.size() << '\n';
  for (size_t i = 0; i < c.vocab.size(); ++i)
    out << c.vocab.name(static_cast<int>(i)) << '\t' << c.unigram[i] << '\n';
  // joint section, sorted by (src, dst) id for diffable output
  std::vector<uint64_t> keys;
  keys.reserve(c.joint.size());
  for (const auto& [k, v] : c.joint) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  out << "#joints " << keys.size() << '\n';
  for (uint64_t k : keys)
    out << c.vocab.name(static_cast<int>(k >> 32)) << '\t'
        << c.vocab.name(static_cast<int>(static_cast<uint32_t>(k))) << '\t'
        << c.joint.at(k) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

CooccurrenceCounts load_counts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  size_t line_no = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "truncated counts file");
    ++line_no;
    return trim(line);
  };
  if (next() != "#cooc:1") throw ParseError(line_no, "missing '#cooc:1' header");
  CooccurrenceCounts c;
  {
    auto f = tokens(next());
    if (f.size() != 2 || f[0] != "#window") throw ParseError(line_no, "missing #window");
    c.window = std::stoi(std::string(f[1]));
  }
  auto f = tokens(next());
  if (f.size() != 2 || f[0] != "#unigrams") throw ParseError(line_no, "missing #unigrams");
  size_t nuni = std::stoull(std::string(f[1]));
  for (size_t i = 0; i < nuni; ++i) {
    auto u = tokens(next());
    if (u.size() != 2) throw ParseError(line_no, "bad unigram row");
    c.vocab.intern(u[0]);
    c.unigram.push_back(std::stoull(std::string(u[1])));
    c.out_total.push_back(0);
    c.total_unigrams += c.unigram.back();
  }
  f = tokens(next());
  if (f.size() != 2 || f[0] != "#joints") throw ParseError(line_no, "missing #joints");
  size_t njoint = std::stoull(std::string(f[1]));
  for (size_t i = 0; i < njoint; ++i) {
    auto j = tokens(next());
    if (j.size() != 3) throw ParseError(line_no, "bad joint row");
    int a = c.vocab.find(j[0]), b = c.vocab.find(j[1]);
    if (a < 0 || b < 0) throw ParseError(line_no, "joint row names unknown unigram");
    uint64_t cnt = std::stoull(std::string(j[2]));
    c.joint[pair_key(a, b)] += cnt;
    c.out_total[static_cast<size_t>(a)] += cnt;
    c.total_joint += cnt;
  }
  return c;
}

}  // namespace sgnn
