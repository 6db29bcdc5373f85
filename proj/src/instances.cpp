#include "sgnn/instances.hpp"

#include <algorithm>

#include "sgnn/common.hpp"
#include "sgnn/rng.hpp"

namespace sgnn {

namespace {

// Frequency-proportional predicate-GR sampler with uniform argument fill.
struct EventPool {
  Vocab pgrs;
  std::vector<uint64_t> freq_cum;                             // cumulative occurrence counts
  std::vector<std::vector<std::array<std::string, 3>>> args;  // distinct tuples per pgr

  explicit EventPool(const std::vector<Chain>& chains) {
    std::vector<uint64_t> freq;
    for (const auto& c : chains)
      for (const auto& e : c.events) {
        int id = pgrs.intern(e.predicate_gr());
        if (id == static_cast<int>(freq.size())) {
          freq.push_back(0);
          args.emplace_back();
        }
        ++freq[id];
        auto& tuples = args[id];
        if (std::find(tuples.begin(), tuples.end(), e.args) == tuples.end())
          tuples.push_back(e.args);
      }
    freq_cum.resize(freq.size());
    uint64_t run = 0;
    for (size_t i = 0; i < freq.size(); ++i) freq_cum[i] = (run += freq[i]);
  }

  Event sample(Rng& rng) const {
    uint64_t r = rng.index(freq_cum.back());
    size_t id = static_cast<size_t>(
        std::upper_bound(freq_cum.begin(), freq_cum.end(), r) - freq_cum.begin());
    const auto& tuples = args[id];
    Event e;
    const std::string& pgr = pgrs.name(static_cast<int>(id));
    size_t slash = pgr.rfind('/');
    e.verb = pgr.substr(0, slash);
    e.dep = *dep_from(pgr.substr(slash + 1));
    e.args = tuples[rng.index(tuples.size())];
    return e;
  }
};

}  // namespace

InstanceBuild make_instances(const std::vector<Chain>& chains, const InstanceOptions& opt) {
  if (opt.n < 1 || opt.k < 2) throw ConfigError("make_instances: need n >= 1 and k >= 2");
  if (opt.meta && opt.meta->size() != chains.size())
    throw ConfigError("make_instances: meta must parallel chains");

  EventPool pool(chains);
  Rng rng(splitmix64(opt.seed ^ 0x494e5354ULL));
  InstanceBuild out;
  const size_t n = static_cast<size_t>(opt.n);

  for (size_t ci = 0; ci < chains.size(); ++ci) {
    const auto& events = chains[ci].events;
    if (events.size() < n + 1) {
      ++out.skipped_short;
      continue;
    }
    const ChainMeta* meta = opt.meta ? &(*opt.meta)[ci] : nullptr;
    for (size_t w = 0; w + n < events.size(); ++w) {
      const Event& gold_event = events[w + n];
      bool last_window = w + n + 1 == events.size();
      bool confound = meta && meta->confounded && meta->planted && last_window &&
                      !(*meta->planted == gold_event);

      std::vector<Event> distractors;
      if (confound) distractors.push_back(*meta->planted);
      size_t attempts = 0;
      const size_t max_attempts = 200 * static_cast<size_t>(opt.k);
      while (distractors.size() < static_cast<size_t>(opt.k) - 1 && attempts < max_attempts) {
        ++attempts;
        Event cand = pool.sample(rng);
        if (cand == gold_event) continue;
        if (std::find(distractors.begin(), distractors.end(), cand) != distractors.end())
          continue;
        distractors.push_back(std::move(cand));
      }
      if (distractors.size() < static_cast<size_t>(opt.k) - 1) {
        ++out.skipped_pool;
        continue;
      }

      Instance inst;
      inst.context.assign(events.begin() + static_cast<ptrdiff_t>(w),
                          events.begin() + static_cast<ptrdiff_t>(w + n));
      inst.gold = static_cast<int>(rng.index(static_cast<uint64_t>(opt.k)));
      inst.candidates = std::move(distractors);
      inst.candidates.insert(inst.candidates.begin() + inst.gold, gold_event);
      if (opt.meta) inst.confounded = confound ? 1 : 0;
      out.instances.push_back(std::move(inst));
    }
  }
  return out;
}

}  // namespace sgnn
