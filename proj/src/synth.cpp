#include "sgnn/synth.hpp"

#include <algorithm>
#include <string>

#include "sgnn/common.hpp"
#include "sgnn/rng.hpp"

namespace sgnn {

void SynthConfig::validate() const {
  if (num_scripts < 1 || events_per_script < 1 || num_chains < 1 || chain_length < 1)
    throw ConfigError("synth: counts must be positive");
  if (confound_rate < 0 || confound_rate > 1 || noise_rate < 0 || noise_rate > 1 ||
      exit_follow < 0 || exit_follow > 1)
    throw ConfigError("synth: probabilities must lie in [0,1]");
  if (exits_per_script < 0 || num_global < 0)
    throw ConfigError("synth: exits_per_script and num_global must be >= 0");
  if ((noise_rate > 0 || (confound_rate > 0 && exits_per_script > 0)) && num_global < 1)
    throw ConfigError("synth: off-script hops need num_global >= 1");
}

namespace {

struct World {
  const SynthConfig& cfg;
  std::vector<int> steps;        // ring step sizes, distinct mod events_per_script
  std::vector<double> step_cum;  // cumulative step weights

  explicit World(const SynthConfig& c) : cfg(c) {
    const int e = c.events_per_script;
    const int wanted[3] = {1, 2, 5};
    const double w[3] = {0.5, 0.3, 0.2};
    double total = 0;
    for (int i = 0; i < 3; ++i) {
      int s = wanted[i] % e;
      if (s == 0 || std::find(steps.begin(), steps.end(), s) != steps.end()) continue;
      steps.push_back(s);
      total += w[i];
      step_cum.push_back(total);
    }
    if (steps.empty()) {  // degenerate single-event script: self-loop
      steps.push_back(0);
      step_cum.push_back(1.0);
    }
  }

  int ring_step(int pos, Rng& rng) const {
    double r = rng.real() * step_cum.back();
    size_t i = 0;
    while (i + 1 < step_cum.size() && r >= step_cum[i]) ++i;
    return (pos + steps[i]) % cfg.events_per_script;
  }

  bool is_exit(int pos) const {
    if (cfg.exits_per_script <= 0) return false;
    int spacing = std::max(1, cfg.events_per_script / cfg.exits_per_script);
    return pos % spacing == 0 && pos / spacing < cfg.exits_per_script;
  }

  int exit_position(int t) const {
    int spacing = std::max(1, cfg.events_per_script / cfg.exits_per_script);
    return (t * spacing) % cfg.events_per_script;
  }

  int paired_global(int script, int pos) const {
    int spacing = std::max(1, cfg.events_per_script / cfg.exits_per_script);
    int t = pos / spacing;
    return (script * cfg.exits_per_script + t) % cfg.num_global;
  }

  Event script_event(int script, int pos, Rng& rng) const {
    Event e;
    e.verb = "v" + std::to_string(script) + "_" + std::to_string(pos);
    e.dep = static_cast<Dep>(pos % 3);
    e.args[0] = "n" + std::to_string(script) + "_" + std::to_string(pos);
    e.args[1] = "m" + std::to_string(script) + "_" + std::to_string(rng.index(5));
    return e;
  }

  Event global_event(int j) const {
    Event e;
    e.verb = "g" + std::to_string(j);
    e.dep = Dep::Subj;
    e.args[0] = "gn" + std::to_string(j);
    return e;
  }
};

}  // namespace

SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  World world(cfg);
  Rng rng(splitmix64(cfg.seed ^ 0x53594e5448ULL));
  SynthCorpus corpus;
  corpus.chains.reserve(cfg.num_chains);
  corpus.meta.reserve(cfg.num_chains);

  const int len = cfg.chain_length;
  const int e_per = cfg.events_per_script;
  for (int ci = 0; ci < cfg.num_chains; ++ci) {
    Chain chain;
    chain.protagonist = "actor" + std::to_string(rng.index(40));
    ChainMeta meta;
    int script = static_cast<int>(rng.index(cfg.num_scripts));
    meta.script = script;
    bool confound = cfg.exits_per_script > 0 && rng.bernoulli(cfg.confound_rate);
    if (confound) {
      // Consecutive ring positions ending at an exit x, then the true
      // successor x+1. The paired global becomes the planted distractor.
      int x = world.exit_position(static_cast<int>(rng.index(cfg.exits_per_script)));
      int start = ((x - (len - 2)) % e_per + e_per) % e_per;
      for (int i = 0; i < len - 1; ++i)
        chain.events.push_back(world.script_event(script, (start + i) % e_per, rng));
      chain.events.push_back(world.script_event(script, (x + 1) % e_per, rng));
      meta.confounded = true;
      meta.planted = world.global_event(world.paired_global(script, x));
    } else {
      int pos = static_cast<int>(rng.index(e_per));
      chain.events.push_back(world.script_event(script, pos, rng));
      while (static_cast<int>(chain.events.size()) < len) {
        if (world.is_exit(pos) && cfg.num_global > 0 && rng.bernoulli(cfg.exit_follow)) {
          chain.events.push_back(world.global_event(world.paired_global(script, pos)));
        } else if (cfg.num_global > 0 && rng.bernoulli(cfg.noise_rate)) {
          chain.events.push_back(world.global_event(static_cast<int>(rng.index(cfg.num_global))));
        }
        if (static_cast<int>(chain.events.size()) >= len) break;
        pos = world.ring_step(pos, rng);
        chain.events.push_back(world.script_event(script, pos, rng));
      }
    }
    corpus.chains.push_back(std::move(chain));
    corpus.meta.push_back(std::move(meta));
  }
  return corpus;
}

}  // namespace sgnn
