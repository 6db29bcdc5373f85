#pragma once

#include <cstdint>
#include <vector>

#include "sgnn/chain_io.hpp"
#include "sgnn/event.hpp"

namespace sgnn {

// Synthetic corpus with plantable graph-vs-chain structure.
//
// Each script is a ring of events with chord edges (+1/+2/+5 steps), so
// consecutive script positions form a densely connected component. Scripts
// share a pool of high-frequency "global" events: every event may hop to a
// random global with probability noise_rate, and designated exit positions
// follow their paired global with probability exit_follow. A confounded
// chain ends with a window of consecutive ring positions whose last event is
// an exit x: the corpus gives (x -> paired global E) a high bigram count,
// while the true successor D = x+1 is the event densely connected to the
// mid-window positions. The paired global is recorded as the planted
// distractor for that chain's final window.
struct SynthConfig {
  int num_scripts = 10;
  int events_per_script = 20;
  int num_chains = 1000;
  int chain_length = 9;
  double confound_rate = 0.0;  // probability a chain carries the planted pattern
  double noise_rate = 0.1;     // probability of an off-script hop per step
  uint64_t seed = 1;

  // Structure knobs (defaults tuned for the 10x20 corpus).
  int exits_per_script = 4;
  int num_global = 8;
  double exit_follow = 0.75;  // probability an exit is followed by its paired global

  void validate() const;
};

struct SynthCorpus {
  std::vector<Chain> chains;
  std::vector<ChainMeta> meta;  // parallel to chains
};

SynthCorpus generate_synthetic(const SynthConfig& cfg);

}  // namespace sgnn
