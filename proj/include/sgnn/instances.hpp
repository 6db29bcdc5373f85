#pragma once

#include <cstdint>
#include <vector>

#include "sgnn/chain_io.hpp"
#include "sgnn/event.hpp"

namespace sgnn {

// Candidate-sampling policy for distractors. FrequencyPgr (the default)
// draws a predicate-GR proportional to its corpus frequency, then fills
// arguments uniformly from the distinct argument tuples observed with that
// predicate-GR.
enum class SamplerPolicy { FrequencyPgr };

struct InstanceOptions {
  int n = 8;
  int k = 5;
  uint64_t seed = 1;
  SamplerPolicy sampler = SamplerPolicy::FrequencyPgr;
  // When set (parallel to chains), confounded chains have their planted
  // distractor forced into the candidate set of the final window, and every
  // emitted instance carries a confound flag.
  const std::vector<ChainMeta>* meta = nullptr;
};

struct InstanceBuild {
  std::vector<Instance> instances;
  size_t skipped_short = 0;  // chains shorter than n+1
  size_t skipped_pool = 0;   // windows without k-1 distinct distractors
};

// One instance per window of n consecutive events with a successor. The gold
// candidate is the true successor; distractors are sampled by the policy,
// pairwise distinct and distinct from the gold event; the gold position is
// uniform. Deterministic given (chains, options).
InstanceBuild make_instances(const std::vector<Chain>& chains, const InstanceOptions& opt);

}  // namespace sgnn
