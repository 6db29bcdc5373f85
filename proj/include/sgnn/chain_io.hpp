#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgnn/event.hpp"

namespace sgnn {

// Chain files: UTF-8 text, header "#fmt:1", one chain per line:
//   protagonist | verb/dep a0 a1 a2 | verb/dep a0 a1 a2 | ...
// Instance files: header "#fmt:1", one instance per line:
//   CTX <n events> CANDS <k events> GOLD <index> [CONF <0|1>]
// where each event is four whitespace-separated fields. The optional CONF
// field carries the generator's confound flag.

std::vector<Chain> parse_chains(std::istream& in);
void serialize_chains(const std::vector<Chain>& chains, std::ostream& out);

std::vector<Instance> parse_instances(std::istream& in);
void serialize_instances(const std::vector<Instance>& instances, std::ostream& out);

// Per-chain generator diagnostics (sidecar to a synthetic chain file).
// Text format: header "#meta:1", then one line per chain:
//   <script_id> <conf 0|1> <planted verb/dep a0 a1 a2, or "- - - -">
struct ChainMeta {
  int script = -1;
  bool confounded = false;
  std::optional<Event> planted;  // distractor planted into the final window
};

std::vector<ChainMeta> parse_meta(std::istream& in);
void serialize_meta(const std::vector<ChainMeta>& meta, std::ostream& out);

// File helpers (throw IoError on failure).
std::vector<Chain> load_chains(const std::string& path);
void save_chains(const std::vector<Chain>& chains, const std::string& path);
std::vector<Instance> load_instances(const std::string& path);
void save_instances(const std::vector<Instance>& instances, const std::string& path);
std::vector<ChainMeta> load_meta(const std::string& path);
void save_meta(const std::vector<ChainMeta>& meta, const std::string& path);

}  // namespace sgnn
