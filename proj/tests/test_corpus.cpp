#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "sgnn/chain_io.hpp"
#include "sgnn/common.hpp"
#include "sgnn/instances.hpp"
#include "sgnn/synth.hpp"

using namespace sgnn;

namespace {

std::vector<Chain> chains_of(const std::string& text) {
  std::istringstream in(text);
  return parse_chains(in);
}

std::string to_text(const std::vector<Chain>& chains) {
  std::ostringstream out;
  serialize_chains(chains, out);
  return out.str();
}

std::string instances_text(const std::vector<Instance>& instances) {
  std::ostringstream out;
  serialize_instances(instances, out);
  return out.str();
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("parse_chains reads the documented line format") {
  auto chains = chains_of("#fmt:1\ncustomer | walk/subj restaurant - - | order/subj food - -\n");
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].protagonist == "customer");
  REQUIRE(chains[0].events.size() == 2);
  CHECK(chains[0].events[0].verb == "walk");
  CHECK(chains[0].events[0].dep == Dep::Subj);
  CHECK(chains[0].events[0].args[0] == "restaurant");
  CHECK(chains[0].events[0].args[1] == "-");
  CHECK(chains[0].events[1].predicate_gr() == "order/subj");
}

TEST_CASE("unknown dep tag is a parse error carrying the line number") {
  try {
    chains_of("#fmt:1\nok | eat/subj food - -\nbad | walk/xyz there - -\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("empty file parses to an empty sequence") {
  CHECK(chains_of("").empty());
  CHECK(chains_of("#fmt:1\n").empty());
}

TEST_CASE("missing header is an error") {
  CHECK_THROWS_AS(chains_of("customer | walk/subj x - -\n"), ParseError);
}

TEST_CASE("malformed events are rejected") {
  CHECK_THROWS_AS(chains_of("#fmt:1\np | walk/subj a b\n"), ParseError);      // 3 fields
  CHECK_THROWS_AS(chains_of("#fmt:1\np | /subj a b c\n"), ParseError);        // empty verb
  CHECK_THROWS_AS(chains_of("#fmt:1\np q | walk/subj a b c\n"), ParseError);  // 2-token protagonist
  CHECK_THROWS_AS(chains_of("#fmt:1\nlonely\n"), ParseError);                 // no events
}

TEST_CASE("restaurant chain round-trips with the protagonist in object position for serve") {
  // walk, seat, read, order, serve, eat; the protagonist is the served party.
  std::string text =
      "#fmt:1\n"
      "customer | walk/subj restaurant - - | seat/subj - - - | read/subj menu - - | "
      "order/subj food - - | serve/obj waiter food - | eat/subj food fork -\n";
  auto chains = chains_of(text);
  REQUIRE(chains.size() == 1);
  REQUIRE(chains[0].events.size() == 6);
  CHECK(chains[0].events[4].verb == "serve");
  CHECK(chains[0].events[4].dep == Dep::Obj);
  CHECK(chains[0].events[4].predicate_gr() == "serve/obj");
  CHECK(to_text(chains) == text);
}

TEST_CASE("serialize(parse(x)) reproduces x up to whitespace normalization") {
  std::string messy =
      "#fmt:1\n"
      "p |  walk/subj   a  -  - |eat/obj - b -\n";
  std::string canon = to_text(chains_of(messy));
  CHECK(canon == "#fmt:1\np | walk/subj a - - | eat/obj - b -\n");
  // canonical text is a fixed point
  CHECK(to_text(chains_of(canon)) == canon);
}

TEST_CASE("synthetic corpora round-trip through the chain format") {
  SynthConfig cfg;
  cfg.num_chains = 200;
  cfg.confound_rate = 0.3;
  cfg.seed = 7;
  auto corpus = generate_synthetic(cfg);
  std::string text = to_text(corpus.chains);
  auto back = chains_of(text);
  REQUIRE(back.size() == corpus.chains.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].protagonist == corpus.chains[i].protagonist);
    CHECK(back[i].events == corpus.chains[i].events);
  }
}

TEST_CASE("meta files round-trip") {
  SynthConfig cfg;
  cfg.num_chains = 50;
  cfg.confound_rate = 0.5;
  auto corpus = generate_synthetic(cfg);
  std::ostringstream out;
  serialize_meta(corpus.meta, out);
  std::istringstream in(out.str());
  auto back = parse_meta(in);
  REQUIRE(back.size() == corpus.meta.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].script == corpus.meta[i].script);
    CHECK(back[i].confounded == corpus.meta[i].confounded);
    CHECK(back[i].planted.has_value() == corpus.meta[i].planted.has_value());
    if (back[i].planted) CHECK(*back[i].planted == *corpus.meta[i].planted);
  }
}

TEST_CASE("make_instances emits one window per successor position") {
  SynthConfig cfg;
  cfg.num_chains = 1;
  cfg.chain_length = 9;
  auto corpus = generate_synthetic(cfg);
  InstanceOptions opt;
  opt.n = 8;
  opt.k = 5;
  auto build = make_instances(corpus.chains, opt);
  REQUIRE(build.instances.size() == 1);
  CHECK(build.skipped_short == 0);
  const Instance& inst = build.instances[0];
  CHECK(inst.context.size() == 8);
  CHECK(inst.candidates.size() == 5);
  // gold candidate is the chain's 9th event
  CHECK(inst.candidates[static_cast<size_t>(inst.gold)] == corpus.chains[0].events[8]);
  // exactly one candidate equals the true successor
  int matches = 0;
  for (const auto& c : inst.candidates)
    if (c == corpus.chains[0].events[8]) ++matches;
  CHECK(matches == 1);
}

TEST_CASE("chains shorter than n+1 are skipped and counted") {
  SynthConfig cfg;
  cfg.num_chains = 3;
  cfg.chain_length = 7;
  auto corpus = generate_synthetic(cfg);
  InstanceOptions opt;
  auto build = make_instances(corpus.chains, opt);
  CHECK(build.instances.empty());
  CHECK(build.skipped_short == 3);
}

TEST_CASE("longer chains emit length-minus-n instances") {
  SynthConfig cfg;
  cfg.num_chains = 4;
  cfg.chain_length = 12;
  auto corpus = generate_synthetic(cfg);
  InstanceOptions opt;
  auto build = make_instances(corpus.chains, opt);
  CHECK(build.instances.size() == 4 * (12 - 8));
}

TEST_CASE("instance generation is deterministic") {
  SynthConfig cfg;
  cfg.num_chains = 1000;
  cfg.confound_rate = 0.4;
  cfg.seed = 11;
  auto corpus = generate_synthetic(cfg);
  InstanceOptions opt;
  opt.seed = 5;
  opt.meta = &corpus.meta;
  auto a = make_instances(corpus.chains, opt);
  auto b = make_instances(corpus.chains, opt);
  CHECK(instances_text(a.instances) == instances_text(b.instances));
}

TEST_CASE("gold positions are uniform within 2 percent") {
  SynthConfig cfg;
  cfg.num_chains = 12000;
  cfg.seed = 3;
  auto corpus = generate_synthetic(cfg);
  InstanceOptions opt;
  auto build = make_instances(corpus.chains, opt);
  REQUIRE(build.instances.size() > 10000);
  std::vector<size_t> by_pos(5, 0);
  for (const auto& inst : build.instances) {
    ++by_pos[static_cast<size_t>(inst.gold)];
    // exactly one candidate equals the gold event
    const Event& gold = inst.candidates[static_cast<size_t>(inst.gold)];
    CHECK(std::count(inst.candidates.begin(), inst.candidates.end(), gold) == 1);
  }
  for (size_t c : by_pos) {
    double frac = static_cast<double>(c) / static_cast<double>(build.instances.size());
    CHECK(frac > 0.18);
    CHECK(frac < 0.22);
  }
}

TEST_CASE("planted distractors land in flagged final windows") {
  SynthConfig cfg;
  cfg.num_chains = 500;
  cfg.confound_rate = 1.0;
  cfg.seed = 21;
  auto corpus = generate_synthetic(cfg);
  InstanceOptions opt;
  opt.meta = &corpus.meta;
  auto build = make_instances(corpus.chains, opt);
  REQUIRE(build.instances.size() == 500);
  for (size_t i = 0; i < build.instances.size(); ++i) {
    const Instance& inst = build.instances[i];
    CHECK(inst.confounded == 1);
    REQUIRE(corpus.meta[i].planted.has_value());
    CHECK(std::count(inst.candidates.begin(), inst.candidates.end(), *corpus.meta[i].planted) ==
          1);
  }
}

TEST_CASE("degenerate config keeps every chain inside one script") {
  SynthConfig cfg;
  cfg.num_scripts = 1;
  cfg.confound_rate = 0;
  cfg.noise_rate = 0;
  cfg.exits_per_script = 0;  // no exit hops either
  cfg.num_chains = 100;
  auto corpus = generate_synthetic(cfg);
  for (const auto& chain : corpus.chains)
    for (const auto& e : chain.events) CHECK(e.verb.substr(0, 2) == "v0");
}

TEST_CASE("generator is deterministic") {
  SynthConfig cfg;
  cfg.num_chains = 300;
  cfg.confound_rate = 0.5;
  cfg.seed = 99;
  auto a = generate_synthetic(cfg);
  auto b = generate_synthetic(cfg);
  CHECK(to_text(a.chains) == to_text(b.chains));
}

TEST_CASE("confound flags track confound_rate at one window per chain") {
  SynthConfig cfg;
  cfg.num_chains = 12000;
  cfg.chain_length = 9;  // exactly one instance per chain
  cfg.confound_rate = 0.5;
  cfg.seed = 17;
  auto corpus = generate_synthetic(cfg);
  InstanceOptions opt;
  opt.meta = &corpus.meta;
  auto build = make_instances(corpus.chains, opt);
  REQUIRE(build.instances.size() >= 10000);
  size_t flagged = 0;
  for (const auto& inst : build.instances)
    if (inst.confounded == 1) ++flagged;
  double frac = static_cast<double>(flagged) / static_cast<double>(build.instances.size());
  CHECK(frac > 0.47);
  CHECK(frac < 0.53);
}

TEST_CASE("instance files round-trip including confound flags") {
  SynthConfig cfg;
  cfg.num_chains = 60;
  cfg.confound_rate = 0.5;
  auto corpus = generate_synthetic(cfg);
  InstanceOptions opt;
  opt.meta = &corpus.meta;
  auto build = make_instances(corpus.chains, opt);
  std::string text = instances_text(build.instances);
  std::istringstream in(text);
  auto back = parse_instances(in);
  REQUIRE(back.size() == build.instances.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].context == build.instances[i].context);
    CHECK(back[i].candidates == build.instances[i].candidates);
    CHECK(back[i].gold == build.instances[i].gold);
    CHECK(back[i].confounded == build.instances[i].confounded);
  }
}

TEST_CASE("config validation rejects bad values") {
  SynthConfig cfg;
  cfg.num_chains = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg.num_chains = 1;
  cfg.confound_rate = 1.5;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  InstanceOptions opt;
  opt.k = 1;
  CHECK_THROWS_AS(make_instances({Chain{"p", {}}}, opt), ConfigError);
}

}  // TEST_SUITE
