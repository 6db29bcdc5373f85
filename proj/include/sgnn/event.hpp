#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgnn {

// Placeholder token for absent arguments; maps to the zero vector downstream.
inline constexpr const char* kAbsent = "-";

// Grammatical relation of the verb to the chain protagonist.
enum class Dep { Subj, Obj, Prep };

inline const char* dep_name(Dep d) {
  switch (d) {
    case Dep::Subj: return "subj";
    case Dep::Obj: return "obj";
    case Dep::Prep: return "prep";
  }
  return "?";
}

inline std::optional<Dep> dep_from(std::string_view s) {
  if (s == "subj") return Dep::Subj;
  if (s == "obj") return Dep::Obj;
  if (s == "prep") return Dep::Prep;
  return std::nullopt;
}

// A predicate verb with up to three argument head words. Arguments hold the
// literal "-" token when absent.
struct Event {
  std::string verb;
  Dep dep = Dep::Subj;
  std::array<std::string, 3> args{kAbsent, kAbsent, kAbsent};

  // Abstract (verb, relation) form, e.g. "eats/subj"; the graph node key.
  std::string predicate_gr() const { return verb + "/" + dep_name(dep); }

  bool operator==(const Event&) const = default;
};

// A protagonist plus the ordered events it participates in.
struct Chain {
  std::string protagonist;
  std::vector<Event> events;
};

// One multiple-choice question: n context events, k candidates, one gold.
struct Instance {
  std::vector<Event> context;
  std::vector<Event> candidates;
  int gold = 0;
  // -1 when unknown; 0/1 when the corpus generator flagged the instance.
  int confounded = -1;
};

}  // namespace sgnn
