#include "sgnn/chain_io.hpp"

#include <fstream>
#include <sstream>

#include "sgnn/common.hpp"

namespace sgnn {

namespace {

constexpr const char* kFmtHeader = "#fmt:1";
constexpr const char* kMetaHeader = "#meta:1";

// Parses "verb/dep"; the dep tag follows the last '/'.
Event parse_event_fields(std::string_view vd, std::string_view a0, std::string_view a1,
                         std::string_view a2, size_t line_no) {
  size_t slash = vd.rfind('/');
  if (slash == std::string_view::npos || slash == 0)
    throw ParseError(line_no, "expected verb/dep, got '" + std::string(vd) + "'");
  auto dep = dep_from(vd.substr(slash + 1));
  if (!dep)
    throw ParseError(line_no, "unknown dep tag '" + std::string(vd.substr(slash + 1)) + "'");
  Event e;
  e.verb = std::string(vd.substr(0, slash));
  e.dep = *dep;
  e.args = {std::string(a0), std::string(a1), std::string(a2)};
  for (const auto& a : e.args)
    if (a.empty()) throw ParseError(line_no, "empty argument field");
  return e;
}

void write_event(const Event& e, std::ostream& out) {
  out << e.verb << '/' << dep_name(e.dep) << ' ' << e.args[0] << ' ' << e.args[1] << ' '
      << e.args[2];
}

// Reads the version header. Returns false for an empty stream.
bool read_header(std::istream& in, const char* expected, size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (trim(line) != expected)
      throw ParseError(line_no, std::string("missing header '") + expected + "'");
    return true;
  }
  return false;
}

}  // namespace

std::vector<Chain> parse_chains(std::istream& in) {
  std::vector<Chain> chains;
  size_t line_no = 0;
  if (!read_header(in, kFmtHeader, line_no)) return chains;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto parts = split(sv, '|');
    if (parts.size() < 2) throw ParseError(line_no, "chain needs a protagonist and >=1 event");
    Chain c;
    auto prot = tokens(parts[0]);
    if (prot.size() != 1) throw ParseError(line_no, "protagonist must be a single token");
    c.protagonist = std::string(prot[0]);
    for (size_t i = 1; i < parts.size(); ++i) {
      auto f = tokens(parts[i]);
      if (f.size() != 4)
        throw ParseError(line_no, "event needs 4 fields, got " + std::to_string(f.size()));
      c.events.push_back(parse_event_fields(f[0], f[1], f[2], f[3], line_no));
    }
    chains.push_back(std::move(c));
  }
  return chains;
}

void serialize_chains(const std::vector<Chain>& chains, std::ostream& out) {
  out << kFmtHeader << '\n';
  for (const auto& c : chains) {
    out << c.protagonist;
    for (const auto& e : c.events) {
      out << " | ";
      write_event(e, out);
    }
    out << '\n';
  }
}

std::vector<Instance> parse_instances(std::istream& in) {
  std::vector<Instance> instances;
  size_t line_no = 0;
  if (!read_header(in, kFmtHeader, line_no)) return instances;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto t = tokens(sv);
    size_t p = 0;
    auto expect = [&](const char* kw) {
      if (p >= t.size() || t[p] != kw)
        throw ParseError(line_no, std::string("expected '") + kw + "'");
      ++p;
    };
    auto read_events = [&](const char* stop) {
      std::vector<Event> evs;
      while (p < t.size() && t[p] != stop) {
        if (p + 4 > t.size()) throw ParseError(line_no, "truncated event");
        evs.push_back(parse_event_fields(t[p], t[p + 1], t[p + 2], t[p + 3], line_no));
        p += 4;
      }
      return evs;
    };
    Instance inst;
    expect("CTX");
    inst.context = read_events("CANDS");
    expect("CANDS");
    inst.candidates = read_events("GOLD");
    expect("GOLD");
    if (p >= t.size()) throw ParseError(line_no, "missing gold index");
    inst.gold = std::stoi(std::string(t[p++]));
    if (p < t.size() && t[p] == "CONF") {
      ++p;
      if (p >= t.size()) throw ParseError(line_no, "missing CONF value");
      inst.confounded = std::stoi(std::string(t[p++]));
    }
    if (p != t.size()) throw ParseError(line_no, "trailing tokens");
    if (inst.context.empty() || inst.candidates.size() < 2)
      throw ParseError(line_no, "instance needs >=1 context and >=2 candidates");
    if (inst.gold < 0 || inst.gold >= static_cast<int>(inst.candidates.size()))
      throw ParseError(line_no, "gold index out of range");
    instances.push_back(std::move(inst));
  }
  return instances;
}

void serialize_instances(const std::vector<Instance>& instances, std::ostream& out) {
  out << kFmtHeader << '\n';
  for (const auto& inst : instances) {
    out << "CTX";
    for (const auto& e : inst.context) {
      out << ' ';
      write_event(e, out);
    }
    out << " CANDS";
    for (const auto& e : inst.candidates) {
      out << ' ';
      write_event(e, out);
    }
    out << " GOLD " << inst.gold;
    if (inst.confounded >= 0) out << " CONF " << inst.confounded;
    out << '\n';
  }
}

std::vector<ChainMeta> parse_meta(std::istream& in) {
  std::vector<ChainMeta> meta;
  size_t line_no = 0;
  if (!read_header(in, kMetaHeader, line_no)) return meta;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto t = tokens(sv);
    if (t.size() != 6) throw ParseError(line_no, "meta line needs 6 fields");
    ChainMeta m;
    m.script = std::stoi(std::string(t[0]));
    m.confounded = t[1] == "1";
    if (t[2] != "-") m.planted = parse_event_fields(t[2], t[3], t[4], t[5], line_no);
    meta.push_back(std::move(m));
  }
  return meta;
}

void serialize_meta(const std::vector<ChainMeta>& meta, std::ostream& out) {
  out << kMetaHeader << '\n';
  for (const auto& m : meta) {
    out << m.script << ' ' << (m.confounded ? 1 : 0) << ' ';
    if (m.planted)
      write_event(*m.planted, out);
    else
      out << "- - - -";
    out << '\n';
  }
}

namespace {

template <typename T, typename F>
T load_file(const std::string& path, F parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse(in);
}

template <typename T, typename F>
void save_file(const T& value, const std::string& path, F serialize) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  serialize(value, out);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

std::vector<Chain> load_chains(const std::string& path) {
  return load_file<std::vector<Chain>>(path, [](std::istream& in) { return parse_chains(in); });
}
void save_chains(const std::vector<Chain>& chains, const std::string& path) {
  save_file(chains, path, [](const auto& v, std::ostream& o) { serialize_chains(v, o); });
}
std::vector<Instance> load_instances(const std::string& path) {
  return load_file<std::vector<Instance>>(path,
                                          [](std::istream& in) { return parse_instances(in); });
}
void save_instances(const std::vector<Instance>& instances, const std::string& path) {
  save_file(instances, path, [](const auto& v, std::ostream& o) { serialize_instances(v, o); });
}
std::vector<ChainMeta> load_meta(const std::string& path) {
  return load_file<std::vector<ChainMeta>>(path, [](std::istream& in) { return parse_meta(in); });
}
void save_meta(const std::vector<ChainMeta>& meta, const std::string& path) {
  save_file(meta, path, [](const auto& v, std::ostream& o) { serialize_meta(v, o); });
}

std::string format_double(double v) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%.17g", v);
  // shortest representation that round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[64];
    snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    double back;
    sscanf(shorter, "%lf", &back);
    if (back == v) return shorter;
  }
  return buf;
}

}  // namespace sgnn
