#include "tbw/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>

namespace tbw {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::optional<Timestamp> parse_ts(const std::string& s) {
  Timestamp value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

ParseResult parse_events(std::istream& source, const EventFormat& format) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || is_blank(line) || line[0] == format.comment) continue;
    auto fields = split(line, format.delimiter);
    if (fields.size() != 3) {
      result.issues.push_back({line_no, "expected 3 fields, got " + std::to_string(fields.size())});
      continue;
    }
    if (fields[0].empty() || fields[1].empty()) {
      result.issues.push_back({line_no, "empty sender or recipient key"});
      continue;
    }
    auto ts = parse_ts(fields[2]);
    if (!ts || *ts < 0) {
      result.issues.push_back({line_no, "bad timestamp '" + fields[2] + "'"});
      continue;
    }
    result.events.push_back({std::move(fields[0]), std::move(fields[1]), *ts});
  }
  return result;
}

AliasMap parse_alias_map(std::istream& source, const EventFormat& format) {
  AliasMap aliases;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || is_blank(line) || line[0] == format.comment) continue;
    auto fields = split(line, format.delimiter);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(line_no, "alias line must be 'alias<delim>canonical'");
    }
    aliases[fields[0]] = fields[1];
  }
  return aliases;
}

RoleMap parse_roles(std::istream& source, const EventFormat& format) {
  RoleMap roles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || is_blank(line) || line[0] == format.comment) continue;
    auto fields = split(line, format.delimiter);
    if (fields.size() != 2 || fields[0].empty()) {
      throw ParseError(line_no, "role line must be 'key<delim>role'");
    }
    std::string role = fields[1];
    std::transform(role.begin(), role.end(), role.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (role == "user") {
      roles[fields[0]] = Role::User;
    } else if (role == "developer") {
      roles[fields[0]] = Role::Developer;
    } else {
      throw ParseError(line_no, "unknown role '" + fields[1] + "' (want user|developer)");
    }
  }
  return roles;
}

std::vector<RawEvent> apply_alias_map(std::vector<RawEvent> events, const AliasMap& aliases) {
  if (aliases.empty()) return events;
  for (auto& e : events) {
    if (auto it = aliases.find(e.sender); it != aliases.end()) e.sender = it->second;
    if (auto it = aliases.find(e.recipient); it != aliases.end()) e.recipient = it->second;
  }
  return events;
}

std::pair<TemporalEdgeList, RoleTable> clean_and_index(const std::vector<RawEvent>& events,
                                                       const RoleMap& roles) {
  std::vector<const RawEvent*> kept;
  kept.reserve(events.size());
  for (const auto& e : events) {
    if (e.sender != e.recipient) kept.push_back(&e);
  }
  // stable: events with equal timestamps keep input order
  std::stable_sort(kept.begin(), kept.end(),
                   [](const RawEvent* a, const RawEvent* b) { return a->ts < b->ts; });

  TemporalEdgeList out;
  RoleTable role_table;
  auto intern = [&](const std::string& key) -> VertexId {
    if (auto it = out.key_to_id.find(key); it != out.key_to_id.end()) return it->second;
    auto role_it = roles.find(key);
    if (role_it == roles.end()) {
      throw DataError("no role entry for vertex key '" + key + "'");
    }
    VertexId id = static_cast<VertexId>(out.keys.size());
    out.keys.push_back(key);
    out.key_to_id.emplace(key, id);
    role_table.push_back(role_it->second);
    return id;
  };
  out.events.reserve(kept.size());
  for (const RawEvent* e : kept) {
    VertexId u = intern(e->sender);
    VertexId v = intern(e->recipient);
    out.events.push_back({u, v, e->ts});
  }
  return {std::move(out), std::move(role_table)};
}

void write_edges(const TemporalEdgeList& edges, std::ostream& out) {
  for (const auto& e : edges.events) {
    out << e.u << '\t' << e.v << '\t' << e.ts << '\n';
  }
}

void write_vertices(const TemporalEdgeList& edges, const RoleTable& roles, std::ostream& out) {
  for (VertexId id = 0; id < edges.vertex_count(); ++id) {
    out << id << '\t' << edges.keys[id] << '\t' << role_name(roles[id]) << '\n';
  }
}

std::pair<TemporalEdgeList, RoleTable> read_edges_and_vertices(std::istream& edges_in,
                                                               std::istream& vertices_in) {
  TemporalEdgeList edges;
  RoleTable roles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(vertices_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError(line_no, "vertex line must be 'id<tab>key<tab>role'");
    VertexId id = static_cast<VertexId>(std::stol(fields[0]));
    if (id != static_cast<VertexId>(edges.keys.size())) {
      throw ParseError(line_no, "vertex ids must be dense and ascending");
    }
    edges.keys.push_back(fields[1]);
    edges.key_to_id.emplace(fields[1], id);
    if (fields[2] == "user") {
      roles.push_back(Role::User);
    } else if (fields[2] == "developer") {
      roles.push_back(Role::Developer);
    } else {
      throw ParseError(line_no, "unknown role '" + fields[2] + "'");
    }
  }
  line_no = 0;
  while (std::getline(edges_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError(line_no, "edge line must be 'u<tab>v<tab>ts'");
    Event e{static_cast<VertexId>(std::stol(fields[0])), static_cast<VertexId>(std::stol(fields[1])),
            static_cast<Timestamp>(std::stoll(fields[2]))};
    if (e.u < 0 || e.v < 0 || e.u >= edges.vertex_count() || e.v >= edges.vertex_count()) {
      throw ParseError(line_no, "edge endpoint out of range");
    }
    edges.events.push_back(e);
  }
  return {std::move(edges), std::move(roles)};
}

}  // namespace tbw
