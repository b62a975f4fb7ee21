#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tbw/core.hpp"

namespace tbw {

// Line-oriented text: delimiter-separated fields, comment lines skipped.
struct EventFormat {
  char delimiter = '\t';
  char comment = '#';
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  std::vector<RawEvent> events;
  std::vector<ParseIssue> issues;
};

// One RawEvent per well-formed line, in file order. Malformed lines are
// reported in `issues` and skipped; an empty source yields an empty list.
ParseResult parse_events(std::istream& source, const EventFormat& format = {});

using AliasMap = std::unordered_map<std::string, std::string>;
using RoleMap = std::unordered_map<std::string, Role>;

// "alias_key <tab> canonical_key" per line
AliasMap parse_alias_map(std::istream& source, const EventFormat& format = {});

// "key <tab> role" per line, role in {user, developer} case-insensitive
RoleMap parse_roles(std::istream& source, const EventFormat& format = {});

// Replaces sender/recipient keys by their canonical key when mapped.
std::vector<RawEvent> apply_alias_map(std::vector<RawEvent> events, const AliasMap& aliases);

// Drops self-events, sorts by timestamp (stable), assigns dense ids in
// first-appearance order over the sorted stream, resolves roles per id.
// Throws DataError when a surviving vertex has no role entry.
std::pair<TemporalEdgeList, RoleTable> clean_and_index(const std::vector<RawEvent>& events,
                                                       const RoleMap& roles);

// Canonical artifact round trip used by the CLI stages.
void write_edges(const TemporalEdgeList& edges, std::ostream& out);
void write_vertices(const TemporalEdgeList& edges, const RoleTable& roles, std::ostream& out);
std::pair<TemporalEdgeList, RoleTable> read_edges_and_vertices(std::istream& edges_in,
                                                               std::istream& vertices_in);

}  // namespace tbw
