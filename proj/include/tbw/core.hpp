#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tbw {

using VertexId = std::int32_t;
using Timestamp = std::int64_t;

enum class Role : std::uint8_t { User, Developer };

inline const char* role_name(Role r) { return r == Role::User ? "user" : "developer"; }

// One raw interaction record before cleaning: opaque participant keys, seconds since epoch.
struct RawEvent {
  std::string sender;
  std::string recipient;
  Timestamp ts = 0;
};

// One cleaned interaction between dense vertex ids, u = sender, v = recipient.
struct Event {
  VertexId u = 0;
  VertexId v = 0;
  Timestamp ts = 0;

  bool operator==(const Event&) const = default;
};

// Canonical cleaned event stream: sorted ascending by timestamp, no self-events,
// dense ids assigned in first-appearance order over the sorted stream.
struct TemporalEdgeList {
  std::vector<Event> events;
  std::vector<std::string> keys;  // dense id -> original key
  std::unordered_map<std::string, VertexId> key_to_id;

  VertexId vertex_count() const { return static_cast<VertexId>(keys.size()); }
};

// role per dense vertex id
using RoleTable = std::vector<Role>;

// Input is malformed in a way the caller may want to surface per line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Data violates a contract (missing role, empty input, NaN in training, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or parameter combination.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tbw
