#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ersentinel {

// Simulation clock: milliseconds since run start. Integer so ordering
// audits never hit float-equality issues.
using SimTime = std::int64_t;

constexpr SimTime seconds(double s) { return static_cast<SimTime>(s * 1000.0); }
constexpr double to_seconds(SimTime t) { return static_cast<double>(t) / 1000.0; }

enum class Role : std::uint8_t { server = 0, vm = 1 };

/// Node identity. `index` is unique across the whole scenario (servers
/// first, then VMs), so it alone orders and identifies nodes; `role` is
/// carried for reporting.
struct NodeId {
    std::uint32_t index = 0;
    Role role = Role::server;

    friend bool operator==(const NodeId& a, const NodeId& b) {
        return a.index == b.index && a.role == b.role;
    }
    friend bool operator!=(const NodeId& a, const NodeId& b) { return !(a == b); }
    friend bool operator<(const NodeId& a, const NodeId& b) {
        if (a.index != b.index) return a.index < b.index;
        return static_cast<int>(a.role) < static_cast<int>(b.role);
    }
};

/// Compact text form used in trace files: "s0".."s4" for servers,
/// "v5".."v54" for VMs (global index).
std::string to_string(const NodeId& id);
NodeId parse_node_id(const std::string& text);

struct Message {
    std::uint64_t id = 0;
    NodeId source;
    NodeId destination;
    SimTime created_at = 0;
    SimTime ttl = 0;

    SimTime expires_at() const { return created_at + ttl; }
};

enum class Direction : std::uint8_t { sent = 0, received = 1 };

// generated = the recording node originated the message; relayed = it
// handles the message as an intermediate (or final) hop.
enum class EntryKind : std::uint8_t { generated = 0, relayed = 1 };

struct MessageEntry {
    std::uint64_t message_id = 0;
    Direction direction = Direction::sent;
    EntryKind kind = EntryKind::relayed;

    friend bool operator==(const MessageEntry& a, const MessageEntry& b) {
        return a.message_id == b.message_id && a.direction == b.direction &&
               a.kind == b.kind;
    }
};

/// Scenario/config problems: bad field values, impossible topologies.
/// CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (unparseable trace lines, node-set mismatches).
/// CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ersentinel
