#include "ersentinel/encoding.hpp"

namespace ersentinel {

namespace {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_node(std::vector<std::uint8_t>& out, const NodeId& id) {
    put_u8(out, static_cast<std::uint8_t>(id.role));
    put_u32(out, id.index);
}

}  // namespace

std::vector<std::uint8_t> canonical_encode(const EncounterRecord& er) {
    std::vector<std::uint8_t> out;
    out.reserve(26 + er.entries.size() * 10);
    put_node(out, er.local_node);
    put_node(out, er.peer_node);
    put_u64(out, static_cast<std::uint64_t>(er.timestamp));
    put_u64(out, er.local_seq);
    put_u32(out, static_cast<std::uint32_t>(er.entries.size()));
    for (const auto& e : er.entries) {
        put_u64(out, e.message_id);
        put_u8(out, static_cast<std::uint8_t>(e.direction));
        put_u8(out, static_cast<std::uint8_t>(e.kind));
    }
    return out;
}

}  // namespace ersentinel
