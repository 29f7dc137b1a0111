#include "ersentinel/types.hpp"

#include <charconv>

namespace ersentinel {

std::string to_string(const NodeId& id) {
    return (id.role == Role::server ? "s" : "v") + std::to_string(id.index);
}

NodeId parse_node_id(const std::string& text) {
    if (text.size() < 2 || (text[0] != 's' && text[0] != 'v')) {
        throw DataError("bad node id '" + text + "'");
    }
    NodeId id;
    id.role = text[0] == 's' ? Role::server : Role::vm;
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw DataError("bad node id '" + text + "'");
    }
    id.index = value;
    return id;
}

}  // namespace ersentinel
