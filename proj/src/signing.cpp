#include "ersentinel/signing.hpp"

#include <cstring>

#include "ersentinel/encoding.hpp"

namespace ersentinel {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int b) {
    return (x << b) | (x >> (64 - b));
}

inline std::uint64_t read_le64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

inline void sipround(std::uint64_t& v0, std::uint64_t& v1, std::uint64_t& v2,
                     std::uint64_t& v3) {
    v0 += v1;
    v1 = rotl(v1, 13);
    v1 ^= v0;
    v0 = rotl(v0, 32);
    v2 += v3;
    v3 = rotl(v3, 16);
    v3 ^= v2;
    v0 += v3;
    v3 = rotl(v3, 21);
    v3 ^= v0;
    v2 += v1;
    v1 = rotl(v1, 17);
    v1 ^= v2;
    v2 = rotl(v2, 32);
}

const char* hex_digits = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DataError("invalid hex digit in key or signature");
}

// splitmix64, used to expand the master seed into per-node keys.
std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t siphash24(const NodeKey& key, std::span<const std::uint8_t> data) {
    const std::uint64_t k0 = read_le64(key.bytes.data());
    const std::uint64_t k1 = read_le64(key.bytes.data() + 8);

    std::uint64_t v0 = 0x736f6d6570736575ULL ^ k0;
    std::uint64_t v1 = 0x646f72616e646f6dULL ^ k1;
    std::uint64_t v2 = 0x6c7967656e657261ULL ^ k0;
    std::uint64_t v3 = 0x7465646279746573ULL ^ k1;

    const std::size_t n = data.size();
    const std::size_t end = n - (n % 8);
    for (std::size_t i = 0; i < end; i += 8) {
        const std::uint64_t m = read_le64(data.data() + i);
        v3 ^= m;
        sipround(v0, v1, v2, v3);
        sipround(v0, v1, v2, v3);
        v0 ^= m;
    }

    std::uint64_t b = static_cast<std::uint64_t>(n & 0xff) << 56;
    for (std::size_t i = end; i < n; ++i) {
        b |= static_cast<std::uint64_t>(data[i]) << (8 * (i - end));
    }
    v3 ^= b;
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    v0 ^= b;

    v2 ^= 0xff;
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);

    return v0 ^ v1 ^ v2 ^ v3;
}

Signature sign(const NodeKey& key, const EncounterRecord& er) {
    const auto bytes = canonical_encode(er);
    const std::uint64_t h = siphash24(key, bytes);
    Signature sig;
    for (int i = 0; i < 8; ++i) sig.digest[i] = static_cast<std::uint8_t>(h >> (8 * i));
    return sig;
}

bool verify(const NodeKey& key, const EncounterRecord& er, const Signature& sig) {
    return sign(key, er) == sig;
}

std::optional<NodeKey> Keyring::find(const NodeId& node) const {
    auto it = keys_.find(node);
    if (it == keys_.end()) return std::nullopt;
    return it->second;
}

Keyring Keyring::derive(std::uint64_t master_seed, const std::vector<NodeId>& nodes) {
    Keyring ring;
    for (const auto& node : nodes) {
        std::uint64_t state = master_seed ^ (0xa5a5a5a5a5a5a5a5ULL +
                                             (static_cast<std::uint64_t>(node.index) << 8) +
                                             static_cast<std::uint64_t>(node.role));
        NodeKey key;
        const std::uint64_t lo = splitmix64(state);
        const std::uint64_t hi = splitmix64(state);
        for (int i = 0; i < 8; ++i) {
            key.bytes[i] = static_cast<std::uint8_t>(lo >> (8 * i));
            key.bytes[8 + i] = static_cast<std::uint8_t>(hi >> (8 * i));
        }
        ring.insert(node, key);
    }
    return ring;
}

std::string to_hex(const Signature& sig) {
    std::string out;
    out.reserve(16);
    for (auto b : sig.digest) {
        out.push_back(hex_digits[b >> 4]);
        out.push_back(hex_digits[b & 0xf]);
    }
    return out;
}

Signature signature_from_hex(const std::string& hex) {
    if (hex.size() != 16) throw DataError("signature hex must be 16 chars");
    Signature sig;
    for (int i = 0; i < 8; ++i) {
        sig.digest[i] = static_cast<std::uint8_t>(hex_value(hex[2 * i]) * 16 +
                                                  hex_value(hex[2 * i + 1]));
    }
    return sig;
}

std::string to_hex(const NodeKey& key) {
    std::string out;
    out.reserve(32);
    for (auto b : key.bytes) {
        out.push_back(hex_digits[b >> 4]);
        out.push_back(hex_digits[b & 0xf]);
    }
    return out;
}

NodeKey key_from_hex(const std::string& hex) {
    if (hex.size() != 32) throw DataError("node key hex must be 32 chars");
    NodeKey key;
    for (int i = 0; i < 16; ++i) {
        key.bytes[i] = static_cast<std::uint8_t>(hex_value(hex[2 * i]) * 16 +
                                                 hex_value(hex[2 * i + 1]));
    }
    return key;
}

}  // namespace ersentinel
