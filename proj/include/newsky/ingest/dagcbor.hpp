#pragma once

// Minimal DAG-CBOR / CARv1 support for repository commit frames.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace newsky::ingest::dagcbor {

using Bytes = std::vector<std::uint8_t>;

// CBOR tag carrying a CID link.
inline constexpr std::uint8_t kCidTag = 42;

/// Unsigned LEB128 varint. Advances `pos`; throws DecodeError on truncation.
std::uint64_t read_uvarint(std::span<const std::uint8_t> data, std::size_t& pos);
void write_uvarint(std::uint64_t value, Bytes& out);

/// Size in bytes of the first CBOR data item in `data`.
std::size_t item_length(std::span<const std::uint8_t> data);

/// Decodes one CBOR item, keeping tag 42 as the binary subtype.
nlohmann::json decode(std::span<const std::uint8_t> data);
Bytes encode(const nlohmann::json& value);

/// Raw CID bytes (no multibase prefix) from a decoded tag-42 link.
std::string cid_key(const nlohmann::json& link);
/// Wraps raw CID bytes as a tag-42 link value.
nlohmann::json make_link(std::span<const std::uint8_t> cid);

/// CIDv1, dag-cbor codec, sha2-256 multihash.
Bytes make_cid(std::span<const std::uint8_t> sha256_digest);

struct CarFile {
    std::vector<std::string> roots;           // raw CID bytes
    std::map<std::string, Bytes> blocks;      // raw CID bytes -> block data
};

CarFile parse_car(std::span<const std::uint8_t> data);
Bytes write_car(const CarFile& car);

}  // namespace newsky::ingest::dagcbor
