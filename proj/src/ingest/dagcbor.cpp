#include "newsky/ingest/dagcbor.hpp"

#include "newsky/ingest/event.hpp"

namespace newsky::ingest::dagcbor {

namespace {

constexpr int kMaxDepth = 64;

std::uint64_t read_argument(std::span<const std::uint8_t> data, std::size_t& pos,
                            std::uint8_t info) {
    if (info < 24) return info;
    std::size_t width = 0;
    switch (info) {
        case 24: width = 1; break;
        case 25: width = 2; break;
        case 26: width = 4; break;
        case 27: width = 8; break;
        default: throw DecodeError("cbor: unsupported additional info " + std::to_string(info));
    }
    if (pos + width > data.size()) throw DecodeError("cbor: truncated argument");
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < width; ++i) value = (value << 8) | data[pos + i];
    pos += width;
    return value;
}

void skip_item(std::span<const std::uint8_t> data, std::size_t& pos, int depth) {
    if (depth > kMaxDepth) throw DecodeError("cbor: nesting too deep");
    if (pos >= data.size()) throw DecodeError("cbor: truncated item");
    const std::uint8_t initial = data[pos++];
    const std::uint8_t major = initial >> 5;
    const std::uint8_t info = initial & 0x1f;
    if (info == 31) throw DecodeError("cbor: indefinite lengths are not valid dag-cbor");
    const std::uint64_t arg = read_argument(data, pos, info);
    switch (major) {
        case 0:
        case 1: break;
        case 2:
        case 3:
            if (arg > data.size() - pos) throw DecodeError("cbor: truncated string");
            pos += arg;
            break;
        case 4:
            for (std::uint64_t i = 0; i < arg; ++i) skip_item(data, pos, depth + 1);
            break;
        case 5:
            for (std::uint64_t i = 0; i < arg; ++i) {
                skip_item(data, pos, depth + 1);
                skip_item(data, pos, depth + 1);
            }
            break;
        case 6: skip_item(data, pos, depth + 1); break;
        case 7: break;
    }
}

std::size_t cid_length(std::span<const std::uint8_t> data, std::size_t pos) {
    const std::size_t start = pos;
    if (data.size() - pos >= 2 && data[pos] == 0x12 && data[pos + 1] == 0x20) return 34;
    read_uvarint(data, pos);  // version
    read_uvarint(data, pos);  // codec
    read_uvarint(data, pos);  // multihash code
    const auto digest = read_uvarint(data, pos);
    if (digest > data.size() - pos) throw DecodeError("car: truncated cid");
    return pos + digest - start;
}

}  // namespace

std::uint64_t read_uvarint(std::span<const std::uint8_t> data, std::size_t& pos) {
    std::uint64_t value = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        if (pos >= data.size()) throw DecodeError("varint: truncated");
        const std::uint8_t b = data[pos++];
        value |= static_cast<std::uint64_t>(b & 0x7f) << shift;
        if ((b & 0x80) == 0) return value;
    }
    throw DecodeError("varint: too long");
}

void write_uvarint(std::uint64_t value, Bytes& out) {
    while (value >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(value | 0x80));
        value >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(value));
}

std::size_t item_length(std::span<const std::uint8_t> data) {
    std::size_t pos = 0;
    skip_item(data, pos, 0);
    return pos;
}

nlohmann::json decode(std::span<const std::uint8_t> data) {
    try {
        return nlohmann::json::from_cbor(data.begin(), data.end(), true, true,
                                         nlohmann::json::cbor_tag_handler_t::store);
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("cbor: ") + e.what());
    }
}

Bytes encode(const nlohmann::json& value) { return nlohmann::json::to_cbor(value); }

std::string cid_key(const nlohmann::json& link) {
    if (!link.is_binary()) throw DecodeError("cid link is not a byte string");
    const auto& bin = link.get_binary();
    if (!bin.has_subtype() || bin.subtype() != kCidTag) throw DecodeError("cid link without tag 42");
    if (bin.empty() || bin[0] != 0x00) throw DecodeError("cid link without identity multibase prefix");
    return std::string(bin.begin() + 1, bin.end());
}

nlohmann::json make_link(std::span<const std::uint8_t> cid) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(cid.size() + 1);
    bytes.push_back(0x00);
    bytes.insert(bytes.end(), cid.begin(), cid.end());
    return nlohmann::json::binary(std::move(bytes), kCidTag);
}

Bytes make_cid(std::span<const std::uint8_t> sha256_digest) {
    Bytes cid;
    write_uvarint(1, cid);     // CIDv1
    write_uvarint(0x71, cid);  // dag-cbor
    write_uvarint(0x12, cid);  // sha2-256
    write_uvarint(sha256_digest.size(), cid);
    cid.insert(cid.end(), sha256_digest.begin(), sha256_digest.end());
    return cid;
}

CarFile parse_car(std::span<const std::uint8_t> data) {
    std::size_t pos = 0;
    const auto header_len = read_uvarint(data, pos);
    if (header_len > data.size() - pos) throw DecodeError("car: truncated header");
    const auto header = decode(data.subspan(pos, header_len));
    pos += header_len;
    if (!header.is_object() || header.value("version", 0) != 1) {
        throw DecodeError("car: unsupported header");
    }
    CarFile car;
    if (header.contains("roots") && header["roots"].is_array()) {
        for (const auto& root : header["roots"]) car.roots.push_back(cid_key(root));
    }
    while (pos < data.size()) {
        const auto section_len = read_uvarint(data, pos);
        if (section_len > data.size() - pos) throw DecodeError("car: truncated block");
        const auto section = data.subspan(pos, section_len);
        const auto cid_len = cid_length(section, 0);
        if (cid_len > section.size()) throw DecodeError("car: cid overruns block");
        car.blocks.emplace(std::string(section.begin(), section.begin() + cid_len),
                           Bytes(section.begin() + cid_len, section.end()));
        pos += section_len;
    }
    return car;
}

Bytes write_car(const CarFile& car) {
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& root : car.roots) {
        roots.push_back(make_link(std::span(reinterpret_cast<const std::uint8_t*>(root.data()),
                                            root.size())));
    }
    const auto header = encode(nlohmann::json{{"roots", roots}, {"version", 1}});
    Bytes out;
    write_uvarint(header.size(), out);
    out.insert(out.end(), header.begin(), header.end());
    for (const auto& [cid, block] : car.blocks) {
        write_uvarint(cid.size() + block.size(), out);
        out.insert(out.end(), cid.begin(), cid.end());
        out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

}  // namespace newsky::ingest::dagcbor
