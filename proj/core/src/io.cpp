#include "tnt/io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "tnt/errors.hpp"

namespace tnt {

namespace {

using json = nlohmann::json;

constexpr std::string_view magic = "TNTZ1";

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
}

void append_doubles(std::string& out, std::span<const double> values) {
    for (double d : values) {
        const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(d));
        char buf[8];
        std::memcpy(buf, &bits, 8);
        out.append(buf, 8);
    }
}

std::vector<double> parse_doubles(std::string_view bytes) {
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, bytes.data() + 8 * i, 8);
        out[i] = std::bit_cast<double>(to_le(bits));
    }
    return out;
}

std::uint32_t checksum(std::string_view bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
    std::size_t left = bytes.size();
    while (left > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
        crc = crc32(crc, p, chunk);
        p += chunk;
        left -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

json describe(const TnTensor& t, std::string& payload) {
    json h;
    h["kind"] = "tensor";
    h["ndim"] = t.ndim();
    h["batch"] = t.batched() ? json(t.batch_count()) : json(nullptr);
    h["shape"] = t.shape();
    h["ranks"] = t.ranks();
    json nodes = json::array();
    for (const auto& node : t.nodes()) {
        json n;
        n["kind"] = node.is_tt() ? "tt" : "cp";
        n["core_shape"] = node.core().shape();
        n["factor_shape"] = node.has_factor() ? json(node.factor().shape()) : json(nullptr);
        nodes.push_back(std::move(n));
        append_doubles(payload, node.core().data());
        if (node.has_factor()) append_doubles(payload, node.factor().data());
    }
    h["nodes"] = std::move(nodes);
    return h;
}

json describe(const TTMatrix& a, std::string& payload) {
    json h;
    h["kind"] = "tt_matrix";
    h["ndim"] = a.ndim();
    h["row_dims"] = a.row_dims();
    h["col_dims"] = a.col_dims();
    h["ranks"] = a.ranks();
    json cores = json::array();
    for (const auto& c : a.cores()) {
        cores.push_back(c.shape());
        append_doubles(payload, c.data());
    }
    h["cores"] = std::move(cores);
    return h;
}

json describe(const CPMatrix& a, std::string& payload) {
    json h;
    h["kind"] = "cp_matrix";
    h["ndim"] = a.ndim();
    h["row_dims"] = a.row_dims();
    h["col_dims"] = a.col_dims();
    h["rank"] = a.rank();
    json factors = json::array();
    for (const auto& f : a.factors()) {
        factors.push_back(f.shape());
        append_doubles(payload, f.data());
    }
    h["factors"] = std::move(factors);
    return h;
}

// Sequential reader over the payload; sizes were validated up front.
class PayloadReader {
public:
    explicit PayloadReader(std::vector<double> values) : values_(std::move(values)) {}

    DenseTensor take(const Shape& shape) {
        const auto n = static_cast<std::size_t>(shape_numel(shape));
        std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(pos_),
                              values_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return DenseTensor(shape, std::move(v));
    }

private:
    std::vector<double> values_;
    std::size_t pos_ = 0;
};

Shape shape_of(const json& j) {
    Shape s = j.get<Shape>();
    for (Index d : s)
        if (d < 0) throw FormatError("container declares a negative size");
    return s;
}

std::uint64_t declared_doubles(const json& h) {
    std::uint64_t total = 0;
    const std::string kind = h.at("kind").get<std::string>();
    if (kind == "tensor") {
        for (const auto& n : h.at("nodes")) {
            total += static_cast<std::uint64_t>(shape_numel(shape_of(n.at("core_shape"))));
            if (!n.at("factor_shape").is_null()) total += static_cast<std::uint64_t>(shape_numel(shape_of(n.at("factor_shape"))));
        }
    } else if (kind == "tt_matrix") {
        for (const auto& c : h.at("cores")) total += static_cast<std::uint64_t>(shape_numel(shape_of(c)));
    } else if (kind == "cp_matrix") {
        for (const auto& f : h.at("factors")) total += static_cast<std::uint64_t>(shape_numel(shape_of(f)));
    } else {
        throw FormatError("unknown container object kind '" + kind + "'");
    }
    return total;
}

Container build(const json& h, PayloadReader& reader) {
    const std::string kind = h.at("kind").get<std::string>();
    if (kind == "tensor") {
        const bool batched = !h.at("batch").is_null();
        std::vector<ModeNode> nodes;
        for (const auto& n : h.at("nodes")) {
            DenseTensor core = reader.take(shape_of(n.at("core_shape")));
            const std::string nk = n.at("kind").get<std::string>();
            ModeNode node = nk == "tt" ? (batched ? ModeNode::tt_batched(std::move(core)) : ModeNode::tt(std::move(core)))
                          : nk == "cp" ? (batched ? ModeNode::cp_batched(std::move(core)) : ModeNode::cp(std::move(core)))
                                       : throw FormatError("unknown node kind '" + nk + "'");
            if (!n.at("factor_shape").is_null()) node = node.with_factor(reader.take(shape_of(n.at("factor_shape"))));
            nodes.push_back(std::move(node));
        }
        return TnTensor(std::move(nodes));
    }
    if (kind == "tt_matrix") {
        std::vector<DenseTensor> cores;
        for (const auto& c : h.at("cores")) cores.push_back(reader.take(shape_of(c)));
        return TTMatrix(std::move(cores));
    }
    std::vector<DenseTensor> factors;
    for (const auto& f : h.at("factors")) factors.push_back(reader.take(shape_of(f)));
    return CPMatrix(std::move(factors), shape_of(h.at("row_dims")), shape_of(h.at("col_dims")));
}

struct Parsed {
    json header;
    std::string_view header_text;
    std::string_view payload;
};

Parsed split(std::string_view bytes) {
    if (bytes.size() < magic.size() || bytes.substr(0, magic.size()) != magic) {
        throw BadMagicError("not a container file (bad magic)");
    }
    if (bytes.size() < magic.size() + 8) throw ChecksumError("container is truncated before the header");
    std::uint64_t len = 0;
    std::memcpy(&len, bytes.data() + magic.size(), 8);
    len = to_le(len);
    const std::size_t start = magic.size() + 8;
    if (len > bytes.size() - start) throw ChecksumError("container is truncated inside the header");
    Parsed p;
    p.header_text = bytes.substr(start, len);
    p.payload = bytes.substr(start + len);
    try {
        p.header = json::parse(p.header_text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("container header is not valid JSON: ") + e.what());
    }
    return p;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string to_bytes(const Container& object) {
    std::string payload;
    json h = std::visit([&](const auto& o) { return describe(o, payload); }, object);
    h["payload_bytes"] = payload.size();
    h["crc32"] = checksum(payload);
    const std::string text = h.dump();
    std::string out(magic);
    const std::uint64_t len = to_le(text.size());
    char buf[8];
    std::memcpy(buf, &len, 8);
    out.append(buf, 8);
    out += text;
    out += payload;
    return out;
}

Container from_bytes(std::string_view bytes) {
    const Parsed p = split(bytes);
    try {
        const auto crc = p.header.at("crc32").get<std::uint32_t>();
        if (checksum(p.payload) != crc) throw ChecksumError("payload checksum mismatch (corrupt or truncated file)");
        const auto declared = p.header.at("payload_bytes").get<std::uint64_t>();
        const std::uint64_t needed = 8 * declared_doubles(p.header);
        if (declared != p.payload.size() || needed != p.payload.size()) {
            throw SizeMismatchError("declared sizes need " + std::to_string(needed) + " payload bytes, header says " +
                                    std::to_string(declared) + ", file has " + std::to_string(p.payload.size()));
        }
        PayloadReader reader(parse_doubles(p.payload));
        return build(p.header, reader);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed container header: ") + e.what());
    }
}

void save(const Container& object, const std::filesystem::path& path) { write_file(path, to_bytes(object)); }

Container load(const std::filesystem::path& path) { return from_bytes(read_file(path)); }

TnTensor load_tensor(const std::filesystem::path& path) {
    Container c = load(path);
    if (auto* t = std::get_if<TnTensor>(&c)) return std::move(*t);
    throw FormatError("'" + path.string() + "' does not hold a tensor");
}

std::string read_header(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    return std::string(split(bytes).header_text);
}

void write_dense(const DenseTensor& x, const std::filesystem::path& path) {
    std::string bytes;
    bytes.reserve(static_cast<std::size_t>(x.numel()) * 8);
    append_doubles(bytes, x.data());
    write_file(path, bytes);
}

DenseTensor read_dense(const std::filesystem::path& path, const Shape& shape) {
    const std::string bytes = read_file(path);
    const auto expected = static_cast<std::uint64_t>(shape_numel(shape)) * 8;
    if (bytes.size() != expected) {
        throw SizeMismatchError("'" + path.string() + "' has " + std::to_string(bytes.size()) + " bytes, shape " +
                                "needs " + std::to_string(expected));
    }
    return DenseTensor(shape, parse_doubles(bytes));
}

}  // namespace tnt
