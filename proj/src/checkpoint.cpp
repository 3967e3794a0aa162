#include "cpglab/checkpoint.hpp"
#include "cpglab/util.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cpglab::ad {

namespace {

constexpr char kMagic[8] = {'C', 'P', 'G', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint64_t get_u64(std::string_view in, size_t& pos) {
    if (pos + 8 > in.size()) throw DataError("checkpoint: truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<uint64_t>(static_cast<unsigned char>(in[pos + static_cast<size_t>(i)])) << (8 * i);
    pos += 8;
    return v;
}

void put_f64(std::string& out, double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
}

double get_f64(std::string_view in, size_t& pos) {
    uint64_t bits = get_u64(in, pos);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

}  // namespace

std::string save_checkpoint(const std::map<std::string, TensorPtr>& tensors,
                            const std::string& metadata) {
    std::string out(kMagic, sizeof(kMagic));
    put_u64(out, metadata.size());
    out += metadata;
    put_u64(out, tensors.size());
    for (const auto& [name, t] : tensors) {  // std::map: deterministic order
        put_u64(out, name.size());
        out += name;
        put_u64(out, t->shape.size());
        for (size_t d : t->shape) put_u64(out, d);
        for (double v : t->value) put_f64(out, v);
    }
    return out;
}

Checkpoint load_checkpoint(std::string_view bytes) {
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw DataError("checkpoint: bad magic/version");
    size_t pos = sizeof(kMagic);
    Checkpoint ck;
    uint64_t meta_len = get_u64(bytes, pos);
    if (pos + meta_len > bytes.size()) throw DataError("checkpoint: truncated");
    ck.metadata = std::string(bytes.substr(pos, meta_len));
    pos += meta_len;
    uint64_t count = get_u64(bytes, pos);
    for (uint64_t i = 0; i < count; ++i) {
        uint64_t name_len = get_u64(bytes, pos);
        if (pos + name_len > bytes.size()) throw DataError("checkpoint: truncated");
        std::string name(bytes.substr(pos, name_len));
        pos += name_len;
        uint64_t ndim = get_u64(bytes, pos);
        std::vector<size_t> shape;
        for (uint64_t d = 0; d < ndim; ++d) shape.push_back(static_cast<size_t>(get_u64(bytes, pos)));
        auto t = make_tensor(shape);
        for (size_t v = 0; v < t->size(); ++v) t->value[v] = get_f64(bytes, pos);
        ck.tensors[name] = std::move(t);
    }
    return ck;
}

void write_checkpoint_file(const std::string& path, const std::map<std::string, TensorPtr>& tensors,
                           const std::string& metadata) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open for writing");
    std::string bytes = save_checkpoint(tensors, metadata);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint read_checkpoint_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open");
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return load_checkpoint(bytes);
}

}  // namespace cpglab::ad
