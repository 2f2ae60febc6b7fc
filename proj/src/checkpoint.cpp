#include "scae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace scae {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'A', 'E'};
constexpr uint16_t kVersion = 1;

void put_u16(std::string& out, uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

struct Reader {
    const unsigned char* p;
    size_t n;
    size_t pos = 0;

    void need(size_t k, const char* what) {
        if (pos + k > n) throw ParseError(std::string("checkpoint truncated reading ") + what, pos);
    }
    uint16_t u16(const char* what) {
        need(2, what);
        uint16_t v = uint16_t(p[pos]) | uint16_t(p[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(p[pos + size_t(i)]) << (8 * i);
        pos += 4;
        return v;
    }
    uint8_t u8(const char* what) {
        need(1, what);
        return p[pos++];
    }
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
    std::string buf;
    buf.append(kMagic, 4);
    put_u16(buf, kVersion);
    put_u32(buf, uint32_t(tensors.size()));
    for (const auto& [name, t] : tensors) {
        put_u16(buf, uint16_t(name.size()));
        buf.append(name);
        buf.push_back(char(uint8_t(t.rank())));
        for (int e : t.shape()) put_u32(buf, uint32_t(e));
        for (float v : t.data()) {
            uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32(buf, bits);
        }
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(buf.data(), std::streamsize(buf.size()));
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Reader r{reinterpret_cast<const unsigned char*>(buf.data()), buf.size()};

    r.need(4, "magic");
    if (std::memcmp(buf.data(), kMagic, 4) != 0) throw ParseError("bad checkpoint magic", 0);
    r.pos = 4;
    const uint16_t version = r.u16("version");
    if (version != kVersion) throw ParseError("unsupported checkpoint version", 4);
    const uint32_t count = r.u32("tensor count");

    std::vector<NamedTensor> out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        const uint16_t name_len = r.u16("name length");
        r.need(name_len, "name");
        std::string name(reinterpret_cast<const char*>(r.p + r.pos), name_len);
        r.pos += name_len;
        const uint8_t rank = r.u8("rank");
        std::vector<int> shape(rank);
        int64_t numel = 1;
        for (uint8_t k = 0; k < rank; ++k) {
            shape[k] = int(r.u32("extent"));
            numel *= shape[k];
        }
        r.need(size_t(numel) * 4, "payload");
        std::vector<float> data(static_cast<size_t>(numel));
        for (int64_t k = 0; k < numel; ++k) {
            const uint32_t bits = r.u32("payload");
            std::memcpy(&data[size_t(k)], &bits, 4);
        }
        out.emplace_back(std::move(name), Tensor::from_data(std::move(shape), std::move(data)));
    }
    return out;
}

const Tensor& checkpoint_get(const std::vector<NamedTensor>& tensors, const std::string& name) {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw ContractError("checkpoint has no tensor named '" + name + "'");
}

bool checkpoint_has(const std::vector<NamedTensor>& tensors, const std::string& name) {
    for (const auto& [n, t] : tensors)
        if (n == name) return true;
    return false;
}

}  // namespace scae
