#include "scae/coder.hpp"

#include <algorithm>
#include <cmath>

#include "scae/prng.hpp"

namespace scae {

FreqTable FreqTable::from_symbols(std::span<const int32_t> symbols, int symbol_count) {
    if (symbol_count < 1) throw ContractError("FreqTable requires at least one symbol");
    std::vector<uint32_t> counts(size_t(symbol_count), 1u);  // add-one smoothing
    for (int32_t s : symbols) {
        if (s < 0 || s >= symbol_count)
            throw ContractError("symbol " + std::to_string(s) + " outside table range");
        ++counts[size_t(s)];
    }
    return from_counts(std::move(counts));
}

FreqTable FreqTable::from_counts(std::vector<uint32_t> counts) {
    if (counts.empty()) throw ContractError("FreqTable requires at least one symbol");
    for (uint32_t c : counts)
        if (c == 0) throw ContractError("FreqTable counts must be >= 1");
    FreqTable t;
    t.counts_ = std::move(counts);
    t.normalize();
    return t;
}

// Scale raw counts to sum exactly kCodingTotal while keeping every entry >= 1.
void FreqTable::normalize() {
    const size_t k = counts_.size();
    double total = 0.0;
    for (uint32_t c : counts_) total += c;
    freq_.assign(k, 1u);
    uint64_t assigned = 0;
    for (size_t i = 0; i < k; ++i) {
        const double share = double(counts_[i]) / total * double(kCodingTotal);
        freq_[i] = uint32_t(std::max(1.0, std::floor(share)));
        assigned += freq_[i];
    }
    // distribute the rounding remainder over the largest entries
    while (assigned < kCodingTotal) {
        size_t best = 0;
        for (size_t i = 1; i < k; ++i)
            if (counts_[i] > counts_[best]) best = i;
        const uint64_t add = std::min<uint64_t>(kCodingTotal - assigned, 1u << 12);
        freq_[best] += uint32_t(add);
        assigned += add;
    }
    while (assigned > kCodingTotal) {
        size_t best = 0;
        for (size_t i = 1; i < k; ++i)
            if (freq_[i] > freq_[best]) best = i;
        if (freq_[best] <= 1) throw ContractError("FreqTable normalization failed");
        const uint64_t sub = std::min<uint64_t>(assigned - kCodingTotal, freq_[best] - 1);
        freq_[best] -= uint32_t(sub);
        assigned -= sub;
    }
    cum_.assign(k + 1, 0u);
    for (size_t i = 0; i < k; ++i) cum_[i + 1] = cum_[i] + freq_[i];
}

namespace {

constexpr uint32_t kTop = 1u << 24;

class RangeEncoder {
  public:
    explicit RangeEncoder(std::string& out) : out_(out) {}

    void encode(uint32_t cum, uint32_t freq, uint32_t total) {
        range_ /= total;
        low_ += uint64_t(cum) * range_;
        range_ *= freq;
        while (range_ < kTop) {
            shift_low();
            range_ <<= 8;
        }
    }

    void flush() {
        for (int i = 0; i < 5; ++i) shift_low();
    }

  private:
    // Deferred-carry byte output (the first emitted byte is a dummy the
    // decoder skips).
    void shift_low() {
        if (uint32_t(low_) < 0xFF000000u || (low_ >> 32) != 0) {
            const uint8_t carry = uint8_t(low_ >> 32);
            do {
                out_.push_back(char(uint8_t(cache_ + carry)));
                cache_ = 0xFF;
            } while (--pending_);
            cache_ = uint8_t(low_ >> 24);
        }
        ++pending_;
        low_ = (low_ << 8) & 0xFFFFFFFFull;
    }

    std::string& out_;
    uint64_t low_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
    uint8_t cache_ = 0;
    int64_t pending_ = 1;
};

class RangeDecoder {
  public:
    RangeDecoder(const uint8_t* p, const uint8_t* end) : p_(p), end_(end) {
        next_byte();  // dummy byte from the encoder
        for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
    }

    uint32_t decode_freq(uint32_t total) {
        range_ /= total;
        return std::min(code_ / range_, total - 1);
    }

    void decode_update(uint32_t cum, uint32_t freq) {
        code_ -= cum * range_;
        range_ *= freq;
        while (range_ < kTop) {
            code_ = (code_ << 8) | next_byte();
            range_ <<= 8;
        }
    }

  private:
    uint8_t next_byte() {
        if (p_ == end_) throw DecodeError("range stream truncated");
        return *p_++;
    }
    const uint8_t* p_;
    const uint8_t* end_;
    uint32_t range_ = 0xFFFFFFFFu;
    uint32_t code_ = 0;
};

uint32_t symbols_checksum(std::span<const int32_t> symbols) {
    return uint32_t(fnv1a64(symbols.data(), symbols.size() * sizeof(int32_t)) & 0xffffffffu);
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(std::string_view bytes, size_t pos) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(bytes[pos + size_t(i)])) << (8 * i);
    return v;
}

}  // namespace

std::string range_encode(std::span<const int32_t> symbols, const FreqTable& table) {
    const auto& freq = table.coding_freq();
    const auto& cum = table.coding_cum();
    std::string out;
    put_u32(out, uint32_t(symbols.size()));
    put_u32(out, symbols_checksum(symbols));
    RangeEncoder enc(out);
    for (int32_t s : symbols) {
        if (s < 0 || s >= table.symbol_count())
            throw ContractError("symbol " + std::to_string(s) + " outside table range");
        enc.encode(cum[size_t(s)], freq[size_t(s)], FreqTable::kCodingTotal);
    }
    enc.flush();
    return out;
}

std::vector<int32_t> range_decode(std::string_view bytes, size_t expected_count,
                                  const FreqTable& table) {
    if (bytes.size() < 8) throw DecodeError("stream shorter than its header");
    const uint32_t count = get_u32(bytes, 0);
    const uint32_t checksum = get_u32(bytes, 4);
    if (count != expected_count)
        throw DecodeError("symbol count mismatch: stream has " + std::to_string(count) +
                          ", expected " + std::to_string(expected_count));
    const auto& cum = table.coding_cum();
    const auto& freq = table.coding_freq();
    RangeDecoder dec(reinterpret_cast<const uint8_t*>(bytes.data()) + 8,
                     reinterpret_cast<const uint8_t*>(bytes.data()) + bytes.size());
    std::vector<int32_t> symbols(count);
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t f = dec.decode_freq(FreqTable::kCodingTotal);
        // largest s with cum[s] <= f
        const auto it = std::upper_bound(cum.begin(), cum.end(), f);
        const int32_t s = int32_t(it - cum.begin()) - 1;
        dec.decode_update(cum[size_t(s)], freq[size_t(s)]);
        symbols[i] = s;
    }
    if (symbols_checksum(symbols) != checksum) throw DecodeError("checksum mismatch");
    return symbols;
}

double stream_entropy_bits(std::span<const int32_t> symbols, int symbol_count) {
    if (symbols.empty()) return 0.0;
    std::vector<int64_t> counts(size_t(symbol_count), 0);
    for (int32_t s : symbols) {
        if (s < 0 || s >= symbol_count)
            throw ContractError("symbol " + std::to_string(s) + " outside table range");
        ++counts[size_t(s)];
    }
    const double n = double(symbols.size());
    double h = 0.0;
    for (int64_t c : counts)
        if (c > 0) {
            const double p = double(c) / n;
            h -= p * std::log2(p);
        }
    return h;
}

namespace {

void put_u16(std::string& out, uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
}

struct SczReader {
    std::string_view bytes;
    size_t pos = 0;
    void need(size_t k, const char* what) {
        if (pos + k > bytes.size())
            throw DecodeError(std::string("container truncated reading ") + what);
    }
    uint16_t u16(const char* what) {
        need(2, what);
        const uint16_t v = uint16_t(uint8_t(bytes[pos])) | uint16_t(uint8_t(bytes[pos + 1])) << 8;
        pos += 2;
        return v;
    }
    uint32_t u32(const char* what) {
        need(4, what);
        const uint32_t v = get_u32(bytes, pos);
        pos += 4;
        return v;
    }
    uint8_t u8(const char* what) {
        need(1, what);
        return uint8_t(bytes[pos++]);
    }
};

}  // namespace

std::string scz_encode(const SczFile& file) {
    const size_t expected =
        size_t(file.grid_h) * file.grid_w * file.channels * file.lh * file.lw;
    if (file.symbols.size() != expected)
        throw ContractError("scz_encode: symbol count does not match the declared dims");
    if (int(file.table_counts.size()) != (1 << file.quant_bits))
        throw ContractError("scz_encode: table size must be 2^quant_bits");
    const FreqTable table = FreqTable::from_counts(file.table_counts);
    const std::string payload = range_encode(file.symbols, table);

    std::string out = "SCZ1";
    put_u16(out, 1);  // version
    put_u16(out, uint16_t(file.grid_h));
    put_u16(out, uint16_t(file.grid_w));
    put_u16(out, uint16_t(file.patch_size));
    put_u16(out, uint16_t(file.channels));
    put_u16(out, uint16_t(file.lh));
    put_u16(out, uint16_t(file.lw));
    out.push_back(char(uint8_t(file.quant_bits)));
    put_u16(out, uint16_t(file.table_counts.size()));
    for (uint32_t c : file.table_counts) put_u32(out, c);
    put_u32(out, uint32_t(payload.size()));
    out += payload;
    return out;
}

SczFile scz_decode(std::string_view bytes) {
    if (bytes.size() < 4 || bytes.substr(0, 4) != "SCZ1")
        throw DecodeError("bad container magic (expected SCZ1)");
    SczReader r{bytes, 4};
    if (r.u16("version") != 1) throw DecodeError("unsupported container version");
    SczFile f;
    f.grid_h = r.u16("grid_h");
    f.grid_w = r.u16("grid_w");
    f.patch_size = r.u16("patch_size");
    f.channels = r.u16("channels");
    f.lh = r.u16("latent h");
    f.lw = r.u16("latent w");
    f.quant_bits = r.u8("quant_bits");
    const int k = r.u16("table size");
    if (f.quant_bits < 1 || f.quant_bits > 16 || k != (1 << f.quant_bits))
        throw DecodeError("table size does not match quant_bits");
    f.table_counts.resize(size_t(k));
    for (auto& c : f.table_counts) {
        c = r.u32("table count");
        if (c == 0) throw DecodeError("zero table count");
    }
    const uint32_t payload_len = r.u32("payload length");
    r.need(payload_len, "payload");
    const std::string_view payload = bytes.substr(r.pos, payload_len);
    const size_t expected = size_t(f.grid_h) * f.grid_w * f.channels * f.lh * f.lw;
    const FreqTable table = FreqTable::from_counts(f.table_counts);
    f.symbols = range_decode(payload, expected, table);
    for (int32_t s : f.symbols)
        if (s >= (1 << f.quant_bits)) throw DecodeError("decoded symbol out of range");
    return f;
}

double bitrate_bpp_coded(size_t coded_bytes, int64_t pixel_count) {
    if (pixel_count <= 0) throw ContractError("bitrate_bpp: pixel count must be positive");
    return 8.0 * double(coded_bytes) / double(pixel_count);
}

double bitrate_bpp_estimate(double bits_per_symbol, int64_t symbol_count, int64_t pixel_count) {
    if (pixel_count <= 0) throw ContractError("bitrate_bpp: pixel count must be positive");
    return bits_per_symbol * double(symbol_count) / double(pixel_count);
}

}  // namespace scae
