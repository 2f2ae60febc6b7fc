#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scae/error.hpp"

namespace scae {

// Order-0 symbol frequency table. Raw counts carry add-one smoothing so
// every symbol stays codable; coding uses a copy normalized to a fixed
// power-of-two total.
class FreqTable {
  public:
    // counts[i] = occurrences of symbol i + 1 (add-one smoothing).
    static FreqTable from_symbols(std::span<const int32_t> symbols, int symbol_count);
    static FreqTable from_counts(std::vector<uint32_t> counts);

    int symbol_count() const { return int(counts_.size()); }
    const std::vector<uint32_t>& counts() const { return counts_; }

    // Normalized coding distribution (total = kCodingTotal, every entry >= 1).
    const std::vector<uint32_t>& coding_freq() const { return freq_; }
    const std::vector<uint32_t>& coding_cum() const { return cum_; }

    static constexpr uint32_t kCodingTotal = 1u << 16;

  private:
    void normalize();
    std::vector<uint32_t> counts_;
    std::vector<uint32_t> freq_;
    std::vector<uint32_t> cum_;  // size K+1
};

// Lossless range coding of a symbol stream against a frequency table.
// Output framing: u32 symbol count, u32 checksum of the symbols, payload.
// Decoding verifies both and throws DecodeError on any corruption it can
// detect (truncation, count mismatch, checksum mismatch, bad symbols).
std::string range_encode(std::span<const int32_t> symbols, const FreqTable& table);
std::vector<int32_t> range_decode(std::string_view bytes, size_t expected_count,
                                  const FreqTable& table);

// Empirical Shannon entropy of the stream in bits/symbol (hard counts,
// no smoothing).
double stream_entropy_bits(std::span<const int32_t> symbols, int symbol_count);

// Compressed-image container:
//   magic "SCZ1", version u16, grid_h u16, grid_w u16, patch_size u16,
//   latent channels u16, latent h u16, latent w u16, quant_bits u8,
//   table: symbol count u16 + u32 counts, payload: u32 length + bytes.
struct SczFile {
    int grid_h = 0, grid_w = 0;
    int patch_size = 0;
    int channels = 0, lh = 0, lw = 0;
    int quant_bits = 0;
    std::vector<uint32_t> table_counts;
    std::vector<int32_t> symbols;  // (grid_h*grid_w, channels, lh, lw) row-major
};

std::string scz_encode(const SczFile& file);
SczFile scz_decode(std::string_view bytes);

// bits-per-pixel from a coded payload or from an entropy estimate
double bitrate_bpp_coded(size_t coded_bytes, int64_t pixel_count);
double bitrate_bpp_estimate(double bits_per_symbol, int64_t symbol_count, int64_t pixel_count);

}  // namespace scae
