#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

namespace ctrlsum {

/// Nine strictly ascending boundaries splitting summary lengths into ten
/// ranges: bin 1 is [0, b1], bin k is (b_{k-1}, b_k], bin 10 is (b9, inf).
struct BinTable {
  std::array<int, 9> boundaries{};
  std::string corpus_id;
  std::size_t sample_count = 0;

  /// Throws ConfigError unless boundaries are strictly ascending.
  void validate() const;

  friend bool operator==(const BinTable&, const BinTable&) = default;
};

/// Equal-frequency table from reference lengths: boundary k is the length at
/// sorted position ceil(k*N/10), so lengths equal to a boundary fall in the
/// lower bin. Throws ConfigError with fewer than ten lengths or when ties
/// make the boundaries non-ascending.
BinTable build_length_bins(std::span<const int> lengths, std::string corpus_id = {});

std::string bin_table_to_json(const BinTable& table);
BinTable bin_table_from_json(const std::string& text);

}  // namespace ctrlsum
