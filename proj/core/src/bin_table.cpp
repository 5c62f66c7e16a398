#include "ctrlsum/bin_table.hpp"

#include <algorithm>
#include <vector>

#include <json.hpp>

#include "ctrlsum/error.hpp"

namespace ctrlsum {

void BinTable::validate() const {
  for (std::size_t k = 1; k < boundaries.size(); ++k) {
    if (boundaries[k] <= boundaries[k - 1]) {
      throw ConfigError("length bin boundaries must be strictly ascending (boundary " +
                        std::to_string(k) + " = " + std::to_string(boundaries[k - 1]) +
                        ", boundary " + std::to_string(k + 1) + " = " + std::to_string(boundaries[k]) + ")");
    }
  }
}

BinTable build_length_bins(std::span<const int> lengths, std::string corpus_id) {
  if (lengths.size() < 10) {
    throw ConfigError("length bins need at least 10 samples, got " + std::to_string(lengths.size()));
  }
  std::vector<int> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  BinTable table;
  table.corpus_id = std::move(corpus_id);
  table.sample_count = n;
  for (std::size_t k = 1; k <= 9; ++k) {
    const std::size_t rank = (k * n + 9) / 10;  // ceil(k*n/10), 1-based
    table.boundaries[k - 1] = sorted[rank - 1];
  }
  table.validate();
  return table;
}

std::string bin_table_to_json(const BinTable& table) {
  nlohmann::json j;
  j["boundaries"] = table.boundaries;
  j["corpus_id"] = table.corpus_id;
  j["sample_count"] = table.sample_count;
  return j.dump(2);
}

BinTable bin_table_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    BinTable table;
    table.boundaries = j.at("boundaries").get<std::array<int, 9>>();
    table.corpus_id = j.value("corpus_id", "");
    table.sample_count = j.value("sample_count", std::size_t{0});
    table.validate();
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed bin table: ") + e.what());
  }
}

}  // namespace ctrlsum
