#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "capcom/types.hpp"

namespace capcom {

enum class SplitFormat { Jsonl, KarpathyJson };

SplitFormat parse_split_format(std::string_view s);

// Loads and validates a split. JSONL rows follow
//   {"image_id": str, "image_uri": str, "references": [str, ...]}
// The Karpathy adapter reads the public dataset_{coco,flickr30k}.json layout
// and keeps images whose "split" equals `karpathy_split` (default "test").
DatasetSplit load_split(const std::filesystem::path& path, SplitFormat format,
                        std::string_view karpathy_split = "test");

DatasetSplit parse_jsonl_split(std::string_view text, std::string name);
DatasetSplit parse_karpathy_split(std::string_view text, std::string name,
                                  std::string_view karpathy_split = "test");

std::string to_jsonl(const DatasetSplit& split);
void save_split(const DatasetSplit& split, const std::filesystem::path& path);

// Records in the order of `ids`; throws UnknownIdError for missing ids.
DatasetSplit subset(const DatasetSplit& split, const std::vector<std::string>& ids,
                    std::string name = {});

// `n` ids drawn without replacement by a seeded mt19937_64, in draw order.
std::vector<std::string> sample_ids(const DatasetSplit& split, std::size_t n,
                                    std::uint64_t seed);

// Order-sensitive content digest (hex SHA-256 of the canonical JSONL).
std::string fingerprint(const DatasetSplit& split);

}  // namespace capcom
