#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "capcom/recall.hpp"
#include "capcom/types.hpp"

namespace capcom::testing {

std::string fixture_path(const std::string& name);
std::string read_fixture(const std::string& name);
nlohmann::json fixture_json(const std::string& name);

// Synthetic split q000..q<n-1>. Every fifth image is easy; the rest carry a
// "hard" uri that makes the mock captioner emit a baseline the mock embedder
// maps away from its image.
DatasetSplit planted_split(std::size_t n = 250, const std::string& name = "planted");
std::vector<std::string> planted_hard_ids(std::size_t n = 250);

// Ranks by fully sorting each row (descending score, self placed after any
// equal-scoring rival), independent of recall_stats' counting.
struct OracleRecall {
  std::vector<int> ranks;
  double mrr = 0.0;
  double r1 = 0.0, r5 = 0.0, r10 = 0.0;
};
OracleRecall sort_oracle(std::size_t n, const std::vector<double>& scores);

}  // namespace capcom::testing
