#include "fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "capcom/io.hpp"

#ifndef CAPCOM_FIXTURE_DIR
#error "CAPCOM_FIXTURE_DIR must be defined"
#endif

namespace capcom::testing {

std::string fixture_path(const std::string& name) {
  return std::string(CAPCOM_FIXTURE_DIR) + "/" + name;
}

std::string read_fixture(const std::string& name) { return read_file(fixture_path(name)); }

nlohmann::json fixture_json(const std::string& name) {
  return nlohmann::json::parse(read_fixture(name));
}

namespace {

const char* kScenes[] = {
    "a dog running across a grassy field",
    "a man riding a bicycle down the street",
    "two people sitting at a table eating pizza",
    "a cat sleeping on a red couch",
    "a train parked at a station platform",
    "a woman holding an umbrella in the rain",
    "a plate of food with broccoli and rice",
};

std::string qid(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%03zu", i);
  return buf;
}

}  // namespace

DatasetSplit planted_split(std::size_t n, const std::string& name) {
  std::vector<ImageRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    const bool hard = i % 5 != 0;
    ImageRecord r;
    r.image_id = qid(i);
    r.image_uri = std::string("mock://") + (hard ? "hard/" : "easy/") + r.image_id;
    for (std::size_t j = 0; j < 5; ++j) r.references.push_back(kScenes[(i + j) % 7]);
    recs.push_back(std::move(r));
  }
  return DatasetSplit::make(name, std::move(recs));
}

std::vector<std::string> planted_hard_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i)
    if (i % 5 != 0) ids.push_back(qid(i));
  return ids;
}

OracleRecall sort_oracle(std::size_t n, const std::vector<double>& scores) {
  OracleRecall out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double sa = scores[i * n + a], sb = scores[i * n + b];
      if (sa != sb) return sa > sb;
      if ((a == i) != (b == i)) return b == i;
      return a < b;
    });
    const auto pos = std::find(order.begin(), order.end(), i) - order.begin();
    const int rank = static_cast<int>(pos) + 1;
    out.ranks.push_back(rank);
    out.mrr += 1.0 / rank;
    out.r1 += rank <= 1;
    out.r5 += rank <= 5;
    out.r10 += rank <= 10;
  }
  const double dn = static_cast<double>(n);
  out.mrr /= dn;
  out.r1 /= dn;
  out.r5 /= dn;
  out.r10 /= dn;
  return out;
}

}  // namespace capcom::testing
