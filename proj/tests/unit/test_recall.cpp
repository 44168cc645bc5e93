#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "capcom/errors.hpp"
#include "capcom/recall.hpp"
#include "fixtures.hpp"

using namespace capcom;
using namespace capcom::recall;
using capcom::testing::sort_oracle;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("i" + std::to_string(i));
  return out;
}

// Scores with frequent ties: values drawn from a coarse grid half the time.
std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 2.5);
  std::vector<double> s(n * n);
  const bool coarse = rng() & 1;
  for (auto& x : s) x = coarse ? static_cast<double>(rng() % 6) * 0.5 : u(rng);
  return s;
}

EmbeddingVector vec(std::vector<double> v, Modality m = Modality::Text) { return {std::move(v), m}; }

}  // namespace

TEST(ClipScore, Examples) {
  EXPECT_DOUBLE_EQ(clip_score(vec({1, 0, 0}), vec({1, 0, 0})), 2.5);
  EXPECT_DOUBLE_EQ(clip_score(vec({1, 0}), vec({0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(clip_score(vec({1, 0}), vec({-1, 0})), 0.0);
  const double c = 0.31;
  EXPECT_NEAR(clip_score(vec({1, 0}), vec({c, std::sqrt(1 - c * c)})), 0.775, 1e-12);
  EXPECT_THROW(clip_score(vec({0, 0}), vec({1, 0})), ZeroVectorError);
  EXPECT_THROW(clip_score(vec({1, 0}), vec({1, 0, 0})), DimensionMismatchError);
}

TEST(RecallStats, IdentityDominant) {
  ScoreMatrix m(ids(3), {1, 0, 0, 0, 1, 0, 0, 0, 1});
  auto r = recall_stats(m);
  EXPECT_DOUBLE_EQ(r.mrr, 1.0);
  EXPECT_DOUBLE_EQ(r.r_at.at(1), 1.0);
}

TEST(RecallStats, HandEnumeratedExample) {
  ScoreMatrix m(ids(3), {0.5, 0.9, 0.1, 0.2, 0.8, 0.3, 0.4, 0.6, 0.7});
  auto r = recall_stats(m);
  EXPECT_EQ(r.per_image_rank, (std::vector<int>{2, 1, 1}));
  EXPECT_NEAR(r.mrr, 0.8333333333333334, 1e-12);
  EXPECT_NEAR(r.r_at.at(1), 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.r_at.at(5), 1.0);
}

TEST(RecallStats, TiesCountAgainstTheImage) {
  ScoreMatrix m(ids(3), {1, 1, 0, 0, 0, 0, 0.5, 0.5, 0.5});
  auto r = recall_stats(m);
  EXPECT_EQ(r.per_image_rank, (std::vector<int>{2, 3, 3}));
}

TEST(RecallStats, RejectsBadMatrices) {
  EXPECT_THROW(ScoreMatrix(ids(2), {1, 2, 3}), ValidationError);
  EXPECT_THROW(ScoreMatrix(ids(1), {std::nan("")}), ValidationError);
  EXPECT_THROW(recall_stats(ScoreMatrix({}, {})), ValidationError);
}

TEST(RecallStats, MatchesSortOracleOn500RandomMatrices) {
  std::mt19937_64 rng(2024);
  const auto start = std::chrono::steady_clock::now();
  for (int c = 0; c < 500; ++c) {
    const std::size_t n = 1 + rng() % 200;
    auto s = random_scores(rng, n);
    auto r = recall_stats(ScoreMatrix(ids(n), s));
    auto o = sort_oracle(n, s);
    ASSERT_EQ(r.per_image_rank, o.ranks) << "case " << c;
    ASSERT_NEAR(r.mrr, o.mrr, 1e-12);
    ASSERT_DOUBLE_EQ(r.r_at.at(1), o.r1);
    ASSERT_DOUBLE_EQ(r.r_at.at(5), o.r5);
    ASSERT_DOUBLE_EQ(r.r_at.at(10), o.r10);
    ASSERT_LE(r.r_at.at(1), r.r_at.at(5));
    ASSERT_LE(r.r_at.at(5), r.r_at.at(10));
    ASSERT_GE(r.mrr, r.r_at.at(1));
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 10.0);
}

TEST(RecallStats, ScaleInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 2 + rng() % 40, dim = 8;
    std::vector<EmbeddingVector> imgs, txts, scaled;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> a(dim), b(dim);
      for (auto& x : a) x = nd(rng);
      for (auto& x : b) x = nd(rng);
      imgs.push_back(vec(a, Modality::Image));
      txts.push_back(vec(b));
    }
    const double k = scale(rng);
    for (const auto& t : txts) {
      auto v = t.values;
      for (auto& x : v) x *= k;
      scaled.push_back(vec(v));
    }
    auto a = recall_stats(build_score_matrix(ids(n), imgs, txts).clipped);
    auto b = recall_stats(build_score_matrix(ids(n), imgs, scaled).clipped);
    ASSERT_EQ(a.per_image_rank, b.per_image_rank) << "case " << c;
    ASSERT_DOUBLE_EQ(a.mrr, b.mrr);
    ASSERT_EQ(a.r_at, b.r_at);
  }
}

TEST(RecallStats, PermutationEquivariance) {
  std::mt19937_64 rng(6);
  for (int c = 0; c < 50; ++c) {
    const std::size_t n = 2 + rng() % 30;
    auto s = random_scores(rng, n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> p(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] = s[perm[i] * n + perm[j]];
    auto a = recall_stats(ScoreMatrix(ids(n), s));
    auto b = recall_stats(ScoreMatrix(ids(n), p));
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(b.per_image_rank[i], a.per_image_rank[perm[i]]);
    ASSERT_NEAR(a.mrr, b.mrr, 1e-12);
  }
}

TEST(ScoreMatrixBuild, KeepsRawCosine) {
  std::vector<EmbeddingVector> imgs = {vec({1, 0}, Modality::Image), vec({0, 1}, Modality::Image)};
  std::vector<EmbeddingVector> txts = {vec({1, 0}), vec({-1, 0})};
  auto m = build_score_matrix(ids(2), imgs, txts);
  EXPECT_DOUBLE_EQ(m.clipped(0, 0), 2.5);
  EXPECT_DOUBLE_EQ(m.clipped(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(m.cosine[1], -1.0);
}

TEST(HardSplit, Examples) {
  auto split = capcom::testing::planted_split(3);
  RecallReport r;
  r.image_ids = {"q000", "q001", "q002"};
  r.per_image_rank = {1, 10, 3};
  auto one = build_hard_split(r, split, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.records()[0].image_id, "q001");
  auto all = build_hard_split(r, split, 3);
  EXPECT_EQ(all.records()[0].image_id, "q001");
  EXPECT_EQ(all.records()[1].image_id, "q002");
  EXPECT_EQ(all.records()[2].image_id, "q000");
  EXPECT_THROW(build_hard_split(r, split, 4), ValidationError);
}

TEST(HardSplit, PlantedBottom200Of500) {
  auto split = capcom::testing::planted_split(500);
  std::mt19937_64 rng(77);
  RecallReport r;
  std::vector<std::pair<int, std::string>> truth;
  for (const auto& rec : split) {
    // Four in five records get ranks 50..499, the rest 1..49 (with ties).
    const bool hard = truth.size() % 5 != 0;
    const int rank = hard ? 50 + static_cast<int>(rng() % 450) : 1 + static_cast<int>(rng() % 49);
    r.image_ids.push_back(rec.image_id);
    r.per_image_rank.push_back(rank);
    truth.push_back({rank, rec.image_id});
  }
  std::sort(truth.begin(), truth.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  auto hard = build_hard_split(r, split, 200, "hard-mrr-blip");
  ASSERT_EQ(hard.size(), 200u);
  EXPECT_EQ(hard.name(), "hard-mrr-blip");
  for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(hard.records()[i].image_id, truth[i].second);
}
