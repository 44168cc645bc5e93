#pragma once

#include <map>
#include <string>
#include <vector>

#include "capcom/embedding.hpp"
#include "capcom/types.hpp"

namespace capcom::recall {

inline constexpr double kClipScoreWeight = 2.5;

// Cosine similarity; throws ZeroVectorError / DimensionMismatchError.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// CLIP-Score: 2.5 * max(cos(image, text), 0).
double clip_score(const EmbeddingVector& image_vec, const EmbeddingVector& text_vec);

// scores(i, j) = clip_score(image i, caption j); row-major.
class ScoreMatrix {
 public:
  ScoreMatrix(std::vector<std::string> image_ids, std::vector<double> scores);

  std::size_t n() const noexcept { return image_ids_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return scores_[i * n() + j]; }
  const std::vector<std::string>& image_ids() const noexcept { return image_ids_; }
  const std::vector<double>& raw() const noexcept { return scores_; }

 private:
  std::vector<std::string> image_ids_;
  std::vector<double> scores_;
};

struct ScoredPair {
  ScoreMatrix clipped;
  std::vector<double> cosine;  // unclamped diagnostics, same layout
};

// Image i is paired with caption i. All vectors must share one dimension.
ScoredPair build_score_matrix(const std::vector<std::string>& image_ids,
                              const std::vector<EmbeddingVector>& image_vecs,
                              const std::vector<EmbeddingVector>& text_vecs);

struct RecallReport {
  double mrr = 0.0;
  std::map<int, double> r_at;  // keys 1, 5, 10
  std::vector<int> per_image_rank;
  std::vector<std::string> image_ids;
};

// rank_i = 1 + #{ j != i : scores(i, j) >= scores(i, i) }. Ties count
// against image i, so reported recall is a lower bound.
RecallReport recall_stats(const ScoreMatrix& matrix);

// The `n` records with the worst rank, ties by image_id ascending, worst first.
DatasetSplit build_hard_split(const RecallReport& report, const DatasetSplit& split,
                              std::size_t n = 200, std::string name = {});

}  // namespace capcom::recall
