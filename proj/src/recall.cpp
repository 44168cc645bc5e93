#include "capcom/recall.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "capcom/errors.hpp"

namespace capcom {

std::string_view to_string(Modality m) { return m == Modality::Text ? "text" : "image"; }

Modality parse_modality(std::string_view s) {
  if (s == "text") return Modality::Text;
  if (s == "image") return Modality::Image;
  throw ValidationError("unknown modality: " + std::string(s));
}

}  // namespace capcom

namespace capcom::recall {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim())
    throw DimensionMismatchError("cosine: dims " + std::to_string(a.dim()) + " vs " +
                                 std::to_string(b.dim()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVectorError("cosine of a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double clip_score(const EmbeddingVector& image_vec, const EmbeddingVector& text_vec) {
  return kClipScoreWeight * std::max(cosine(image_vec, text_vec), 0.0);
}

ScoreMatrix::ScoreMatrix(std::vector<std::string> image_ids, std::vector<double> scores)
    : image_ids_(std::move(image_ids)), scores_(std::move(scores)) {
  if (scores_.size() != image_ids_.size() * image_ids_.size())
    throw ValidationError("score matrix is not square");
  for (double s : scores_)
    if (!std::isfinite(s)) throw ValidationError("score matrix has a non-finite entry");
}

ScoredPair build_score_matrix(const std::vector<std::string>& image_ids,
                              const std::vector<EmbeddingVector>& image_vecs,
                              const std::vector<EmbeddingVector>& text_vecs) {
  const auto n = image_ids.size();
  if (image_vecs.size() != n || text_vecs.size() != n)
    throw ValidationError("build_score_matrix: ids/vectors length mismatch");
  std::vector<double> clipped(n * n), cos(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = cosine(image_vecs[i], text_vecs[j]);
      cos[i * n + j] = c;
      clipped[i * n + j] = kClipScoreWeight * std::max(c, 0.0);
    }
  }
  return ScoredPair{ScoreMatrix(image_ids, std::move(clipped)), std::move(cos)};
}

RecallReport recall_stats(const ScoreMatrix& matrix) {
  const auto n = matrix.n();
  if (n == 0) throw ValidationError("recall_stats on an empty matrix");
  RecallReport rep;
  rep.image_ids = matrix.image_ids();
  rep.per_image_rank.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double own = matrix(i, i);
    int rank = 1;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && matrix(i, j) >= own) ++rank;
    rep.per_image_rank[i] = rank;
  }
  double rr = 0.0;
  for (int k : {1, 5, 10}) rep.r_at[k] = 0.0;
  for (int rank : rep.per_image_rank) {
    rr += 1.0 / rank;
    for (auto& [k, v] : rep.r_at)
      if (rank <= k) v += 1.0;
  }
  rep.mrr = rr / static_cast<double>(n);
  for (auto& [k, v] : rep.r_at) v /= static_cast<double>(n);
  return rep;
}

DatasetSplit build_hard_split(const RecallReport& report, const DatasetSplit& split,
                              std::size_t n, std::string name) {
  if (report.image_ids.size() != report.per_image_rank.size())
    throw ValidationError("recall report ids and ranks are not aligned");
  if (n > split.size())
    throw ValidationError("hard split size " + std::to_string(n) + " exceeds split size " +
                          std::to_string(split.size()));
  std::unordered_map<std::string, int> rank_of;
  for (std::size_t i = 0; i < report.image_ids.size(); ++i)
    rank_of[report.image_ids[i]] = report.per_image_rank[i];

  std::vector<const ImageRecord*> recs;
  recs.reserve(split.size());
  for (const auto& r : split) {
    if (!rank_of.contains(r.image_id)) throw UnknownIdError(r.image_id);
    recs.push_back(&r);
  }
  std::sort(recs.begin(), recs.end(), [&](const ImageRecord* a, const ImageRecord* b) {
    const int ra = rank_of.at(a->image_id), rb = rank_of.at(b->image_id);
    if (ra != rb) return ra > rb;
    return a->image_id < b->image_id;
  });
  std::vector<ImageRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(*recs[i]);
  return DatasetSplit::make(name.empty() ? split.name() + "-hard" : std::move(name),
                            std::move(out));
}

}  // namespace capcom::recall
