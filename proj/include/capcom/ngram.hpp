#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace capcom::ngram {

inline constexpr int kMaxOrder = 4;

// Counts of every 1..4-gram of a token sequence. N-grams are keyed by their
// tokens joined with a unit separator (0x1f), which the tokenizer never emits.
struct NgramProfile {
  std::array<std::unordered_map<std::string, int>, kMaxOrder> counts;
  int token_count = 0;

  static NgramProfile from_tokens(const std::vector<std::string>& tokens);
  static NgramProfile from_text(std::string_view text);
};

// Sentence BLEU-4 with uniform weights, clipped counts, and the brevity
// penalty against the closest reference length (ties go to the shorter
// reference). An order with zero clipped matches contributes
// 1e-15 / (guess + 1e-9) instead of 0, so the geometric mean never
// collapses on log(0). Orders longer than the candidate are left out of the
// geometric mean, so a candidate identical to a reference scores exactly 1.
// Empty candidates score 0.
double bleu4(std::string_view candidate, const std::vector<std::string>& references);

// Corpus BLEU-4: clipped counts, guesses, and lengths summed over the corpus
// before the geometric mean and brevity penalty.
double corpus_bleu4(const std::vector<std::string>& candidates,
                    const std::vector<std::vector<std::string>>& references);

// ROUGE-L as used by the COCO caption toolkit: LCS precision and recall are
// each maximised over references, then combined with beta = 1.2.
double rouge_l(std::string_view candidate, const std::vector<std::string>& references);

inline constexpr double kRougeBeta = 1.2;

struct CiderResult {
  double score = 0.0;             // corpus mean
  std::vector<double> per_image;  // aligned with the input corpus
};

// CIDEr-D: tf-idf over 1..4-grams with document frequencies from the
// reference corpus, clipped hypothesis weights, Gaussian length penalty with
// sigma = 6, averaged over orders and references, scaled by 10.
// Throws InsufficientDataError for corpora with fewer than two images.
CiderResult cider(const std::vector<std::string>& candidates,
                  const std::vector<std::vector<std::string>>& references);

inline constexpr double kCiderSigma = 6.0;

// Mean over captions of bleu4(caption, all other captions).
double self_bleu(const std::vector<std::string>& captions);

// Metric report mirroring the n-gram table: METEOR and MAUVE are not
// computed and serialize as null.
struct NgramReport {
  double bleu4 = 0.0;
  double cider = 0.0;
  double rouge_l = 0.0;
};

NgramReport score_corpus(const std::vector<std::string>& candidates,
                         const std::vector<std::vector<std::string>>& references);

}  // namespace capcom::ngram
