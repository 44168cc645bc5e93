#include "capcom/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_set>

#include "capcom/errors.hpp"
#include "capcom/text.hpp"

namespace capcom::ngram {
namespace {

constexpr double kTiny = 1e-15;
constexpr double kSmall = 1e-9;

struct BleuStats {
  std::array<double, kMaxOrder> correct{};
  std::array<double, kMaxOrder> guess{};
  double test_len = 0;
  double ref_len = 0;
};

BleuStats sentence_stats(const NgramProfile& cand, const std::vector<NgramProfile>& refs) {
  BleuStats s;
  s.test_len = cand.token_count;
  int best_len = refs.front().token_count;
  int best_diff = std::abs(best_len - cand.token_count);
  for (const auto& r : refs) {
    const int diff = std::abs(r.token_count - cand.token_count);
    if (diff < best_diff || (diff == best_diff && r.token_count < best_len)) {
      best_diff = diff;
      best_len = r.token_count;
    }
  }
  s.ref_len = best_len;
  for (int n = 0; n < kMaxOrder; ++n) {
    s.guess[n] = std::max(0, cand.token_count - n);
    for (const auto& [gram, count] : cand.counts[n]) {
      int max_ref = 0;
      for (const auto& r : refs) {
        auto it = r.counts[n].find(gram);
        if (it != r.counts[n].end()) max_ref = std::max(max_ref, it->second);
      }
      s.correct[n] += std::min(count, max_ref);
    }
  }
  return s;
}

double bleu_from_stats(const BleuStats& s) {
  if (s.test_len <= 0) return 0.0;
  double product = 1.0;
  int orders = 0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (s.guess[n] <= 0) continue;
    product *= s.correct[n] > 0 ? s.correct[n] / s.guess[n] : kTiny / (s.guess[n] + kSmall);
    ++orders;
  }
  double score = std::pow(product, 1.0 / orders);
  const double ratio = s.test_len / s.ref_len;
  if (ratio < 1.0) score *= std::exp(1.0 - 1.0 / ratio);
  return score;
}

std::vector<NgramProfile> profiles(const std::vector<std::string>& texts) {
  std::vector<NgramProfile> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(NgramProfile::from_text(t));
  return out;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// tf-idf vectors per order, their norms, and the bigram count used as the
// length term of the CIDEr-D penalty.
struct TfIdf {
  std::array<std::unordered_map<std::string, double>, kMaxOrder> vec;
  std::array<double, kMaxOrder> norm{};
  int length = 0;
};

TfIdf tfidf(const NgramProfile& p, const std::unordered_map<std::string, double>& doc_freq,
            double log_ref_count) {
  TfIdf out;
  for (int n = 0; n < kMaxOrder; ++n) {
    for (const auto& [gram, tf] : p.counts[n]) {
      auto it = doc_freq.find(gram);
      const double df = std::log(std::max(1.0, it == doc_freq.end() ? 0.0 : it->second));
      const double w = tf * (log_ref_count - df);
      out.vec[n][gram] = w;
      out.norm[n] += w * w;
      if (n == 1) out.length += tf;
    }
    out.norm[n] = std::sqrt(out.norm[n]);
  }
  return out;
}

}  // namespace

NgramProfile NgramProfile::from_tokens(const std::vector<std::string>& tokens) {
  NgramProfile p;
  p.token_count = static_cast<int>(tokens.size());
  for (int n = 1; n <= kMaxOrder; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (int k = 1; k < n; ++k) {
        key.push_back('\x1f');
        key += tokens[i + k];
      }
      ++p.counts[n - 1][key];
    }
  }
  return p;
}

NgramProfile NgramProfile::from_text(std::string_view text) {
  return from_tokens(tokenize(text));
}

double bleu4(std::string_view candidate, const std::vector<std::string>& references) {
  if (references.empty()) throw ValidationError("bleu4 needs at least one reference");
  return bleu_from_stats(sentence_stats(NgramProfile::from_text(candidate), profiles(references)));
}

double corpus_bleu4(const std::vector<std::string>& candidates,
                    const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size())
    throw ValidationError("corpus_bleu4: candidate/reference count mismatch");
  if (candidates.empty()) throw ValidationError("corpus_bleu4: empty corpus");
  BleuStats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (references[i].empty()) throw ValidationError("corpus_bleu4: image without references");
    const auto s =
        sentence_stats(NgramProfile::from_text(candidates[i]), profiles(references[i]));
    total.test_len += s.test_len;
    total.ref_len += s.ref_len;
    for (int n = 0; n < kMaxOrder; ++n) {
      total.correct[n] += s.correct[n];
      total.guess[n] += s.guess[n];
    }
  }
  return bleu_from_stats(total);
}

double rouge_l(std::string_view candidate, const std::vector<std::string>& references) {
  if (references.empty()) throw ValidationError("rouge_l needs at least one reference");
  const auto cand = tokenize(candidate);
  if (cand.empty()) return 0.0;
  double best_p = 0.0, best_r = 0.0;
  for (const auto& ref_text : references) {
    const auto ref = tokenize(ref_text);
    if (ref.empty()) continue;
    const auto lcs = static_cast<double>(lcs_length(ref, cand));
    best_p = std::max(best_p, lcs / static_cast<double>(cand.size()));
    best_r = std::max(best_r, lcs / static_cast<double>(ref.size()));
  }
  if (best_p == 0.0 || best_r == 0.0) return 0.0;
  const double b2 = kRougeBeta * kRougeBeta;
  return (1.0 + b2) * best_p * best_r / (best_r + b2 * best_p);
}

CiderResult cider(const std::vector<std::string>& candidates,
                  const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size())
    throw ValidationError("cider: candidate/reference count mismatch");
  if (candidates.size() < 2)
    throw InsufficientDataError("cider needs a corpus of at least 2 images");

  std::vector<std::vector<NgramProfile>> ref_profiles;
  ref_profiles.reserve(references.size());
  std::unordered_map<std::string, double> doc_freq;
  for (const auto& refs : references) {
    if (refs.empty()) throw ValidationError("cider: image without references");
    ref_profiles.push_back(profiles(refs));
    std::unordered_set<std::string> seen;
    for (const auto& p : ref_profiles.back())
      for (const auto& order : p.counts)
        for (const auto& [gram, _] : order) seen.insert(gram);
    for (const auto& g : seen) doc_freq[g] += 1.0;
  }
  const double log_ref_count = std::log(static_cast<double>(references.size()));

  CiderResult result;
  result.per_image.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto hyp = tfidf(NgramProfile::from_text(candidates[i]), doc_freq, log_ref_count);
    std::array<double, kMaxOrder> acc{};
    for (const auto& rp : ref_profiles[i]) {
      const auto ref = tfidf(rp, doc_freq, log_ref_count);
      const double delta = static_cast<double>(hyp.length - ref.length);
      const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
      for (int n = 0; n < kMaxOrder; ++n) {
        double val = 0.0;
        for (const auto& [gram, w] : hyp.vec[n]) {
          auto it = ref.vec[n].find(gram);
          if (it == ref.vec[n].end()) continue;
          val += std::min(w, it->second) * it->second;
        }
        if (hyp.norm[n] != 0.0 && ref.norm[n] != 0.0) val /= hyp.norm[n] * ref.norm[n];
        acc[n] += val * penalty;
      }
    }
    double mean = 0.0;
    for (double v : acc) mean += v;
    mean /= kMaxOrder;
    mean /= static_cast<double>(ref_profiles[i].size());
    result.per_image.push_back(mean * 10.0);
  }
  double sum = 0.0;
  for (double v : result.per_image) sum += v;
  result.score = sum / static_cast<double>(result.per_image.size());
  return result;
}

double self_bleu(const std::vector<std::string>& captions) {
  if (captions.size() < 2) throw InsufficientDataError("self_bleu needs at least 2 captions");
  double sum = 0.0;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    std::vector<std::string> others;
    others.reserve(captions.size() - 1);
    for (std::size_t j = 0; j < captions.size(); ++j)
      if (j != i) others.push_back(captions[j]);
    sum += bleu4(captions[i], others);
  }
  return sum / static_cast<double>(captions.size());
}

NgramReport score_corpus(const std::vector<std::string>& candidates,
                         const std::vector<std::vector<std::string>>& references) {
  NgramReport r;
  r.bleu4 = corpus_bleu4(candidates, references);
  double rouge = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) rouge += rouge_l(candidates[i], references[i]);
  r.rouge_l = rouge / static_cast<double>(candidates.size());
  r.cider = cider(candidates, references).score;
  return r;
}

}  // namespace capcom::ngram
