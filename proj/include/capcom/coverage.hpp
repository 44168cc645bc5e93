#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace capcom::coverage {

struct LinguisticAnnotation {
  std::set<std::string> nouns;  // lowercased lemmas
  std::set<std::string> verbs;
  std::string source_text;

  bool operator==(const LinguisticAnnotation&) const = default;
};

// POS/lemma provider. Implementations must be deterministic for a fixed
// version() string.
class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual LinguisticAnnotation annotate(std::string_view text) const = 0;
  virtual std::string version() const = 0;
};

// Bundled rule-and-lexicon tagger: a closed vocabulary of common caption
// nouns and verbs, suffix lemmatization, a small irregular-form table, and a
// determiner heuristic for out-of-lexicon nouns. Auxiliaries (be, have, do)
// are never reported as verbs.
class LexiconAnnotator final : public Annotator {
 public:
  LexiconAnnotator();

  // Extra entries, one per line: "<lemma>\tN" or "<lemma>\tV".
  void load_extra(const std::filesystem::path& path);
  void add_noun(std::string lemma);
  void add_verb(std::string lemma);

  LinguisticAnnotation annotate(std::string_view text) const override;
  std::string version() const override { return "lexicon-v1"; }

  std::string noun_lemma(std::string_view word) const;
  std::string verb_lemma(std::string_view word) const;

 private:
  std::set<std::string> nouns_;
  std::set<std::string> verbs_;
};

// Client for `POST /v1/annotate {"text": ...} -> {"nouns": [...], "verbs": [...]}`.
// Throws AnnotatorUnavailableError when the service cannot be reached.
class HttpAnnotator final : public Annotator {
 public:
  HttpAnnotator(std::string base_url, double timeout_s = 30.0, std::string version = "http");

  LinguisticAnnotation annotate(std::string_view text) const override;
  std::string version() const override { return version_; }

 private:
  std::string base_url_;
  double timeout_s_;
  std::string version_;
};

// Word vectors, unit-normalized on insertion.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // Plain-text vectors, "word v1 v2 ... vD" per line. A leading
  // "<count> <dim>" header line is skipped.
  static EmbeddingTable load(const std::filesystem::path& path);
  static EmbeddingTable parse(std::string_view text);

  // Throws DimensionMismatchError or ZeroVectorError.
  void add(std::string word, std::vector<double> vec);

  const std::vector<double>* lookup(std::string_view word) const;
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return table_.size(); }
  bool empty() const noexcept { return table_.empty(); }

 private:
  std::unordered_map<std::string, std::vector<double>> table_;
  std::size_t dim_ = 0;
};

inline constexpr double kDefaultPhi = 0.1;

// nullopt marks a word class excluded for this image (empty reference union).
struct Overlap {
  std::optional<double> noun;
  std::optional<double> verb;
};

Overlap exact_overlap(const LinguisticAnnotation& cand,
                      std::span<const LinguisticAnnotation> refs);

// A candidate word is covered when some reference-union word x satisfies
// ||E(w) - E(x)||^2 <= phi on unit-normalized vectors. Words without a vector
// (on either side) only match by exact string equality.
Overlap fuzzy_overlap(const LinguisticAnnotation& cand,
                      std::span<const LinguisticAnnotation> refs, const EmbeddingTable& table,
                      double phi = kDefaultPhi);

struct ImageCoverage {
  std::string image_id;
  Overlap exact;
  Overlap fuzzy;
};

struct CoverageReport {
  double noun_exact = 0.0;
  double verb_exact = 0.0;
  double noun_fuzzy = 0.0;
  double verb_fuzzy = 0.0;
  std::vector<ImageCoverage> per_image;
  std::size_t excluded_noun = 0;
  std::size_t excluded_verb = 0;
};

struct CoverageInput {
  std::string image_id;
  LinguisticAnnotation candidate;
  std::vector<LinguisticAnnotation> references;
};

CoverageReport coverage_report(std::span<const CoverageInput> images,
                               const EmbeddingTable& table, double phi = kDefaultPhi);

// Hedging vocabulary shared by LLOP and the summarizer's uncertainty flag.
// Entries may be multiword ("not sure"); matching is on whole tokens.
const std::vector<std::string>& default_uncertainty_lexicon();
inline constexpr std::string_view kUncertaintyLexiconVersion = "uncertainty-v1";

bool contains_lexicon_term(std::string_view text, const std::vector<std::string>& lexicon);

// Fraction of captions with at least one lexicon term.
double llop(const std::vector<std::string>& captions,
            const std::vector<std::string>& lexicon = default_uncertainty_lexicon());

struct LengthStats {
  double mean_chars = 0.0;  // UTF-8 code points
  double mean_commas = 0.0;
};

LengthStats length_stats(const std::vector<std::string>& captions);

}  // namespace capcom::coverage
