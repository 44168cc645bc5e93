#include "capcom/coverage.hpp"

#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "capcom/errors.hpp"
#include "capcom/io.hpp"
#include "capcom/text.hpp"
#include "http_util.hpp"
#include "lexicon_data.hpp"

namespace capcom::coverage {
namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool in(const std::vector<std::string_view>& words, std::string_view w) {
  return std::find(words.begin(), words.end(), w) != words.end();
}

std::string_view lookup_irregular(
    const std::vector<std::pair<std::string_view, std::string_view>>& table,
    std::string_view w) {
  for (const auto& [form, lemma] : table)
    if (form == w) return lemma;
  return {};
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// Candidate noun lemmas for a surface form, most specific rule first.
std::vector<std::string> noun_candidates(std::string_view w) {
  std::vector<std::string> out;
  if (auto irr = lookup_irregular(detail::irregular_nouns(), w); !irr.empty())
    out.emplace_back(irr);
  out.emplace_back(w);
  if (ends_with(w, "ies") && w.size() > 4) out.push_back(std::string(w.substr(0, w.size() - 3)) + "y");
  if (ends_with(w, "ves") && w.size() > 4) {
    out.push_back(std::string(w.substr(0, w.size() - 3)) + "f");
    out.push_back(std::string(w.substr(0, w.size() - 3)) + "fe");
  }
  if (ends_with(w, "es") && w.size() > 3) out.emplace_back(w.substr(0, w.size() - 2));
  if (ends_with(w, "s") && !ends_with(w, "ss") && w.size() > 2)
    out.emplace_back(w.substr(0, w.size() - 1));
  return out;
}

std::vector<std::string> verb_candidates(std::string_view w) {
  std::vector<std::string> out;
  if (auto irr = lookup_irregular(detail::irregular_verbs(), w); !irr.empty())
    out.emplace_back(irr);
  out.emplace_back(w);
  auto add_stem = [&](std::string_view stem) {
    if (stem.size() < 2) return;
    out.emplace_back(stem);
    out.push_back(std::string(stem) + "e");
    const auto n = stem.size();
    if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]))
      out.emplace_back(stem.substr(0, n - 1));
  };
  if (ends_with(w, "ing")) add_stem(w.substr(0, w.size() - 3));
  if (ends_with(w, "ied")) out.push_back(std::string(w.substr(0, w.size() - 3)) + "y");
  if (ends_with(w, "ed")) add_stem(w.substr(0, w.size() - 2));
  if (ends_with(w, "ies")) out.push_back(std::string(w.substr(0, w.size() - 3)) + "y");
  if (ends_with(w, "es")) out.emplace_back(w.substr(0, w.size() - 2));
  if (ends_with(w, "s") && !ends_with(w, "ss")) out.emplace_back(w.substr(0, w.size() - 1));
  return out;
}

std::string first_in(const std::vector<std::string>& cands, const std::set<std::string>& vocab) {
  for (const auto& c : cands)
    if (vocab.contains(c)) return c;
  return {};
}

// Lemma for a word outside the lexicon, used only by the determiner rule.
std::string guess_noun_lemma(std::string_view w) {
  if (auto irr = lookup_irregular(detail::irregular_nouns(), w); !irr.empty())
    return std::string(irr);
  if (ends_with(w, "ies") && w.size() > 4) return std::string(w.substr(0, w.size() - 3)) + "y";
  for (std::string_view sib : {"ches", "shes", "xes", "sses", "zes"})
    if (ends_with(w, sib)) return std::string(w.substr(0, w.size() - 2));
  if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && w.size() > 3)
    return std::string(w.substr(0, w.size() - 1));
  return std::string(w);
}

bool alphabetic(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

LexiconAnnotator::LexiconAnnotator() {
  for (auto w : detail::base_nouns()) nouns_.emplace(w);
  for (auto w : detail::base_verbs()) verbs_.emplace(w);
}

void LexiconAnnotator::add_noun(std::string lemma) { nouns_.insert(to_lower(lemma)); }
void LexiconAnnotator::add_verb(std::string lemma) { verbs_.insert(to_lower(lemma)); }

void LexiconAnnotator::load_extra(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string_view::npos)
      throw ParseError(path.string() + ":" + std::to_string(line_no), "expected <lemma>\\t<N|V>");
    const auto lemma = std::string(trim(t.substr(0, tab)));
    const auto tag = trim(t.substr(tab + 1));
    if (tag == "N") add_noun(lemma);
    else if (tag == "V") add_verb(lemma);
    else throw ParseError(path.string() + ":" + std::to_string(line_no), "tag must be N or V");
  }
}

std::string LexiconAnnotator::noun_lemma(std::string_view word) const {
  return first_in(noun_candidates(word), nouns_);
}

std::string LexiconAnnotator::verb_lemma(std::string_view word) const {
  return first_in(verb_candidates(word), verbs_);
}

LinguisticAnnotation LexiconAnnotator::annotate(std::string_view text) const {
  LinguisticAnnotation ann;
  ann.source_text = std::string(text);
  const auto tokens = tokenize(text);
  bool prev_was_noun = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    const std::string_view prev = i > 0 ? std::string_view(tokens[i - 1]) : std::string_view{};
    const bool prev_det = in(detail::determiners(), prev);
    const bool prev_aux = in(detail::auxiliaries(), prev) || prev == "to";
    if (in(detail::auxiliaries(), t) || in(detail::determiners(), t)) {
      prev_was_noun = false;
      continue;
    }
    const auto nl = noun_lemma(t);
    const auto vl = verb_lemma(t);
    enum class Tag { None, Noun, Verb } tag = Tag::None;
    if (!nl.empty() && !vl.empty()) {
      if (prev_det) tag = Tag::Noun;
      else if (t != vl && (ends_with(t, "ing") || ends_with(t, "ed"))) tag = Tag::Verb;
      else if (prev_aux || prev_was_noun) tag = Tag::Verb;
      else tag = Tag::Noun;
    } else if (!vl.empty()) {
      tag = Tag::Verb;
    } else if (!nl.empty()) {
      tag = Tag::Noun;
    } else if (alphabetic(t) && t.size() > 2) {
      const bool next_is_noun = i + 1 < tokens.size() && !noun_lemma(tokens[i + 1]).empty();
      const bool next_unknown = i + 1 < tokens.size() && alphabetic(tokens[i + 1]) &&
                                !in(detail::determiners(), tokens[i + 1]) &&
                                !in(detail::auxiliaries(), tokens[i + 1]) &&
                                verb_lemma(tokens[i + 1]).empty() &&
                                tokens[i + 1] != "with" && tokens[i + 1] != "and" &&
                                tokens[i + 1] != "on" && tokens[i + 1] != "in" &&
                                tokens[i + 1] != "at" && tokens[i + 1] != "near";
      if (prev_det && !next_is_noun && !next_unknown) {
        ann.nouns.insert(guess_noun_lemma(t));
        prev_was_noun = true;
        continue;
      }
      if (prev_aux && ends_with(t, "ing") && t.size() > 5) {
        ann.verbs.insert(t.substr(0, t.size() - 3));
        prev_was_noun = false;
        continue;
      }
    }
    if (tag == Tag::Noun) ann.nouns.insert(nl);
    if (tag == Tag::Verb) ann.verbs.insert(vl);
    prev_was_noun = tag == Tag::Noun;
  }
  return ann;
}

HttpAnnotator::HttpAnnotator(std::string base_url, double timeout_s, std::string version)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s), version_(std::move(version)) {}

LinguisticAnnotation HttpAnnotator::annotate(std::string_view text) const {
  nlohmann::json body = {{"text", std::string(text)}};
  std::string response;
  try {
    response = capcom::detail::post_json(base_url_, "/v1/annotate", body.dump(), timeout_s_, 2, {});
  } catch (const TransportError& e) {
    throw AnnotatorUnavailableError(e.what());
  }
  LinguisticAnnotation ann;
  ann.source_text = std::string(text);
  try {
    const auto j = nlohmann::json::parse(response);
    for (const auto& n : j.at("nouns")) ann.nouns.insert(to_lower(n.get<std::string>()));
    for (const auto& v : j.at("verbs")) ann.verbs.insert(to_lower(v.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponseError(std::string("annotator response: ") + e.what());
  }
  ann.nouns.erase("");
  ann.verbs.erase("");
  return ann;
}

void EmbeddingTable::add(std::string word, std::vector<double> vec) {
  if (vec.empty()) throw DimensionMismatchError("empty vector for " + word);
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_)
    throw DimensionMismatchError("vector for '" + word + "' has dim " +
                                 std::to_string(vec.size()) + ", expected " +
                                 std::to_string(dim_));
  double norm = 0.0;
  for (double v : vec) {
    if (!std::isfinite(v)) throw ValidationError("non-finite vector entry for " + word);
    norm += v * v;
  }
  if (norm == 0.0) throw ZeroVectorError("zero vector for " + word);
  norm = std::sqrt(norm);
  for (double& v : vec) v /= norm;
  table_[std::move(word)] = std::move(vec);
}

const std::vector<double>* EmbeddingTable::lookup(std::string_view word) const {
  auto it = table_.find(std::string(word));
  return it == table_.end() ? nullptr : &it->second;
}

EmbeddingTable EmbeddingTable::parse(std::string_view text) {
  EmbeddingTable t;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) fields.push_back(line.substr(i, j - i));
      i = j;
    }
    if (line_no == 1 && fields.size() == 2 &&
        std::all_of(fields[0].begin(), fields[0].end(), ::isdigit) &&
        std::all_of(fields[1].begin(), fields[1].end(), ::isdigit))
      continue;
    if (fields.size() < 2)
      throw ParseError("line " + std::to_string(line_no), "expected word and vector");
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      double v = 0.0;
      const auto* b = fields[f].data();
      const auto* e = b + fields[f].size();
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc{} || p != e)
        throw ParseError("line " + std::to_string(line_no),
                         "bad number '" + std::string(fields[f]) + "'");
      vec.push_back(v);
    }
    t.add(to_lower(fields[0]), std::move(vec));
  }
  return t;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

namespace {

std::set<std::string> noun_union(std::span<const LinguisticAnnotation> refs) {
  std::set<std::string> u;
  for (const auto& r : refs) u.insert(r.nouns.begin(), r.nouns.end());
  return u;
}

std::set<std::string> verb_union(std::span<const LinguisticAnnotation> refs) {
  std::set<std::string> u;
  for (const auto& r : refs) u.insert(r.verbs.begin(), r.verbs.end());
  return u;
}

template <typename Covered>
std::optional<double> overlap(const std::set<std::string>& cand, const std::set<std::string>& uni,
                              Covered covered) {
  if (uni.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (const auto& w : cand)
    if (covered(w)) ++hits;
  // Candidate words are a set, so hits can exceed |union| only when several
  // candidate words fuzzily land on the same reference word.
  return std::min(1.0, static_cast<double>(hits) / static_cast<double>(uni.size()));
}

bool fuzzy_covered(const std::string& w, const std::set<std::string>& uni,
                   const EmbeddingTable& table, double phi) {
  if (uni.contains(w)) return true;
  const auto* ew = table.lookup(w);
  if (!ew) return false;
  for (const auto& x : uni) {
    const auto* ex = table.lookup(x);
    if (!ex) continue;
    double d2 = 0.0;
    for (std::size_t i = 0; i < ew->size(); ++i) {
      const double d = (*ew)[i] - (*ex)[i];
      d2 += d * d;
    }
    if (d2 <= phi) return true;
  }
  return false;
}

}  // namespace

Overlap exact_overlap(const LinguisticAnnotation& cand,
                      std::span<const LinguisticAnnotation> refs) {
  if (refs.empty()) throw ValidationError("exact_overlap needs references");
  const auto nu = noun_union(refs), vu = verb_union(refs);
  return Overlap{overlap(cand.nouns, nu, [&](const std::string& w) { return nu.contains(w); }),
                 overlap(cand.verbs, vu, [&](const std::string& w) { return vu.contains(w); })};
}

Overlap fuzzy_overlap(const LinguisticAnnotation& cand,
                      std::span<const LinguisticAnnotation> refs, const EmbeddingTable& table,
                      double phi) {
  if (refs.empty()) throw ValidationError("fuzzy_overlap needs references");
  if (!(phi >= 0.0)) throw ValidationError("phi must be >= 0");
  const auto nu = noun_union(refs), vu = verb_union(refs);
  return Overlap{
      overlap(cand.nouns, nu, [&](const std::string& w) { return fuzzy_covered(w, nu, table, phi); }),
      overlap(cand.verbs, vu, [&](const std::string& w) { return fuzzy_covered(w, vu, table, phi); })};
}

CoverageReport coverage_report(std::span<const CoverageInput> images,
                               const EmbeddingTable& table, double phi) {
  CoverageReport rep;
  double ne = 0, ve = 0, nf = 0, vf = 0;
  std::size_t n_count = 0, v_count = 0;
  for (const auto& img : images) {
    ImageCoverage ic;
    ic.image_id = img.image_id;
    ic.exact = exact_overlap(img.candidate, img.references);
    ic.fuzzy = fuzzy_overlap(img.candidate, img.references, table, phi);
    if (ic.exact.noun) {
      ne += *ic.exact.noun;
      nf += *ic.fuzzy.noun;
      ++n_count;
    } else {
      ++rep.excluded_noun;
    }
    if (ic.exact.verb) {
      ve += *ic.exact.verb;
      vf += *ic.fuzzy.verb;
      ++v_count;
    } else {
      ++rep.excluded_verb;
    }
    rep.per_image.push_back(std::move(ic));
  }
  if (n_count) {
    rep.noun_exact = ne / static_cast<double>(n_count);
    rep.noun_fuzzy = nf / static_cast<double>(n_count);
  }
  if (v_count) {
    rep.verb_exact = ve / static_cast<double>(v_count);
    rep.verb_fuzzy = vf / static_cast<double>(v_count);
  }
  return rep;
}

const std::vector<std::string>& default_uncertainty_lexicon() {
  static const std::vector<std::string> lexicon = {
      "likely", "probably", "possibly", "may", "might", "unsure", "not sure", "appears", "seems"};
  return lexicon;
}

bool contains_lexicon_term(std::string_view text, const std::vector<std::string>& lexicon) {
  const auto tokens = tokenize(text);
  for (const auto& term : lexicon) {
    const auto parts = tokenize(term);
    if (parts.empty() || parts.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + parts.size() <= tokens.size(); ++i) {
      if (std::equal(parts.begin(), parts.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i)))
        return true;
    }
  }
  return false;
}

double llop(const std::vector<std::string>& captions, const std::vector<std::string>& lexicon) {
  if (captions.empty()) throw InsufficientDataError("llop of an empty caption list");
  std::size_t hits = 0;
  for (const auto& c : captions)
    if (contains_lexicon_term(c, lexicon)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(captions.size());
}

LengthStats length_stats(const std::vector<std::string>& captions) {
  if (captions.empty()) throw InsufficientDataError("length_stats of an empty caption list");
  double chars = 0, commas = 0;
  for (const auto& c : captions) {
    for (unsigned char ch : c) {
      if ((ch & 0xC0) != 0x80) chars += 1;
      if (ch == ',') commas += 1;
    }
  }
  const auto n = static_cast<double>(captions.size());
  return LengthStats{chars / n, commas / n};
}

}  // namespace capcom::coverage
