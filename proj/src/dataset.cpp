#include "capcom/dataset.hpp"

#include "json.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "capcom/errors.hpp"
#include "capcom/hashing.hpp"
#include "capcom/io.hpp"
#include "capcom/text.hpp"

namespace capcom {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ImageRecord record_from_json(const json& j, const std::string& locus) {
  if (!j.is_object()) throw ParseError(locus, "record is not an object");
  auto str_field = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw ParseError(locus, std::string("missing string field \"") + key + "\"");
    return it->get<std::string>();
  };
  ImageRecord r;
  r.image_id = str_field("image_id");
  r.image_uri = str_field("image_uri");
  auto refs = j.find("references");
  if (refs == j.end() || !refs->is_array())
    throw ParseError(locus, "missing array field \"references\"");
  for (const auto& ref : *refs) {
    if (!ref.is_string()) throw ParseError(locus, "reference is not a string");
    r.references.push_back(ref.get<std::string>());
  }
  if (r.image_id.empty()) throw ParseError(locus, "empty image_id");
  if (r.references.empty()) throw ParseError(locus, "empty references for " + r.image_id);
  return r;
}

}  // namespace

SplitFormat parse_split_format(std::string_view s) {
  if (s == "jsonl") return SplitFormat::Jsonl;
  if (s == "karpathy-json" || s == "karpathy") return SplitFormat::KarpathyJson;
  throw ValidationError("unknown split format: " + std::string(s));
}

DatasetSplit parse_jsonl_split(std::string_view text, std::string name) {
  std::vector<ImageRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = trim(text.substr(pos, nl - pos));
    ++line_no;
    pos = nl + 1;
    if (line.empty()) continue;
    const auto locus = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(locus, e.what());
    }
    records.push_back(record_from_json(j, locus));
  }
  return DatasetSplit::make(std::move(name), std::move(records));
}

DatasetSplit parse_karpathy_split(std::string_view text, std::string name,
                                  std::string_view karpathy_split) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("document", e.what());
  }
  auto images = j.find("images");
  if (images == j.end() || !images->is_array())
    throw ParseError("document", "missing \"images\" array");
  std::vector<ImageRecord> records;
  std::size_t idx = 0;
  for (const auto& img : *images) {
    const auto locus = "images[" + std::to_string(idx++) + "]";
    if (!img.is_object()) throw ParseError(locus, "image entry is not an object");
    if (img.value("split", std::string{}) != karpathy_split) continue;
    const auto filename = img.value("filename", std::string{});
    if (filename.empty()) throw ParseError(locus, "missing filename");
    ImageRecord r;
    if (img.contains("cocoid")) {
      r.image_id = std::to_string(img.at("cocoid").get<long long>());
    } else {
      const auto dot = filename.rfind('.');
      r.image_id = filename.substr(0, dot);
    }
    const auto filepath = img.value("filepath", std::string{});
    r.image_uri = filepath.empty() ? filename : filepath + "/" + filename;
    auto sents = img.find("sentences");
    if (sents == img.end() || !sents->is_array())
      throw ParseError(locus, "missing \"sentences\" array");
    for (const auto& s : *sents) {
      if (!s.is_object() || !s.contains("raw") || !s.at("raw").is_string())
        throw ParseError(locus, "sentence without \"raw\" text");
      r.references.push_back(s.at("raw").get<std::string>());
    }
    if (r.references.empty()) throw ParseError(locus, "empty references for " + r.image_id);
    records.push_back(std::move(r));
  }
  return DatasetSplit::make(std::move(name), std::move(records));
}

DatasetSplit load_split(const std::filesystem::path& path, SplitFormat format,
                        std::string_view karpathy_split) {
  if (!std::filesystem::exists(path)) throw Error("split file not found: " + path.string());
  const auto text = read_file(path);
  auto name = path.stem().string();
  if (format == SplitFormat::Jsonl) return parse_jsonl_split(text, std::move(name));
  return parse_karpathy_split(text, std::move(name), karpathy_split);
}

std::string to_jsonl(const DatasetSplit& split) {
  std::string out;
  for (const auto& r : split) {
    ordered_json j;
    j["image_id"] = r.image_id;
    j["image_uri"] = r.image_uri;
    j["references"] = r.references;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_split(const DatasetSplit& split, const std::filesystem::path& path) {
  write_file_atomic(path, to_jsonl(split));
}

DatasetSplit subset(const DatasetSplit& split, const std::vector<std::string>& ids,
                    std::string name) {
  std::vector<ImageRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto* r = split.find(id);
    if (!r) throw UnknownIdError(id);
    out.push_back(*r);
  }
  return DatasetSplit::make(name.empty() ? split.name() : std::move(name), std::move(out));
}

std::vector<std::string> sample_ids(const DatasetSplit& split, std::size_t n,
                                    std::uint64_t seed) {
  if (n > split.size())
    throw ValidationError("cannot sample " + std::to_string(n) + " ids from split of " +
                          std::to_string(split.size()));
  std::vector<std::size_t> idx(split.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates with explicit modulo draws: std::shuffle and
  // uniform_int_distribution are not specified bit-for-bit across libraries.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(split.records()[idx[i]].image_id);
  return ids;
}

std::string fingerprint(const DatasetSplit& split) { return sha256_hex(to_jsonl(split)); }

}  // namespace capcom
