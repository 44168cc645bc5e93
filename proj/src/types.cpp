#include "capcom/types.hpp"

#include <unordered_set>

#include "capcom/errors.hpp"
#include "capcom/text.hpp"

namespace capcom {

DatasetSplit DatasetSplit::make(std::string name, std::vector<ImageRecord> records) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    validate(r);
    if (!seen.insert(r.image_id).second) throw DuplicateIdError(r.image_id);
  }
  DatasetSplit s;
  s.name_ = std::move(name);
  s.records_ = std::move(records);
  return s;
}

const ImageRecord* DatasetSplit::find(std::string_view id) const {
  for (const auto& r : records_)
    if (r.image_id == id) return &r;
  return nullptr;
}

std::string_view to_string(CaptionSource s) {
  switch (s) {
    case CaptionSource::BaselineBeam: return "baseline-beam";
    case CaptionSource::Sampled: return "sampled";
    case CaptionSource::Summary: return "summary";
    case CaptionSource::Reference: return "reference";
  }
  return "unknown";
}

void validate(const ImageRecord& r) {
  if (r.image_id.empty()) throw ValidationError("record with empty image_id");
  if (r.references.empty())
    throw ValidationError("record " + r.image_id + " has no references");
}

void validate(const Caption& c) {
  if (trim(c.text).empty()) throw ValidationError("caption text is blank");
  if (c.source == CaptionSource::Sampled &&
      (!c.gen_params || !c.gen_params->temperature))
    throw ValidationError("sampled caption without temperature");
  if (c.source == CaptionSource::BaselineBeam && (!c.gen_params || !c.gen_params->beams))
    throw ValidationError("baseline caption without beam count");
}

void validate(const CandidateSet& c) {
  if (c.k < 1) throw ValidationError("candidate set k must be positive");
  if (!(c.temperature > 0)) throw ValidationError("candidate temperature must be > 0");
  if (static_cast<int>(c.captions.size()) != c.k)
    throw ValidationError("candidate set size does not match k");
  for (const auto& cap : c.captions) {
    if (cap.source != CaptionSource::Sampled && cap.source != CaptionSource::Reference)
      throw ValidationError("candidate caption has wrong source");
    if (cap.source == CaptionSource::Sampled) validate(cap);
  }
}

std::vector<std::string> CandidateSet::texts() const {
  std::vector<std::string> out;
  out.reserve(captions.size());
  for (const auto& c : captions) out.push_back(c.text);
  return out;
}

}  // namespace capcom
