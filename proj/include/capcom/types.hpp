#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace capcom {

struct ImageRecord {
  std::string image_id;
  std::string image_uri;
  std::vector<std::string> references;

  bool operator==(const ImageRecord&) const = default;
};

// Ordered collection of records with unique ids. Construct through
// DatasetSplit::make (or the loaders), which enforce the record invariants.
class DatasetSplit {
 public:
  DatasetSplit() = default;

  static DatasetSplit make(std::string name, std::vector<ImageRecord> records);

  const std::string& name() const noexcept { return name_; }
  const std::vector<ImageRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const ImageRecord* find(std::string_view id) const;

  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

  bool operator==(const DatasetSplit&) const = default;

 private:
  std::string name_;
  std::vector<ImageRecord> records_;
};

enum class CaptionSource { BaselineBeam, Sampled, Summary, Reference };

std::string_view to_string(CaptionSource s);

struct GenParams {
  std::optional<double> temperature;
  std::optional<int> beams;
  std::int64_t seed = 0;

  bool operator==(const GenParams&) const = default;
};

struct Caption {
  std::string text;
  CaptionSource source = CaptionSource::Sampled;
  std::optional<GenParams> gen_params;

  bool operator==(const Caption&) const = default;
};

// Throws ValidationError when the caption breaks its invariants (blank text,
// sampled without temperature, baseline without beam count).
void validate(const Caption& c);

struct CandidateSet {
  std::string image_id;
  std::vector<Caption> captions;
  double temperature = 1.0;
  int k = 0;

  std::vector<std::string> texts() const;
};

void validate(const CandidateSet& c);

// Throws ValidationError when the record is not well formed.
void validate(const ImageRecord& r);

}  // namespace capcom
