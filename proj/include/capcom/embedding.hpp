#pragma once

#include <string_view>
#include <vector>

namespace capcom {

enum class Modality { Text, Image };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view s);

struct EmbeddingVector {
  std::vector<double> values;
  Modality modality = Modality::Text;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

}  // namespace capcom
