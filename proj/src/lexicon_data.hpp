#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace capcom::coverage::detail {

const std::vector<std::string_view>& base_nouns();
const std::vector<std::string_view>& base_verbs();
const std::vector<std::pair<std::string_view, std::string_view>>& irregular_nouns();
const std::vector<std::pair<std::string_view, std::string_view>>& irregular_verbs();
const std::vector<std::string_view>& determiners();
const std::vector<std::string_view>& auxiliaries();

}  // namespace capcom::coverage::detail
