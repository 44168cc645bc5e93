#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace capcom::glicko {

struct Rating {
  double rating = 1500.0;
  double rd = 350.0;
  double volatility = 0.06;

  bool operator==(const Rating&) const = default;
};

struct GlickoConfig {
  double tau = 0.5;
  double epsilon = 1e-6;  // volatility iteration tolerance
  int max_iterations = 1000;
  Rating initial;

  void validate() const;
};

// One game from the first player's point of view.
struct Game {
  Rating opponent;
  double score = 0.0;  // 1 win, 0.5 draw, 0 loss
};

// One rating period for a single player against opponents' pre-period
// ratings. With no games only the deviation grows.
Rating update_player(const Rating& player, const std::vector<Game>& games,
                     const GlickoConfig& config = {});

struct MatchResult {
  std::string model_a;
  std::string model_b;
  double score_a = 0.0;  // 0, 0.5 or 1
};

class GlickoState {
 public:
  explicit GlickoState(GlickoConfig config = {});

  void register_model(const std::string& name);
  bool has_model(const std::string& name) const;
  const Rating& rating(const std::string& name) const;
  void set_rating(const std::string& name, Rating r);
  std::vector<std::string> models() const;
  long games(const std::string& name) const;
  const GlickoConfig& config() const noexcept { return config_; }

  // Sorted by model name; number formatting is deterministic.
  nlohmann::json to_json() const;

 private:
  friend GlickoState glicko_update(const GlickoState&, const std::vector<MatchResult>&);
  GlickoConfig config_;
  std::map<std::string, Rating> ratings_;
  std::map<std::string, long> games_;
};

// Applies one rating period. Every model in `results` must be registered;
// registered models without games only have their deviation inflated.
GlickoState glicko_update(const GlickoState& state, const std::vector<MatchResult>& results);

}  // namespace capcom::glicko
