#include "capcom/glicko.hpp"

#include <cmath>
#include <numbers>

#include "capcom/errors.hpp"

namespace capcom::glicko {

namespace {

constexpr double kScale = 173.7178;

double g(double phi) {
  return 1.0 / std::sqrt(1.0 + 3.0 * phi * phi / (std::numbers::pi * std::numbers::pi));
}

double expected(double mu, double mu_j, double phi_j) {
  return 1.0 / (1.0 + std::exp(-g(phi_j) * (mu - mu_j)));
}

// Illinois-style regula falsi for the new volatility.
double solve_volatility(double phi, double sigma, double delta, double v,
                        const GlickoConfig& cfg) {
  const double a = std::log(sigma * sigma);
  const double tau2 = cfg.tau * cfg.tau;
  auto f = [&](double x) {
    const double ex = std::exp(x);
    const double d = phi * phi + v + ex;
    return ex * (delta * delta - phi * phi - v - ex) / (2.0 * d * d) - (x - a) / tau2;
  };

  double A = a;
  double B;
  if (delta * delta > phi * phi + v) {
    B = std::log(delta * delta - phi * phi - v);
  } else {
    int k = 1;
    while (f(a - k * cfg.tau) < 0) {
      if (++k > cfg.max_iterations) throw ConvergenceError("volatility bracket search did not converge");
    }
    B = a - k * cfg.tau;
  }
  double fA = f(A);
  double fB = f(B);
  int iter = 0;
  while (std::abs(B - A) > cfg.epsilon) {
    if (++iter > cfg.max_iterations) throw ConvergenceError("volatility iteration did not converge");
    const double C = A + (A - B) * fA / (fB - fA);
    const double fC = f(C);
    if (fC * fB <= 0) {
      A = B;
      fA = fB;
    } else {
      fA /= 2.0;
    }
    B = C;
    fB = fC;
  }
  return std::exp(A / 2.0);
}

}  // namespace

void GlickoConfig::validate() const {
  if (!(tau > 0)) throw ValidationError("tau must be positive");
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (!(initial.rd > 0) || !(initial.volatility > 0))
    throw ValidationError("initial rd and volatility must be positive");
}

Rating update_player(const Rating& player, const std::vector<Game>& games,
                     const GlickoConfig& config) {
  const double mu = (player.rating - 1500.0) / kScale;
  const double phi = player.rd / kScale;
  const double sigma = player.volatility;

  if (games.empty()) {
    return {player.rating, std::sqrt(phi * phi + sigma * sigma) * kScale, sigma};
  }

  double inv_v = 0.0;
  double sum = 0.0;
  for (const auto& game : games) {
    const double mu_j = (game.opponent.rating - 1500.0) / kScale;
    const double phi_j = game.opponent.rd / kScale;
    const double gj = g(phi_j);
    const double e = expected(mu, mu_j, phi_j);
    inv_v += gj * gj * e * (1.0 - e);
    sum += gj * (game.score - e);
  }
  const double v = 1.0 / inv_v;
  const double delta = v * sum;

  const double sigma_new = solve_volatility(phi, sigma, delta, v, config);
  const double phi_star = std::sqrt(phi * phi + sigma_new * sigma_new);
  const double phi_new = 1.0 / std::sqrt(1.0 / (phi_star * phi_star) + 1.0 / v);
  const double mu_new = mu + phi_new * phi_new * sum;
  return {mu_new * kScale + 1500.0, phi_new * kScale, sigma_new};
}

GlickoState::GlickoState(GlickoConfig config) : config_(config) { config_.validate(); }

void GlickoState::register_model(const std::string& name) {
  if (name.empty()) throw ValidationError("model name must be non-empty");
  ratings_.try_emplace(name, config_.initial);
  games_.try_emplace(name, 0);
}

bool GlickoState::has_model(const std::string& name) const { return ratings_.count(name) > 0; }

const Rating& GlickoState::rating(const std::string& name) const {
  auto it = ratings_.find(name);
  if (it == ratings_.end()) throw UnknownIdError(name);
  return it->second;
}

void GlickoState::set_rating(const std::string& name, Rating r) {
  if (!(r.rd > 0) || !(r.volatility > 0)) throw ValidationError("rd and volatility must be positive");
  register_model(name);
  ratings_[name] = r;
}

std::vector<std::string> GlickoState::models() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : ratings_) out.push_back(name);
  return out;
}

long GlickoState::games(const std::string& name) const {
  auto it = games_.find(name);
  if (it == games_.end()) throw UnknownIdError(name);
  return it->second;
}

nlohmann::json GlickoState::to_json() const {
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [name, r] : ratings_) {
    models[name] = {{"rating", r.rating},
                    {"rd", r.rd},
                    {"volatility", r.volatility},
                    {"games", games_.at(name)}};
  }
  return {{"tau", config_.tau}, {"models", models}};
}

GlickoState glicko_update(const GlickoState& state, const std::vector<MatchResult>& results) {
  std::map<std::string, std::vector<Game>> games;
  for (const auto& m : results) {
    if (!state.has_model(m.model_a)) throw UnknownIdError(m.model_a);
    if (!state.has_model(m.model_b)) throw UnknownIdError(m.model_b);
    if (m.model_a == m.model_b) throw ValidationError("a model cannot play itself: " + m.model_a);
    if (m.score_a != 0.0 && m.score_a != 0.5 && m.score_a != 1.0)
      throw ValidationError("score must be 0, 0.5 or 1");
    games[m.model_a].push_back({state.rating(m.model_b), m.score_a});
    games[m.model_b].push_back({state.rating(m.model_a), 1.0 - m.score_a});
  }
  GlickoState next = state;
  for (const auto& [name, r] : state.ratings_) {
    auto it = games.find(name);
    const auto& played = it == games.end() ? std::vector<Game>{} : it->second;
    next.ratings_[name] = update_player(r, played, state.config_);
    next.games_[name] += static_cast<long>(played.size());
  }
  return next;
}

}  // namespace capcom::glicko
