#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "capcom/glicko.hpp"
#include "capcom/stats.hpp"

namespace capcom::human_eval {

inline constexpr int kSessionTasks = 10;

enum class Activity { Mos, Head2Head };
std::string to_string(Activity a);
Activity parse_activity(std::string_view s);

enum class Axis { Helpfulness, Correctness };
inline constexpr Axis kAxes[] = {Axis::Helpfulness, Axis::Correctness};
std::string to_string(Axis a);

// Option lists shown to raters, ordered by ascending score.
const std::vector<std::string>& helpfulness_options();  // 0..4
const std::vector<std::string>& correctness_options();  // 0..5

// One image with a caption per model.
struct PoolItem {
  std::string image_id;
  std::string image_uri;
  std::map<std::string, std::string> captions;  // model -> caption
};

class TaskPool {
 public:
  static TaskPool parse_jsonl(std::string_view text);
  static TaskPool load(const std::filesystem::path& path);
  static TaskPool make(std::vector<PoolItem> items);

  const std::vector<PoolItem>& items() const noexcept { return items_; }
  std::vector<std::string> models() const;
  const PoolItem& find(const std::string& image_id) const;
  bool empty() const noexcept { return items_.empty(); }

 private:
  std::vector<PoolItem> items_;
  std::map<std::string, std::size_t> index_;
};

struct Task {
  std::string task_id;
  std::string image_id;
  std::string image_uri;
  // MOS
  std::string model;
  std::string caption;
  // Head-to-head; model labels stay server-side.
  std::string model_a;
  std::string model_b;
  std::string caption_a;
  std::string caption_b;

  bool operator==(const Task&) const = default;
};

nlohmann::json task_to_json(const Task& t, Activity a);  // includes labels
Task task_from_json(const nlohmann::json& j);
nlohmann::json task_to_client_json(const Task& t, Activity a);  // no labels

struct MosScore {
  int helpfulness = 0;  // 0..4
  int correctness = 0;  // 0..5
  bool operator==(const MosScore&) const = default;
};

enum class Winner { A, B, Tie };
std::string to_string(Winner w);

struct H2HJudgment {
  Winner helpfulness = Winner::Tie;
  Winner correctness = Winner::Tie;
  Winner on(Axis axis) const { return axis == Axis::Helpfulness ? helpfulness : correctness; }
  bool operator==(const H2HJudgment&) const = default;
};

enum class SkipReason { CantTell, NotVisible };
std::string to_string(SkipReason r);

using RatingPayload = std::variant<MosScore, H2HJudgment, SkipReason>;

// Parses a client payload for the given activity. Out-of-range scores throw
// RatingRangeError; malformed payloads throw ValidationError.
RatingPayload parse_payload(const nlohmann::json& j, Activity activity);
nlohmann::json payload_to_json(const RatingPayload& p);

struct RatingEvent {
  std::string session_id;
  std::string task_id;
  std::string timestamp;
  RatingPayload payload;
};

struct Session {
  std::string session_id;
  Activity activity = Activity::Mos;
  std::string rater_id;
  std::uint64_t seed = 0;
  std::vector<Task> tasks;
  std::set<std::string> answered;  // rated or skipped task ids
  int remaining = kSessionTasks;
  std::vector<RatingEvent> completed_events;
  std::optional<std::string> completion_code;

  const Task* find_task(const std::string& task_id) const;
  const Task* next_task() const;  // first unanswered task, if any
  int valid_ratings() const;
};

nlohmann::json session_to_client_json(const Session& s);

// One valid judgment kept for analysis, in log order.
struct Judgment {
  std::string rater_id;
  std::string session_id;
  Activity activity = Activity::Mos;
  Task task;
  RatingPayload payload;
};

struct H2HTestResult {
  std::string model_a;
  std::string model_b;
  Axis axis = Axis::Helpfulness;
  double win_pct_a = 0.0;
  double win_pct_b = 0.0;
  double tie_pct = 0.0;
  long judgments = 0;
  long raters = 0;
  stats::TTestResult test;
};

// Per rater: mean of +1 (A wins), -1 (B wins), 0 (tie) over that rater's
// judgments on the pair in either presentation order; then a one-sided
// one-sample t-test of the rater means against zero. Needs two raters.
H2HTestResult h2h_test(const std::vector<Judgment>& judgments,
                       const std::pair<std::string, std::string>& pair, Axis axis);

struct MosTestResult {
  double mean_model = 0.0;
  double mean_baseline = 0.0;
  stats::TTestResult test;
};

// One-sided Welch test of model > baseline over per-rater mean scores.
MosTestResult mos_test(const std::vector<double>& model_rater_means,
                       const std::vector<double>& baseline_rater_means);

// Per-rater mean MOS for one model and axis, ordered by rater id.
std::vector<double> mos_rater_means(const std::vector<Judgment>& judgments,
                                    const std::string& model, Axis axis);

// Append-only JSONL log. Every line carries "v":1.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path);

  // Reads all events. A malformed line throws ParseError, except an
  // unterminated final line left by an interrupted write, which is dropped
  // and truncated away.
  std::vector<nlohmann::json> read_all();
  void append(const nlohmann::json& event);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

struct ServiceConfig {
  std::filesystem::path data_dir;  // holds events.jsonl and snapshot.json
  std::uint64_t seed = 0;
  glicko::GlickoConfig glicko;
};

// Owns sessions, the event log, and per-axis Glicko state. All mutations
// append to the log first and then apply the logged event, so replay
// reproduces state exactly. Thread-safe; calls serialize on one mutex.
class RatingService {
 public:
  RatingService(TaskPool pool, ServiceConfig config);

  nlohmann::json create_session(Activity activity, const std::string& rater_id);
  // Explicit seed variant for tests and reproducible studies.
  nlohmann::json create_session(Activity activity, const std::string& rater_id,
                                std::uint64_t seed);

  // Returns {remaining, next_task} or {remaining, completion_code}.
  nlohmann::json submit(const std::string& session_id, const std::string& task_id,
                        const nlohmann::json& payload);

  nlohmann::json session_view(const std::string& session_id) const;
  nlohmann::json glicko_report() const;
  nlohmann::json tests_report(const std::string& model_a, const std::string& model_b) const;

  Session session(const std::string& session_id) const;
  std::vector<Judgment> judgments() const;
  glicko::GlickoState glicko(Axis axis) const;
  long events_applied() const;

  // Tasks a new session created with `seed` would receive, in presentation
  // order. Does not modify state.
  std::vector<Task> plan_tasks(Activity activity, std::uint64_t seed) const;

 private:
  void replay();
  void apply(const nlohmann::json& event);
  void commit(const nlohmann::json& event);
  void write_snapshot() const;
  nlohmann::json glicko_json() const;
  nlohmann::json create_locked(Activity activity, const std::string& rater_id,
                               std::uint64_t seed);
  std::vector<Task> plan_tasks_locked(Activity activity, std::uint64_t seed) const;
  // Draws up to n tasks by the pairing policy, skipping keys in `used`.
  std::vector<Task> draw_tasks(Activity activity, std::size_t n, std::mt19937_64& rng,
                               std::set<std::string> used) const;
  double pair_information(const std::string& a, const std::string& b) const;
  Session& find_session(const std::string& id);
  const Session& find_session(const std::string& id) const;

  TaskPool pool_;
  ServiceConfig config_;
  EventLog log_;
  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
  std::vector<Judgment> judgments_;
  std::map<Axis, glicko::GlickoState> glicko_;
  std::map<std::pair<std::string, std::string>, long> meetings_;     // sorted pair
  std::map<std::pair<std::string, std::string>, long> mos_assigned_;  // (image, model)
  long events_applied_ = 0;
  long sessions_created_ = 0;
};

}  // namespace capcom::human_eval
