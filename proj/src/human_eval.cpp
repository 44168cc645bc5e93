#include "capcom/human_eval.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <random>

#include "capcom/errors.hpp"
#include "capcom/io.hpp"

namespace capcom::human_eval {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string random_token(std::size_t len, std::string_view alphabet) {
  std::random_device rd;
  std::string out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i) out += alphabet[rd() % alphabet.size()];
  return out;
}

std::string now_iso8601() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
  return out;
}

std::pair<std::string, std::string> sorted_pair(const std::string& a, const std::string& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

std::string task_key(const Task& t, Activity a) {
  if (a == Activity::Mos) return t.image_id + '\x1f' + t.model;
  auto [x, y] = sorted_pair(t.model_a, t.model_b);
  return t.image_id + '\x1f' + x + '\x1f' + y;
}

Winner parse_winner(const json& j, const char* axis) {
  if (!j.contains(axis)) throw ValidationError(std::string("missing head-to-head axis: ") + axis);
  const auto& v = j.at(axis);
  if (!v.is_string()) throw ValidationError(std::string(axis) + " must be \"A\", \"B\" or \"tie\"");
  const auto s = v.get<std::string>();
  if (s == "A") return Winner::A;
  if (s == "B") return Winner::B;
  if (s == "tie") return Winner::Tie;
  throw RatingRangeError(std::string(axis) + " must be \"A\", \"B\" or \"tie\", got \"" + s + "\"");
}

int parse_score(const json& j, const char* axis, int max) {
  if (!j.contains(axis)) throw ValidationError(std::string("missing score: ") + axis);
  const auto& v = j.at(axis);
  if (!v.is_number_integer()) throw ValidationError(std::string(axis) + " must be an integer");
  const auto x = v.get<long long>();
  if (x < 0 || x > max)
    throw RatingRangeError(std::string(axis) + " must be in 0.." + std::to_string(max));
  return static_cast<int>(x);
}

double winner_score(Winner w) {
  switch (w) {
    case Winner::A: return 1.0;
    case Winner::B: return 0.0;
    case Winner::Tie: return 0.5;
  }
  return 0.5;
}

}  // namespace

std::string to_string(Activity a) { return a == Activity::Mos ? "mos" : "head2head"; }

Activity parse_activity(std::string_view s) {
  if (s == "mos") return Activity::Mos;
  if (s == "head2head") return Activity::Head2Head;
  throw ValidationError("unknown activity: " + std::string(s));
}

std::string to_string(Axis a) { return a == Axis::Helpfulness ? "helpfulness" : "correctness"; }

std::string to_string(Winner w) {
  switch (w) {
    case Winner::A: return "A";
    case Winner::B: return "B";
    case Winner::Tie: return "tie";
  }
  return "tie";
}

std::string to_string(SkipReason r) {
  return r == SkipReason::CantTell ? "cant_tell" : "not_visible";
}

const std::vector<std::string>& helpfulness_options() {
  static const std::vector<std::string> opts = {"Not helpful at all", "Slightly helpful",
                                                "Moderately helpful", "Helpful", "Very helpful"};
  return opts;
}

const std::vector<std::string>& correctness_options() {
  static const std::vector<std::string> opts = {"Completely wrong", "Mostly wrong",
                                                "Slightly wrong",   "Slightly right",
                                                "Mostly right",     "Completely right"};
  return opts;
}

// ---- pool

TaskPool TaskPool::make(std::vector<PoolItem> items) {
  TaskPool pool;
  for (auto& item : items) {
    if (item.image_id.empty()) throw ValidationError("pool item has empty image_id");
    if (item.image_uri.empty()) throw ValidationError("pool item " + item.image_id + " has empty image_uri");
    for (const auto& [model, caption] : item.captions) {
      if (model.empty()) throw ValidationError("pool item " + item.image_id + " has an empty model name");
      if (caption.empty())
        throw ValidationError("pool item " + item.image_id + " has an empty caption for " + model);
    }
    if (!pool.index_.emplace(item.image_id, pool.items_.size()).second)
      throw DuplicateIdError(item.image_id);
    pool.items_.push_back(std::move(item));
  }
  return pool;
}

TaskPool TaskPool::parse_jsonl(std::string_view text) {
  std::vector<PoolItem> items;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto locus = "line " + std::to_string(line_no);
    try {
      auto j = json::parse(line);
      PoolItem item;
      item.image_id = j.at("image_id").get<std::string>();
      item.image_uri = j.at("image_uri").get<std::string>();
      for (const auto& [model, caption] : j.at("captions").items())
        item.captions[model] = caption.get<std::string>();
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw ParseError(locus, e.what());
    }
  }
  return make(std::move(items));
}

TaskPool TaskPool::load(const std::filesystem::path& path) { return parse_jsonl(read_file(path)); }

std::vector<std::string> TaskPool::models() const {
  std::set<std::string> names;
  for (const auto& item : items_)
    for (const auto& [model, _] : item.captions) names.insert(model);
  return {names.begin(), names.end()};
}

const PoolItem& TaskPool::find(const std::string& image_id) const {
  auto it = index_.find(image_id);
  if (it == index_.end()) throw UnknownIdError(image_id);
  return items_[it->second];
}

// ---- tasks and payloads

json task_to_json(const Task& t, Activity a) {
  json j = {{"task_id", t.task_id}, {"image_id", t.image_id}, {"image_uri", t.image_uri}};
  if (a == Activity::Mos) {
    j["model"] = t.model;
    j["caption"] = t.caption;
  } else {
    j["model_a"] = t.model_a;
    j["model_b"] = t.model_b;
    j["caption_a"] = t.caption_a;
    j["caption_b"] = t.caption_b;
  }
  return j;
}

Task task_from_json(const json& j) {
  Task t;
  t.task_id = j.at("task_id").get<std::string>();
  t.image_id = j.at("image_id").get<std::string>();
  t.image_uri = j.at("image_uri").get<std::string>();
  t.model = j.value("model", "");
  t.caption = j.value("caption", "");
  t.model_a = j.value("model_a", "");
  t.model_b = j.value("model_b", "");
  t.caption_a = j.value("caption_a", "");
  t.caption_b = j.value("caption_b", "");
  return t;
}

json task_to_client_json(const Task& t, Activity a) {
  json j = {{"task_id", t.task_id}, {"image_uri", t.image_uri}};
  if (a == Activity::Mos) {
    j["caption"] = t.caption;
  } else {
    j["caption_a"] = t.caption_a;
    j["caption_b"] = t.caption_b;
  }
  return j;
}

RatingPayload parse_payload(const json& j, Activity activity) {
  if (!j.is_object()) throw ValidationError("rating payload must be an object");
  if (j.contains("skip")) {
    if (j.size() != 1) throw ValidationError("a skip payload carries no scores");
    const auto& v = j.at("skip");
    if (v == "cant_tell") return SkipReason::CantTell;
    if (v == "not_visible") return SkipReason::NotVisible;
    throw ValidationError("skip must be \"cant_tell\" or \"not_visible\"");
  }
  for (const auto& [key, _] : j.items())
    if (key != "helpfulness" && key != "correctness")
      throw ValidationError("unexpected payload field: " + key);
  if (activity == Activity::Mos)
    return MosScore{parse_score(j, "helpfulness", 4), parse_score(j, "correctness", 5)};
  return H2HJudgment{parse_winner(j, "helpfulness"), parse_winner(j, "correctness")};
}

json payload_to_json(const RatingPayload& p) {
  if (const auto* m = std::get_if<MosScore>(&p))
    return {{"helpfulness", m->helpfulness}, {"correctness", m->correctness}};
  if (const auto* h = std::get_if<H2HJudgment>(&p))
    return {{"helpfulness", to_string(h->helpfulness)}, {"correctness", to_string(h->correctness)}};
  return {{"skip", to_string(std::get<SkipReason>(p))}};
}

// ---- sessions

const Task* Session::find_task(const std::string& task_id) const {
  for (const auto& t : tasks)
    if (t.task_id == task_id) return &t;
  return nullptr;
}

const Task* Session::next_task() const {
  if (completion_code) return nullptr;
  for (const auto& t : tasks)
    if (!answered.count(t.task_id)) return &t;
  return nullptr;
}

int Session::valid_ratings() const {
  int n = 0;
  for (const auto& e : completed_events)
    if (!std::holds_alternative<SkipReason>(e.payload)) ++n;
  return n;
}

json session_to_client_json(const Session& s) {
  json skip = json::array({"cant_tell", "not_visible"});
  json options = {{"helpfulness", s.activity == Activity::Mos ? json(helpfulness_options())
                                                               : json::array({"A", "B", "tie"})},
                  {"correctness", s.activity == Activity::Mos ? json(correctness_options())
                                                               : json::array({"A", "B", "tie"})},
                  {"skip", skip}};
  json j = {{"session_id", s.session_id},
            {"activity", to_string(s.activity)},
            {"rater_id", s.rater_id},
            {"total", kSessionTasks},
            {"remaining", s.remaining},
            {"completed", s.valid_ratings()},
            {"options", options}};
  if (const auto* t = s.next_task()) j["task"] = task_to_client_json(*t, s.activity);
  else j["task"] = nullptr;
  if (s.completion_code) j["completion_code"] = *s.completion_code;
  return j;
}

// ---- analysis

H2HTestResult h2h_test(const std::vector<Judgment>& judgments,
                       const std::pair<std::string, std::string>& pair, Axis axis) {
  H2HTestResult r;
  r.model_a = pair.first;
  r.model_b = pair.second;
  r.axis = axis;
  std::map<std::string, std::vector<double>> per_rater;
  long wins_a = 0, wins_b = 0, ties = 0;
  for (const auto& j : judgments) {
    if (j.activity != Activity::Head2Head) continue;
    const auto* h = std::get_if<H2HJudgment>(&j.payload);
    if (!h) continue;
    const bool forward = j.task.model_a == pair.first && j.task.model_b == pair.second;
    const bool reverse = j.task.model_a == pair.second && j.task.model_b == pair.first;
    if (!forward && !reverse) continue;
    double s = 0.0;
    switch (h->on(axis)) {
      case Winner::A: s = forward ? 1.0 : -1.0; break;
      case Winner::B: s = forward ? -1.0 : 1.0; break;
      case Winner::Tie: s = 0.0; break;
    }
    if (s > 0) ++wins_a;
    else if (s < 0) ++wins_b;
    else ++ties;
    per_rater[j.rater_id].push_back(s);
  }
  r.judgments = wins_a + wins_b + ties;
  r.raters = static_cast<long>(per_rater.size());
  if (r.raters < 2)
    throw InsufficientDataError("head-to-head test needs at least two raters with judgments on " +
                                pair.first + " vs " + pair.second);
  r.win_pct_a = 100.0 * static_cast<double>(wins_a) / static_cast<double>(r.judgments);
  r.win_pct_b = 100.0 * static_cast<double>(wins_b) / static_cast<double>(r.judgments);
  r.tie_pct = 100.0 * static_cast<double>(ties) / static_cast<double>(r.judgments);
  std::vector<double> means;
  for (const auto& [_, xs] : per_rater) means.push_back(stats::mean(xs));
  r.test = stats::one_sample_t_greater(means, 0.0);
  return r;
}

MosTestResult mos_test(const std::vector<double>& model_rater_means,
                       const std::vector<double>& baseline_rater_means) {
  if (model_rater_means.size() < 2 || baseline_rater_means.size() < 2)
    throw InsufficientDataError("MOS test needs at least two raters per group");
  MosTestResult r;
  r.mean_model = stats::mean(model_rater_means);
  r.mean_baseline = stats::mean(baseline_rater_means);
  r.test = stats::welch_t_greater(model_rater_means, baseline_rater_means);
  return r;
}

std::vector<double> mos_rater_means(const std::vector<Judgment>& judgments,
                                    const std::string& model, Axis axis) {
  std::map<std::string, std::vector<double>> per_rater;
  for (const auto& j : judgments) {
    if (j.activity != Activity::Mos || j.task.model != model) continue;
    const auto* m = std::get_if<MosScore>(&j.payload);
    if (!m) continue;
    per_rater[j.rater_id].push_back(axis == Axis::Helpfulness ? m->helpfulness : m->correctness);
  }
  std::vector<double> out;
  for (const auto& [_, xs] : per_rater) out.push_back(stats::mean(xs));
  return out;
}

// ---- service

RatingService::RatingService(TaskPool pool, ServiceConfig config)
    : pool_(std::move(pool)),
      config_(std::move(config)),
      log_(config_.data_dir / "events.jsonl") {
  config_.glicko.validate();
  for (Axis axis : kAxes) {
    glicko::GlickoState state(config_.glicko);
    for (const auto& m : pool_.models()) state.register_model(m);
    glicko_.emplace(axis, std::move(state));
  }
  replay();
}

void RatingService::replay() {
  const auto events = log_.read_all();
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      apply(events[i]);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(log_.path().string() + " event " + std::to_string(i + 1), e.what());
    }
  }
  const auto snap_path = config_.data_dir / "snapshot.json";
  if (std::filesystem::exists(snap_path)) {
    json snap;
    try {
      snap = json::parse(read_file(snap_path));
    } catch (const json::exception& e) {
      throw ParseError(snap_path.string(), e.what());
    }
    if (snap.value("events", -1L) == events_applied_ && snap.value("glicko", json()) != glicko_json())
      throw ParseError(snap_path.string(), "snapshot disagrees with replayed event log");
  }
}

void RatingService::commit(const json& event) {
  log_.append(event);
  apply(event);
  if (event.at("type") == "session_completed") write_snapshot();
}

void RatingService::write_snapshot() const {
  json snap = {{"v", 1}, {"events", events_applied_}, {"glicko", glicko_json()}};
  write_file_atomic(config_.data_dir / "snapshot.json", snap.dump(2) + "\n");
}

void RatingService::apply(const json& event) {
  if (event.value("v", 0) != 1) throw ParseError("event", "unsupported event version");
  const auto type = event.at("type").get<std::string>();
  if (type == "session_created") {
    Session s;
    s.session_id = event.at("session_id").get<std::string>();
    if (sessions_.count(s.session_id)) throw ValidationError("session created twice: " + s.session_id);
    s.activity = parse_activity(event.at("activity").get<std::string>());
    s.rater_id = event.at("rater_id").get<std::string>();
    s.seed = event.at("seed").get<std::uint64_t>();
    for (const auto& tj : event.at("tasks")) s.tasks.push_back(task_from_json(tj));
    if (s.tasks.size() != kSessionTasks) throw ValidationError("session must hold 10 tasks");
    for (const auto& t : s.tasks) {
      if (s.activity == Activity::Mos) {
        ++mos_assigned_[{t.image_id, t.model}];
      } else {
        ++meetings_[sorted_pair(t.model_a, t.model_b)];
        for (auto& [_, g] : glicko_) {
          g.register_model(t.model_a);
          g.register_model(t.model_b);
        }
      }
    }
    sessions_.emplace(s.session_id, std::move(s));
    ++sessions_created_;
  } else if (type == "rating" || type == "skip") {
    auto& s = find_session(event.at("session_id").get<std::string>());
    const auto task_id = event.at("task_id").get<std::string>();
    const Task* task = s.find_task(task_id);
    if (!task) throw UnknownIdError(task_id);
    if (s.answered.count(task_id)) throw DuplicateSubmissionError("task already answered: " + task_id);
    if (s.completion_code) throw ProtocolError("session already complete");
    RatingEvent re{s.session_id, task_id, event.value("ts", ""), SkipReason::CantTell};
    if (type == "rating") {
      re.payload = parse_payload(event.at("payload"), s.activity);
      if (std::holds_alternative<SkipReason>(re.payload))
        throw ValidationError("rating event carries a skip payload");
      judgments_.push_back({s.rater_id, s.session_id, s.activity, *task, re.payload});
      --s.remaining;
    } else {
      re.payload = parse_payload(json{{"skip", event.at("reason")}}, s.activity);
      const auto& rep = event.at("replacement");
      Task t = task_from_json(rep);
      if (s.activity == Activity::Mos) ++mos_assigned_[{t.image_id, t.model}];
      else ++meetings_[sorted_pair(t.model_a, t.model_b)];
      s.tasks.push_back(std::move(t));
    }
    s.answered.insert(task_id);
    s.completed_events.push_back(std::move(re));
  } else if (type == "session_completed") {
    auto& s = find_session(event.at("session_id").get<std::string>());
    if (s.remaining != 0) throw ValidationError("session completed with tasks remaining");
    if (s.completion_code) throw ValidationError("session completed twice");
    s.completion_code = event.at("completion_code").get<std::string>();
    if (s.activity == Activity::Head2Head) {
      for (Axis axis : kAxes) {
        std::vector<glicko::MatchResult> results;
        for (const auto& e : s.completed_events) {
          const auto* h = std::get_if<H2HJudgment>(&e.payload);
          if (!h) continue;
          const Task* t = s.find_task(e.task_id);
          results.push_back({t->model_a, t->model_b, winner_score(h->on(axis))});
        }
        glicko_.at(axis) = glicko::glicko_update(glicko_.at(axis), results);
      }
    }
  } else {
    throw ParseError("event", "unknown event type: " + type);
  }
  ++events_applied_;
}

Session& RatingService::find_session(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownIdError(id);
  return it->second;
}

const Session& RatingService::find_session(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownIdError(id);
  return it->second;
}

double RatingService::pair_information(const std::string& a, const std::string& b) const {
  double info = 0.0;
  for (const auto& [_, g] : glicko_) {
    const double ra = g.has_model(a) ? g.rating(a).rd : config_.glicko.initial.rd;
    const double rb = g.has_model(b) ? g.rating(b).rd : config_.glicko.initial.rd;
    info += ra * ra + rb * rb;
  }
  return info;
}

std::vector<Task> RatingService::draw_tasks(Activity activity, std::size_t n,
                                            std::mt19937_64& rng,
                                            std::set<std::string> used) const {
  std::vector<Task> out;
  const auto models = pool_.models();
  if (activity == Activity::Mos) {
    struct Cand {
      long assigned;
      std::uint64_t key;
      const PoolItem* item;
      std::string model;
    };
    std::vector<Cand> cands;
    for (const auto& item : pool_.items()) {
      for (const auto& [model, _] : item.captions) {
        const std::uint64_t key = rng();
        Task probe;
        probe.image_id = item.image_id;
        probe.model = model;
        if (used.count(task_key(probe, activity))) continue;
        auto it = mos_assigned_.find({item.image_id, model});
        cands.push_back({it == mos_assigned_.end() ? 0 : it->second, key, &item, model});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      if (x.assigned != y.assigned) return x.assigned < y.assigned;
      if (x.key != y.key) return x.key < y.key;
      if (x.item->image_id != y.item->image_id) return x.item->image_id < y.item->image_id;
      return x.model < y.model;
    });
    for (std::size_t i = 0; i < cands.size() && out.size() < n; ++i) {
      Task t;
      t.image_id = cands[i].item->image_id;
      t.image_uri = cands[i].item->image_uri;
      t.model = cands[i].model;
      t.caption = cands[i].item->captions.at(t.model);
      out.push_back(std::move(t));
    }
    return out;
  }

  // Head-to-head: highest combined deviation first, then fewest meetings
  // (including ones planned here), then lexical pair order.
  std::map<std::pair<std::string, std::string>, long> planned;
  while (out.size() < n) {
    const std::pair<std::string, std::string>* best = nullptr;
    std::vector<const PoolItem*> best_images;
    double best_info = -1.0;
    long best_meet = 0;
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < models.size(); ++i)
      for (std::size_t j = i + 1; j < models.size(); ++j) pairs.emplace_back(models[i], models[j]);
    for (const auto& pr : pairs) {
      std::vector<const PoolItem*> images;
      for (const auto& item : pool_.items()) {
        if (!item.captions.count(pr.first) || !item.captions.count(pr.second)) continue;
        if (used.count(item.image_id + '\x1f' + pr.first + '\x1f' + pr.second)) continue;
        images.push_back(&item);
      }
      if (images.empty()) continue;
      const double info = pair_information(pr.first, pr.second);
      auto mit = meetings_.find(pr);
      const long meet = (mit == meetings_.end() ? 0 : mit->second) + planned[pr];
      const bool better = !best || info > best_info || (info == best_info && meet < best_meet);
      if (better) {
        best = &pr;
        best_info = info;
        best_meet = meet;
        best_images = std::move(images);
      }
    }
    if (!best) break;
    const PoolItem* item = best_images[rng() % best_images.size()];
    Task t;
    t.image_id = item->image_id;
    t.image_uri = item->image_uri;
    t.model_a = best->first;
    t.model_b = best->second;
    if (rng() & 1ULL) std::swap(t.model_a, t.model_b);
    t.caption_a = item->captions.at(t.model_a);
    t.caption_b = item->captions.at(t.model_b);
    used.insert(task_key(t, activity));
    ++planned[*best];
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Task> RatingService::plan_tasks_locked(Activity activity, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  auto tasks = draw_tasks(activity, kSessionTasks, rng, {});
  if (tasks.size() < static_cast<std::size_t>(kSessionTasks))
    throw PoolExhaustedError("task pool has " + std::to_string(tasks.size()) +
                             " eligible " + to_string(activity) + " tasks; a session needs " +
                             std::to_string(kSessionTasks));
  std::shuffle(tasks.begin(), tasks.end(), rng);
  for (std::size_t i = 0; i < tasks.size(); ++i) tasks[i].task_id = "t" + std::to_string(i + 1);
  return tasks;
}

std::vector<Task> RatingService::plan_tasks(Activity activity, std::uint64_t seed) const {
  std::lock_guard lock(mu_);
  return plan_tasks_locked(activity, seed);
}

json RatingService::create_session(Activity activity, const std::string& rater_id) {
  std::lock_guard lock(mu_);
  return create_locked(activity, rater_id,
                       splitmix64(config_.seed + static_cast<std::uint64_t>(sessions_created_)));
}

json RatingService::create_session(Activity activity, const std::string& rater_id,
                                   std::uint64_t seed) {
  std::lock_guard lock(mu_);
  return create_locked(activity, rater_id, seed);
}

json RatingService::create_locked(Activity activity, const std::string& rater_id,
                                  std::uint64_t seed) {
  if (rater_id.empty()) throw ValidationError("rater_id must be non-empty");
  auto tasks = plan_tasks_locked(activity, seed);
  std::string id;
  do {
    id = random_token(16, "0123456789abcdef");
  } while (sessions_.count(id));
  json tj = json::array();
  for (const auto& t : tasks) tj.push_back(task_to_json(t, activity));
  commit({{"v", 1},
          {"type", "session_created"},
          {"ts", now_iso8601()},
          {"session_id", id},
          {"activity", to_string(activity)},
          {"rater_id", rater_id},
          {"seed", seed},
          {"tasks", tj}});
  return session_to_client_json(sessions_.at(id));
}

json RatingService::submit(const std::string& session_id, const std::string& task_id,
                           const json& payload) {
  std::lock_guard lock(mu_);
  const auto& s = find_session(session_id);
  if (s.completion_code) throw ProtocolError("session " + session_id + " is already complete");
  const Task* task = s.find_task(task_id);
  if (!task) throw UnknownIdError(task_id);
  if (s.answered.count(task_id)) throw DuplicateSubmissionError("task already answered: " + task_id);
  const auto parsed = parse_payload(payload, s.activity);

  if (const auto* skip = std::get_if<SkipReason>(&parsed)) {
    std::set<std::string> used;
    for (const auto& t : s.tasks) used.insert(task_key(t, s.activity));
    std::mt19937_64 rng(splitmix64(s.seed ^ (0xA5A5A5A5ULL + s.tasks.size())));
    auto drawn = draw_tasks(s.activity, 1, rng, used);
    // With nothing left to draw, the skipped task comes back at the end.
    Task replacement = drawn.empty() ? *task : drawn.front();
    replacement.task_id = "t" + std::to_string(s.tasks.size() + 1);
    commit({{"v", 1},
            {"type", "skip"},
            {"ts", now_iso8601()},
            {"session_id", session_id},
            {"task_id", task_id},
            {"reason", to_string(*skip)},
            {"replacement", task_to_json(replacement, s.activity)}});
  } else {
    commit({{"v", 1},
            {"type", "rating"},
            {"ts", now_iso8601()},
            {"session_id", session_id},
            {"task_id", task_id},
            {"payload", payload_to_json(parsed)}});
    if (s.remaining == 0) {
      commit({{"v", 1},
              {"type", "session_completed"},
              {"ts", now_iso8601()},
              {"session_id", session_id},
              {"completion_code", random_token(12, "ABCDEFGHJKLMNPQRSTUVWXYZ23456789")}});
    }
  }
  json out = {{"remaining", s.remaining}};
  if (s.completion_code) {
    out["completion_code"] = *s.completion_code;
  } else {
    const Task* next = s.next_task();
    out["next_task"] = next ? task_to_client_json(*next, s.activity) : json(nullptr);
  }
  return out;
}

json RatingService::session_view(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return session_to_client_json(find_session(session_id));
}

json RatingService::glicko_report() const {
  std::lock_guard lock(mu_);
  return glicko_json();
}

json RatingService::glicko_json() const {
  json axes = json::object();
  for (const auto& [axis, g] : glicko_) axes[to_string(axis)] = g.to_json();
  return {{"axes", axes}};
}

json RatingService::tests_report(const std::string& model_a, const std::string& model_b) const {
  std::lock_guard lock(mu_);
  json h2h = json::object();
  json mos = json::object();
  for (Axis axis : kAxes) {
    const auto name = to_string(axis);
    try {
      const auto r = h2h_test(judgments_, {model_a, model_b}, axis);
      h2h[name] = {{"win_pct_a", r.win_pct_a}, {"win_pct_b", r.win_pct_b},
                   {"tie_pct", r.tie_pct},     {"judgments", r.judgments},
                   {"raters", r.raters},       {"t", r.test.t},
                   {"df", r.test.df},          {"p_value", r.test.p_value}};
    } catch (const InsufficientDataError& e) {
      h2h[name] = {{"error", e.what()}};
    }
    try {
      const auto r = mos_test(mos_rater_means(judgments_, model_a, axis),
                              mos_rater_means(judgments_, model_b, axis));
      mos[name] = {{"mean_a", r.mean_model}, {"mean_b", r.mean_baseline}, {"t", r.test.t},
                   {"df", r.test.df},        {"p_value", r.test.p_value}};
    } catch (const InsufficientDataError& e) {
      mos[name] = {{"error", e.what()}};
    }
  }
  return {{"pair", {model_a, model_b}}, {"head2head", h2h}, {"mos", mos}};
}

Session RatingService::session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return find_session(session_id);
}

std::vector<Judgment> RatingService::judgments() const {
  std::lock_guard lock(mu_);
  return judgments_;
}

glicko::GlickoState RatingService::glicko(Axis axis) const {
  std::lock_guard lock(mu_);
  return glicko_.at(axis);
}

long RatingService::events_applied() const {
  std::lock_guard lock(mu_);
  return events_applied_;
}

}  // namespace capcom::human_eval
