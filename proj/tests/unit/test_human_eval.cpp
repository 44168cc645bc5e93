#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "capcom/errors.hpp"
#include "capcom/human_eval.hpp"
#include "capcom/io.hpp"
#include "fixtures.hpp"
#include "mock_services.hpp"

using namespace capcom;
using namespace capcom::human_eval;
using nlohmann::json;

namespace {

TaskPool make_pool(std::size_t images, const std::vector<std::string>& models) {
  std::vector<PoolItem> items;
  for (std::size_t i = 0; i < images; ++i) {
    PoolItem it;
    it.image_id = "im" + std::to_string(100 + i);
    it.image_uri = "/img/" + it.image_id + ".jpg";
    for (const auto& m : models) it.captions[m] = "caption " + std::to_string(i) + " by " + m.substr(0, 1) + "x";
    items.push_back(std::move(it));
  }
  return TaskPool::make(std::move(items));
}

ServiceConfig config_for(const std::string& dir, std::uint64_t seed = 1) {
  ServiceConfig c;
  c.data_dir = dir;
  c.seed = seed;
  return c;
}

json mos_rating(int h = 3, int c = 4) { return {{"helpfulness", h}, {"correctness", c}}; }
json h2h_rating(const std::string& h, const std::string& c) { return {{"helpfulness", h}, {"correctness", c}}; }

std::optional<Task> next_of(const RatingService& svc, const std::string& sid) {
  auto s = svc.session(sid);
  if (const Task* t = s.next_task()) return *t;
  return std::nullopt;
}

// Rates every remaining task; the first model in lexical order wins.
void finish_h2h(RatingService& svc, const std::string& sid) {
  while (auto t = next_of(svc, sid)) {
    const std::string w = t->model_a < t->model_b ? "A" : "B";
    svc.submit(sid, t->task_id, h2h_rating(w, w));
  }
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

std::string first_task(const json& view) { return view.at("task").at("task_id").get<std::string>(); }

}  // namespace

TEST(TaskPool, ParsesJsonl) {
  auto pool = TaskPool::parse_jsonl(
      R"({"image_id":"a","image_uri":"/a.jpg","captions":{"m1":"x","m2":"y"}})"
      "\n\n"
      R"({"image_id":"b","image_uri":"/b.jpg","captions":{"m1":"z"}})"
      "\n");
  ASSERT_EQ(pool.items().size(), 2u);
  EXPECT_EQ(pool.models(), (std::vector<std::string>{"m1", "m2"}));
  EXPECT_EQ(pool.find("b").captions.at("m1"), "z");
  EXPECT_THROW(pool.find("c"), UnknownIdError);
  try {
    TaskPool::parse_jsonl("{\"image_id\":\"a\",\"image_uri\":\"u\",\"captions\":{}}\n{bad");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.locus(), "line 2");
  }
  EXPECT_THROW(TaskPool::parse_jsonl(R"({"image_id":"a","image_uri":"u","captions":{"m":""}})"),
               ValidationError);
  EXPECT_THROW(TaskPool::make({{"a", "u", {}}, {"a", "u", {}}}), DuplicateIdError);
}

TEST(Sessions, PoolOfTenGivesThoseTenShuffled) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(10, {"m"}), config_for(dir.path()));
  auto tasks = svc.plan_tasks(Activity::Mos, 42);
  ASSERT_EQ(tasks.size(), 10u);
  std::vector<std::string> ids;
  for (const auto& t : tasks) ids.push_back(t.image_id);
  auto sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(sorted[i], "im" + std::to_string(100 + i));
  EXPECT_NE(ids, sorted);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(tasks[i].task_id, "t" + std::to_string(i + 1));
}

TEST(Sessions, SameSeedSameOrder) {
  capcom::testing::TempDir d1, d2;
  RatingService a(make_pool(30, {"m1", "m2"}), config_for(d1.path()));
  RatingService b(make_pool(30, {"m1", "m2"}), config_for(d2.path()));
  EXPECT_EQ(a.plan_tasks(Activity::Mos, 9), b.plan_tasks(Activity::Mos, 9));
  EXPECT_EQ(a.plan_tasks(Activity::Head2Head, 9), b.plan_tasks(Activity::Head2Head, 9));
  auto sa = a.create_session(Activity::Mos, "r", 9);
  auto sb = b.create_session(Activity::Mos, "r", 9);
  EXPECT_EQ(sa.at("task"), sb.at("task"));
  EXPECT_NE(a.plan_tasks(Activity::Mos, 9), a.plan_tasks(Activity::Mos, 10));
}

TEST(Sessions, MosSpreadsAssignmentsAcrossSessions) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(10, {"m1", "m2"}), config_for(dir.path()));
  auto s1 = svc.session(svc.create_session(Activity::Mos, "r1", 1).at("session_id"));
  auto s2 = svc.session(svc.create_session(Activity::Mos, "r2", 2).at("session_id"));
  std::set<std::string> seen;
  for (const auto* s : {&s1, &s2})
    for (const auto& t : s->tasks) EXPECT_TRUE(seen.insert(t.image_id + "/" + t.model).second);
  EXPECT_EQ(seen.size(), 20u);
}

TEST(Sessions, HeadToHeadPairingMatchesBruteForceRanking) {
  capcom::testing::TempDir dir;
  const std::vector<std::string> models{"a", "b", "c", "d", "e", "f"};
  RatingService svc(make_pool(40, models), config_for(dir.path()));
  std::map<std::pair<std::string, std::string>, long> meetings;

  auto brute_force = [&](std::size_t n) {
    std::multiset<std::pair<std::string, std::string>> picks;
    auto planned = meetings;
    for (std::size_t k = 0; k < n; ++k) {
      struct Row {
        double info;
        long meet;
        std::pair<std::string, std::string> pair;
      };
      std::vector<Row> rows;
      for (std::size_t i = 0; i < models.size(); ++i)
        for (std::size_t j = i + 1; j < models.size(); ++j) {
          double info = 0;
          for (Axis axis : kAxes) {
            const auto g = svc.glicko(axis);
            const double ra = g.rating(models[i]).rd, rb = g.rating(models[j]).rd;
            info += ra * ra + rb * rb;
          }
          rows.push_back({info, planned[{models[i], models[j]}], {models[i], models[j]}});
        }
      std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
        if (x.info != y.info) return x.info > y.info;
        if (x.meet != y.meet) return x.meet < y.meet;
        return x.pair < y.pair;
      });
      picks.insert(rows[0].pair);
      ++planned[rows[0].pair];
    }
    return picks;
  };
  auto pairs_of = [](const std::vector<Task>& tasks) {
    std::multiset<std::pair<std::string, std::string>> out;
    for (const auto& t : tasks) out.insert(std::minmax(t.model_a, t.model_b));
    return out;
  };

  for (int round = 0; round < 4; ++round) {
    const std::uint64_t seed = 100 + static_cast<std::uint64_t>(round);
    const auto planned = svc.plan_tasks(Activity::Head2Head, seed);
    ASSERT_EQ(pairs_of(planned), brute_force(10)) << "round " << round;
    const auto sid = svc.create_session(Activity::Head2Head, "r" + std::to_string(round), seed)
                         .at("session_id")
                         .get<std::string>();
    for (const auto& t : svc.session(sid).tasks) ++meetings[std::minmax(t.model_a, t.model_b)];
    finish_h2h(svc, sid);
  }
}

TEST(Sessions, HeadToHeadOrderIsRandomizedPerTask) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(50, {"x", "y"}), config_for(dir.path()));
  int forward = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (const auto& t : svc.plan_tasks(Activity::Head2Head, seed)) {
      forward += t.model_a == "x";
      ++total;
    }
  EXPECT_EQ(total, 100);
  EXPECT_GT(forward, 20);
  EXPECT_LT(forward, 80);
}

TEST(Submit, ProtocolSteps) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(20, {"m"}), config_for(dir.path()));
  auto view = svc.create_session(Activity::Mos, "rater-1", 5);
  const auto sid = view.at("session_id").get<std::string>();
  EXPECT_EQ(view.at("remaining"), 10);
  EXPECT_EQ(view.at("total"), 10);

  auto r = svc.submit(sid, first_task(view), mos_rating());
  EXPECT_EQ(r.at("remaining"), 9);
  ASSERT_TRUE(r.at("next_task").is_object());

  const auto skipped = r.at("next_task").at("task_id").get<std::string>();
  r = svc.submit(sid, skipped, {{"skip", "cant_tell"}});
  EXPECT_EQ(r.at("remaining"), 9);
  auto s = svc.session(sid);
  EXPECT_EQ(s.tasks.size(), 11u);
  EXPECT_EQ(s.tasks.back().task_id, "t11");
  for (std::size_t i = 0; i + 1 < s.tasks.size(); ++i) EXPECT_NE(s.tasks[i].image_id, s.tasks.back().image_id);

  std::optional<std::string> code;
  while (!code) {
    s = svc.session(sid);
    r = svc.submit(sid, next_of(svc, sid)->task_id, mos_rating(4, 5));
    if (r.contains("completion_code")) code = r.at("completion_code").get<std::string>();
    else EXPECT_GT(r.at("remaining").get<int>(), 0);
  }
  EXPECT_EQ(r.at("remaining"), 0);
  EXPECT_EQ(code->size(), 12u);
  EXPECT_EQ(svc.session(sid).valid_ratings(), 10);
  EXPECT_EQ(svc.session_view(sid).at("completion_code"), *code);
  EXPECT_TRUE(svc.session_view(sid).at("task").is_null());
  EXPECT_THROW(svc.submit(sid, "t1", mos_rating()), ProtocolError);
}

TEST(Submit, SkipWithExhaustedPoolRequeuesTheTask) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(10, {"m"}), config_for(dir.path()));
  auto view = svc.create_session(Activity::Mos, "r", 5);
  const auto sid = view.at("session_id").get<std::string>();
  const auto t1 = first_task(view);
  const auto image = svc.session(sid).find_task(t1)->image_id;
  svc.submit(sid, t1, {{"skip", "not_visible"}});
  auto s = svc.session(sid);
  EXPECT_EQ(s.tasks.back().image_id, image);
  EXPECT_EQ(s.remaining, 10);
}

TEST(Submit, Errors) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(20, {"m", "n"}), config_for(dir.path()));
  auto view = svc.create_session(Activity::Mos, "r", 1);
  const auto sid = view.at("session_id").get<std::string>();
  const auto t = first_task(view);
  EXPECT_THROW(svc.submit(sid, "t99", mos_rating()), UnknownIdError);
  EXPECT_THROW(svc.submit("nope", t, mos_rating()), UnknownIdError);
  EXPECT_THROW(svc.submit(sid, t, mos_rating(5, 0)), RatingRangeError);
  EXPECT_THROW(svc.submit(sid, t, mos_rating(0, 6)), RatingRangeError);
  EXPECT_THROW(svc.submit(sid, t, mos_rating(-1, 0)), RatingRangeError);
  EXPECT_THROW(svc.submit(sid, t, {{"helpfulness", 1}}), ValidationError);
  EXPECT_THROW(svc.submit(sid, t, {{"helpfulness", "1"}, {"correctness", 1}}), ValidationError);
  EXPECT_THROW(svc.submit(sid, t, {{"skip", "bored"}}), ValidationError);
  EXPECT_THROW(svc.submit(sid, t, {{"skip", "cant_tell"}, {"helpfulness", 1}}), ValidationError);
  EXPECT_EQ(svc.session(sid).remaining, 10);
  svc.submit(sid, t, mos_rating());
  EXPECT_THROW(svc.submit(sid, t, mos_rating()), DuplicateSubmissionError);
  EXPECT_THROW(svc.create_session(Activity::Mos, ""), ValidationError);

  auto h = svc.create_session(Activity::Head2Head, "r", 2);
  EXPECT_THROW(svc.submit(h.at("session_id"), first_task(h), h2h_rating("A", "C")), RatingRangeError);
  EXPECT_THROW(svc.submit(h.at("session_id"), first_task(h), mos_rating()), ValidationError);
}

TEST(Submit, ConservationUnderRandomWalks) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(40, {"m1", "m2", "m3"}), config_for(dir.path()));
  std::mt19937_64 rng(8);
  for (int c = 0; c < 20; ++c) {
    const auto activity = c % 2 ? Activity::Head2Head : Activity::Mos;
    const auto sid = svc.create_session(activity, "r" + std::to_string(c)).at("session_id").get<std::string>();
    while (true) {
      auto s = svc.session(sid);
      ASSERT_EQ(s.valid_ratings() + s.remaining, 10);
      ASSERT_EQ(s.completion_code.has_value(), s.remaining == 0);
      const Task* t = s.next_task();
      if (!t) break;
      json payload;
      if (rng() % 4 == 0) payload = {{"skip", rng() % 2 ? "cant_tell" : "not_visible"}};
      else if (activity == Activity::Mos) payload = mos_rating(static_cast<int>(rng() % 5), static_cast<int>(rng() % 6));
      else payload = h2h_rating(rng() % 2 ? "A" : "tie", rng() % 2 ? "B" : "tie");
      svc.submit(sid, t->task_id, payload);
    }
  }
}

TEST(Sessions, ClientPayloadsHideModelLabels) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(20, {"secretmodelq", "hiddenmodelz"}), config_for(dir.path()));
  for (auto activity : {Activity::Mos, Activity::Head2Head}) {
    auto view = svc.create_session(activity, "r");
    const auto sid = view.at("session_id").get<std::string>();
    std::vector<std::string> dumps{view.dump(), svc.session_view(sid).dump()};
    for (int i = 0; i < 10; ++i) {
      const auto t = svc.session(sid).next_task()->task_id;
      auto r = svc.submit(sid, t, activity == Activity::Mos ? mos_rating() : h2h_rating("A", "B"));
      dumps.push_back(r.dump());
    }
    for (const auto& d : dumps) {
      EXPECT_EQ(d.find("secretmodelq"), std::string::npos) << d;
      EXPECT_EQ(d.find("hiddenmodelz"), std::string::npos) << d;
      EXPECT_EQ(d.find("model"), std::string::npos) << d;
    }
  }
  auto mos = svc.create_session(Activity::Mos, "r");
  EXPECT_EQ(mos.at("options").at("helpfulness").size(), 5u);
  EXPECT_EQ(mos.at("options").at("correctness").size(), 6u);
  EXPECT_EQ(mos.at("options").at("skip"), json::array({"cant_tell", "not_visible"}));
}

TEST(Sessions, PoolExhausted) {
  capcom::testing::TempDir d1, d2;
  RatingService empty(make_pool(0, {}), config_for(d1.path()));
  EXPECT_THROW(empty.create_session(Activity::Mos, "r"), PoolExhaustedError);
  EXPECT_THROW(empty.create_session(Activity::Head2Head, "r"), PoolExhaustedError);
  RatingService small(make_pool(9, {"m"}), config_for(d2.path()));
  EXPECT_THROW(small.create_session(Activity::Mos, "r"), PoolExhaustedError);
  // One model cannot form a pair.
  EXPECT_THROW(small.create_session(Activity::Head2Head, "r"), PoolExhaustedError);
  EXPECT_EQ(small.events_applied(), 0);
}

TEST(Sessions, ConcurrentRatersStayIndependent) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(30, {"m1", "m2"}), config_for(dir.path()));
  std::vector<std::string> ids(4);
  std::vector<std::thread> threads;
  for (int w = 0; w < 4; ++w)
    threads.emplace_back([&, w] {
      const auto activity = w % 2 ? Activity::Head2Head : Activity::Mos;
      ids[static_cast<std::size_t>(w)] =
          svc.create_session(activity, "r" + std::to_string(w)).at("session_id").get<std::string>();
      const auto& sid = ids[static_cast<std::size_t>(w)];
      for (int i = 0; i < 10; ++i) {
        const auto t = next_of(svc, sid)->task_id;
        auto r = svc.submit(sid, t, activity == Activity::Mos ? mos_rating() : h2h_rating("A", "tie"));
        EXPECT_EQ(r.at("remaining"), 9 - i);
      }
    });
  for (auto& t : threads) t.join();
  for (const auto& sid : ids) EXPECT_TRUE(svc.session(sid).completion_code.has_value());
  EXPECT_EQ(svc.judgments().size(), 40u);
  EXPECT_EQ(svc.events_applied(), 4 * (1 + 10 + 1));
}

TEST(Glicko, UpdatesOnlyWhenSessionCompletes) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(30, {"m1", "m2"}), config_for(dir.path()));
  auto view = svc.create_session(Activity::Head2Head, "r", 3);
  const auto sid = view.at("session_id").get<std::string>();
  const auto before = svc.glicko_report();
  svc.submit(sid, first_task(view), h2h_rating("A", "A"));
  EXPECT_EQ(svc.glicko_report(), before);
  finish_h2h(svc, sid);
  EXPECT_NE(svc.glicko_report(), before);
  const auto g = svc.glicko(Axis::Helpfulness);
  EXPECT_GT(g.rating("m1").rating, g.rating("m2").rating);
  EXPECT_EQ(g.games("m1"), 10);
}

TEST(Glicko, TiesScoreHalfAndSkipsAreNotGames) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(30, {"m1", "m2"}), config_for(dir.path()));
  auto view = svc.create_session(Activity::Head2Head, "r", 3);
  const auto sid = view.at("session_id").get<std::string>();
  svc.submit(sid, first_task(view), {{"skip", "cant_tell"}});
  while (auto t = next_of(svc, sid)) svc.submit(sid, t->task_id, h2h_rating("tie", "tie"));
  const auto g = svc.glicko(Axis::Correctness);
  EXPECT_EQ(g.games("m1"), 10);
  EXPECT_NEAR(g.rating("m1").rating, 1500.0, 1e-9);
  EXPECT_NEAR(g.rating("m2").rating, 1500.0, 1e-9);
}

TEST(Persistence, RestartReplaysToIdenticalReports) {
  capcom::testing::TempDir dir;
  const auto pool = make_pool(30, {"m1", "m2", "m3"});
  std::string glicko, tests;
  long events = 0;
  {
    RatingService svc(pool, config_for(dir.path()));
    for (int r = 0; r < 3; ++r) {
      finish_h2h(svc, svc.create_session(Activity::Head2Head, "r" + std::to_string(r)).at("session_id"));
      auto m = svc.create_session(Activity::Mos, "r" + std::to_string(r));
      while (auto t = next_of(svc, m.at("session_id")))
        svc.submit(m.at("session_id"), t->task_id, mos_rating(r + 1, t->model == "m1" ? 5 : r));
    }
    // A half-finished session survives too.
    auto open = svc.create_session(Activity::Mos, "late");
    svc.submit(open.at("session_id"), first_task(open), mos_rating());
    glicko = svc.glicko_report().dump();
    tests = svc.tests_report("m1", "m2").dump();
    events = svc.events_applied();
  }
  RatingService again(pool, config_for(dir.path()));
  EXPECT_EQ(again.glicko_report().dump(), glicko);
  EXPECT_EQ(again.tests_report("m1", "m2").dump(), tests);
  EXPECT_EQ(again.events_applied(), events);

  for (const auto& line : lines_of(read_file(dir / "events.jsonl")))
    EXPECT_EQ(json::parse(line).at("v"), 1);
}

TEST(Persistence, TornFinalLineIsDropped) {
  capcom::testing::TempDir dir;
  const auto pool = make_pool(20, {"m1", "m2"});
  std::string report;
  {
    RatingService svc(pool, config_for(dir.path()));
    finish_h2h(svc, svc.create_session(Activity::Head2Head, "r").at("session_id"));
    report = svc.glicko_report().dump();
  }
  const std::string log = dir / "events.jsonl";
  const auto intact = read_file(log);
  {
    std::ofstream out(log, std::ios::app);
    out << R"({"v":1,"type":"rating","session_id":"abc","task)";
  }
  RatingService again(pool, config_for(dir.path()));
  EXPECT_EQ(again.glicko_report().dump(), report);
  EXPECT_EQ(read_file(log), intact);
}

TEST(Persistence, CorruptMiddleLineRefusesToStart) {
  capcom::testing::TempDir dir;
  const auto pool = make_pool(20, {"m1", "m2"});
  {
    RatingService svc(pool, config_for(dir.path()));
    finish_h2h(svc, svc.create_session(Activity::Head2Head, "r").at("session_id"));
  }
  const std::string log = dir / "events.jsonl";
  auto lines = lines_of(read_file(log));
  lines.insert(lines.begin() + 3, "{not json");
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_file_atomic(log, text);
  EXPECT_THROW(RatingService(pool, config_for(dir.path())), ParseError);
}

TEST(Persistence, SnapshotMismatchRefusesToStart) {
  capcom::testing::TempDir dir;
  const auto pool = make_pool(20, {"m1", "m2"});
  {
    RatingService svc(pool, config_for(dir.path()));
    finish_h2h(svc, svc.create_session(Activity::Head2Head, "r").at("session_id"));
  }
  const std::string snap = dir / "snapshot.json";
  auto j = json::parse(read_file(snap));
  j["glicko"]["axes"]["helpfulness"]["models"]["m1"]["rating"] = 1234.0;
  write_file_atomic(snap, j.dump());
  EXPECT_THROW(RatingService(pool, config_for(dir.path())), ParseError);
}

TEST(Persistence, UnknownEventVersionRejected) {
  capcom::testing::TempDir dir;
  write_file_atomic(dir / "events.jsonl", R"({"v":2,"type":"session_created"})" "\n");
  EXPECT_THROW(RatingService(make_pool(20, {"m"}), config_for(dir.path())), ParseError);
}

TEST(Analysis, HeadToHeadExamples) {
  auto judge = [](const std::string& rater, const std::string& a, const std::string& b, Winner w) {
    Judgment j;
    j.rater_id = rater;
    j.activity = Activity::Head2Head;
    j.task.model_a = a;
    j.task.model_b = b;
    j.payload = H2HJudgment{w, w};
    return j;
  };
  std::vector<Judgment> null{judge("r1", "x", "y", Winner::Tie), judge("r2", "y", "x", Winner::Tie),
                             judge("r3", "x", "y", Winner::A), judge("r3", "x", "y", Winner::B)};
  auto r = h2h_test(null, {"x", "y"}, Axis::Helpfulness);
  EXPECT_EQ(r.test.t, 0.0);
  EXPECT_EQ(r.test.p_value, 0.5);
  EXPECT_EQ(r.judgments, 4);

  std::vector<Judgment> four{judge("r1", "x", "y", Winner::A), judge("r2", "y", "x", Winner::B),
                             judge("r3", "x", "y", Winner::A), judge("r4", "x", "y", Winner::B)};
  r = h2h_test(four, {"x", "y"}, Axis::Correctness);
  EXPECT_NEAR(r.test.t, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.test.df, 3.0);
  EXPECT_NEAR(r.test.p_value, 0.196, 1e-3);
  EXPECT_DOUBLE_EQ(r.win_pct_a, 75.0);
  EXPECT_DOUBLE_EQ(r.win_pct_b, 25.0);
  EXPECT_DOUBLE_EQ(r.tie_pct, 0.0);

  std::vector<Judgment> one{judge("r1", "x", "y", Winner::A), judge("r1", "x", "y", Winner::A)};
  EXPECT_THROW(h2h_test(one, {"x", "y"}, Axis::Helpfulness), InsufficientDataError);
  EXPECT_THROW(h2h_test(four, {"x", "z"}, Axis::Helpfulness), InsufficientDataError);
}

TEST(Analysis, MosExamples) {
  std::vector<double> same{2.5, 3.0, 2.0}, hi{3.001, 2.999, 3.002, 2.998}, lo{2.001, 1.999, 2.002, 1.998};
  EXPECT_EQ(mos_test(same, same).test.p_value, 0.5);
  auto r = mos_test(hi, lo);
  EXPECT_LT(r.test.p_value, 0.01);
  EXPECT_NEAR(r.mean_model, 3.0, 1e-12);
  EXPECT_NEAR(r.mean_baseline, 2.0, 1e-12);
  std::vector<double> single{3.0};
  EXPECT_THROW(mos_test(single, lo), InsufficientDataError);
}

TEST(Analysis, StudyFixtureMatchesScipy) {
  const auto o = capcom::testing::fixture_json("study_oracle.json");
  std::vector<Judgment> js;
  for (const auto& h : o.at("head2head")) {
    Judgment j;
    j.rater_id = h.at("rater");
    j.activity = Activity::Head2Head;
    j.task.model_a = h.at("model_a");
    j.task.model_b = h.at("model_b");
    auto p = parse_payload({{"helpfulness", h.at("helpfulness")}, {"correctness", h.at("correctness")}},
                           Activity::Head2Head);
    j.payload = p;
    js.push_back(j);
  }
  for (const auto& m : o.at("mos")) {
    Judgment j;
    j.rater_id = m.at("rater");
    j.activity = Activity::Mos;
    j.task.model = m.at("model");
    j.payload = MosScore{m.at("helpfulness").get<int>(), m.at("correctness").get<int>()};
    js.push_back(j);
  }
  for (Axis axis : kAxes) {
    const auto& e = o.at("expect").at("head2head").at(to_string(axis));
    auto r = h2h_test(js, {"ic3", "blip"}, axis);
    EXPECT_NEAR(r.test.t, e.at("t").get<double>(), 1e-6);
    EXPECT_NEAR(r.test.p_value, e.at("p").get<double>(), 1e-6);
    EXPECT_NEAR(r.win_pct_a, e.at("win_pct_a").get<double>(), 1e-9);
    EXPECT_NEAR(r.win_pct_b, e.at("win_pct_b").get<double>(), 1e-9);
    EXPECT_NEAR(r.tie_pct, e.at("tie_pct").get<double>(), 1e-9);
    EXPECT_EQ(r.raters, e.at("raters").get<long>());

    const auto& m = o.at("expect").at("mos").at(to_string(axis));
    auto mr = mos_test(mos_rater_means(js, "ic3", axis), mos_rater_means(js, "blip", axis));
    EXPECT_NEAR(mr.test.t, m.at("t").get<double>(), 1e-6);
    EXPECT_NEAR(mr.test.p_value, m.at("p").get<double>(), 1e-6);
    EXPECT_NEAR(mr.mean_model, m.at("mean_a").get<double>(), 1e-9);
    EXPECT_NEAR(mr.mean_baseline, m.at("mean_b").get<double>(), 1e-9);
  }
}

TEST(Analysis, ServiceTestsReport) {
  capcom::testing::TempDir dir;
  RatingService svc(make_pool(30, {"m1", "m2"}), config_for(dir.path()));
  auto rep = svc.tests_report("m1", "m2");
  EXPECT_TRUE(rep.at("head2head").at("helpfulness").contains("error"));
  for (int r = 0; r < 3; ++r)
    finish_h2h(svc, svc.create_session(Activity::Head2Head, "r" + std::to_string(r)).at("session_id"));
  rep = svc.tests_report("m1", "m2");
  const auto& h = rep.at("head2head").at("helpfulness");
  EXPECT_DOUBLE_EQ(h.at("win_pct_a").get<double>(), 100.0);
  EXPECT_EQ(h.at("raters"), 3);
  EXPECT_EQ(h.at("p_value").get<double>(), 0.0);
  EXPECT_TRUE(rep.at("mos").at("correctness").contains("error"));
}
