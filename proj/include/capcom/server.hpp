#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "capcom/human_eval.hpp"

namespace capcom::human_eval {

// HTTP front end for a RatingService:
//   POST /api/sessions                  {activity, rater_id}
//   POST /api/sessions/{id}/ratings     {task_id, payload}
//   GET  /api/sessions/{id}
//   GET  /api/reports/glicko
//   GET  /api/reports/tests?pair=a,b
// plus static files from `static_dir` under "/".
class RatingServer {
 public:
  RatingServer(RatingService& service, std::filesystem::path static_dir = {});
  ~RatingServer();
  RatingServer(const RatingServer&) = delete;
  RatingServer& operator=(const RatingServer&) = delete;

  // Binds to `port` (0 picks a free one) and returns the bound port. Throws
  // Error if the port is in use.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace capcom::human_eval
