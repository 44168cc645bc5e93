#include <cstdio>
#include <fcntl.h>
#include <unistd.h>

#include "capcom/errors.hpp"
#include "capcom/human_eval.hpp"
#include "capcom/io.hpp"

namespace capcom::human_eval {

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

std::vector<nlohmann::json> EventLog::read_all() {
  std::vector<nlohmann::json> out;
  if (!std::filesystem::exists(path_)) return out;
  const auto text = read_file(path_);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    const bool terminated = end != std::string::npos;
    if (!terminated) end = text.size();
    const auto line = std::string_view(text).substr(pos, end - pos);
    ++line_no;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      if (!terminated) {
        // Torn tail from an interrupted append.
        std::filesystem::resize_file(path_, pos);
        break;
      }
      throw ParseError(path_.string() + " line " + std::to_string(line_no), e.what());
    }
    if (!j.is_object() || j.value("v", 0) != 1)
      throw ParseError(path_.string() + " line " + std::to_string(line_no),
                       "event is not a version-1 object");
    out.push_back(std::move(j));
    if (!terminated) {
      // Complete event missing its newline; restore it.
      FILE* f = std::fopen(path_.c_str(), "ab");
      if (!f) throw Error("cannot open event log: " + path_.string());
      std::fputc('\n', f);
      std::fclose(f);
      break;
    }
    pos = end + 1;
  }
  return out;
}

void EventLog::append(const nlohmann::json& event) {
  if (event.value("v", 0) != 1) throw ValidationError("event must carry \"v\":1");
  const auto line = event.dump() + "\n";
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error("cannot open event log: " + path_.string());
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      ::close(fd);
      throw Error("write to event log failed: " + path_.string());
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

}  // namespace capcom::human_eval
