#include "log.hpp"

#include <stacklq/log.hpp>

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>

namespace stacklq {

namespace log {

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("stacklq");
    l->set_level(spdlog::level::warn);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *instance;
}

}  // namespace log

void set_log_level(const std::string& level) {
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") return;
  log::logger().set_level(parsed);
}

void configure_logging_from_env() {
  if (const char* v = std::getenv("STACKLQ_LOG")) set_log_level(v);
}

}  // namespace stacklq
