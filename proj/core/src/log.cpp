#include "neurotrack/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <memory>

namespace neurotrack::log {

namespace {

void apply_env(spdlog::logger& l) {
  const char* env = std::getenv("NEUROTRACK_LOG");
  if (env != nullptr && *env != '\0') l.set_level(spdlog::level::from_str(env));
}

}  // namespace

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = std::make_shared<spdlog::logger>("neurotrack", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    apply_env(*l);
    return l;
  }();
  return *instance;
}

void configure_from_env() { apply_env(logger()); }

}  // namespace neurotrack::log
