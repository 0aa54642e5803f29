#pragma once

#include <spdlog/spdlog.h>

#include <utility>

// Library logging goes through one named spdlog logger writing to stderr.
// Verbosity comes from the NEUROTRACK_LOG environment variable
// (trace|debug|info|warn|error|off, default warn).
namespace neurotrack::log {

spdlog::logger& logger();

// Re-reads NEUROTRACK_LOG. Called once lazily; exposed for the CLI.
void configure_from_env();

template <typename... Args>
void debug(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().debug(fmt, std::forward<Args>(args)...);
}
template <typename... Args>
void info(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().info(fmt, std::forward<Args>(args)...);
}
template <typename... Args>
void warn(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().warn(fmt, std::forward<Args>(args)...);
}

}  // namespace neurotrack::log
