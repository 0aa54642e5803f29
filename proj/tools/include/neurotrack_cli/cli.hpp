#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace neurotrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

// args excludes the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Runs `action`, mapping library and config errors to kExitUser and anything else to kExitInternal.
int guarded(const std::function<void()>& action, std::ostream& err);

}  // namespace neurotrack::cli
