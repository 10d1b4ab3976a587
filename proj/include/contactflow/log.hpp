#pragma once

#include <string>

namespace contactflow::logging {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Verbosity comes from the CONTACTFLOW_LOG environment variable
// (error|warn|info|debug); unset or unrecognized means warn.
Level level();
void set_level(Level lv);
void reset_from_env();

void log(Level lv, const std::string& msg);

inline void error(const std::string& m) { log(Level::Error, m); }
inline void warn(const std::string& m) { log(Level::Warn, m); }
inline void info(const std::string& m) { log(Level::Info, m); }
inline void debug(const std::string& m) { log(Level::Debug, m); }

}  // namespace contactflow::logging
