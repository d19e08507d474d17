#pragma once

#include <string>

namespace tdg
{

enum class LogLevel
{
    quiet = 0,
    info = 1,
    debug = 2,
};

/// Verbosity from TEMPERED_DG_LOG (quiet|info|debug or 0..2), read once; default quiet.
LogLevel log_level();
void set_log_level(LogLevel level);
/// Writes to stderr when the level is enabled.
void log_message(LogLevel level, const std::string &msg);

} // namespace tdg
