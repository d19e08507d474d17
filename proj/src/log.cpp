#include "tdg/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace tdg
{

namespace
{

LogLevel from_env()
{
    const char *v = std::getenv("TEMPERED_DG_LOG");
    if (!v)
        return LogLevel::quiet;
    const std::string s(v);
    if (s == "debug" || s == "2")
        return LogLevel::debug;
    if (s == "info" || s == "1")
        return LogLevel::info;
    return LogLevel::quiet;
}

LogLevel &current()
{
    static LogLevel level = from_env();
    return level;
}

std::mutex log_mutex;

} // namespace

LogLevel log_level() { return current(); }

void set_log_level(LogLevel level) { current() = level; }

void log_message(LogLevel level, const std::string &msg)
{
    if (int(level) > int(current()))
        return;
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "[tempered_dg] " << msg << '\n';
}

} // namespace tdg
