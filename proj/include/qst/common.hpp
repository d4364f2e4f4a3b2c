#pragma once

#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace qst {

/// Error type thrown by every fallible operation in the library. The message
/// is a single line, machine-parsable as "context: detail".
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace log {

enum class Level : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Diagnostics level comes from the QST_LOG environment variable
// (error|warn|info|debug); default is warn. Output goes to stderr.
inline Level level() {
    static const Level lv = [] {
        const char* e = std::getenv("QST_LOG");
        if (!e) return Level::Warn;
        if (std::strcmp(e, "error") == 0) return Level::Error;
        if (std::strcmp(e, "warn") == 0) return Level::Warn;
        if (std::strcmp(e, "info") == 0) return Level::Info;
        if (std::strcmp(e, "debug") == 0) return Level::Debug;
        return Level::Warn;
    }();
    return lv;
}

inline void emit(Level lv, const char* tag, const char* fmt, va_list ap) {
    if (static_cast<int>(lv) > static_cast<int>(level())) return;
    std::fprintf(stderr, "qst[%s] ", tag);
    std::vfprintf(stderr, fmt, ap);
    std::fputc('\n', stderr);
}

inline void error(const char* fmt, ...) {
    va_list ap;
    va_start(ap, fmt);
    emit(Level::Error, "error", fmt, ap);
    va_end(ap);
}

inline void warn(const char* fmt, ...) {
    va_list ap;
    va_start(ap, fmt);
    emit(Level::Warn, "warn", fmt, ap);
    va_end(ap);
}

inline void info(const char* fmt, ...) {
    va_list ap;
    va_start(ap, fmt);
    emit(Level::Info, "info", fmt, ap);
    va_end(ap);
}

inline void debug(const char* fmt, ...) {
    va_list ap;
    va_start(ap, fmt);
    emit(Level::Debug, "debug", fmt, ap);
    va_end(ap);
}

} // namespace log
} // namespace qst
