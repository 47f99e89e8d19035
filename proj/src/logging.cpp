#include "scin/logging.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace scin {

namespace {

void default_sink(LogLevel level, std::string_view message) {
    if (level == LogLevel::warning) std::cerr << "warning: " << message << '\n';
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

LogSink& sink() {
    static LogSink s = default_sink;
    return s;
}

void emit(LogLevel level, std::string_view message) {
    std::lock_guard lock(sink_mutex());
    if (sink()) sink()(level, message);
}

}  // namespace

LogSink set_log_sink(LogSink s) {
    std::lock_guard lock(sink_mutex());
    return std::exchange(sink(), s ? std::move(s) : LogSink(default_sink));
}

void log_info(std::string_view message) { emit(LogLevel::info, message); }
void log_warning(std::string_view message) { emit(LogLevel::warning, message); }

}  // namespace scin
