#include "contactflow/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace contactflow::logging {

namespace {

std::atomic<int> g_level{-1};  // -1 = not yet read from the environment

int parse_env() {
    const char* v = std::getenv("CONTACTFLOW_LOG");
    if (!v) return static_cast<int>(Level::Warn);
    if (std::strcmp(v, "error") == 0) return static_cast<int>(Level::Error);
    if (std::strcmp(v, "warn") == 0) return static_cast<int>(Level::Warn);
    if (std::strcmp(v, "info") == 0) return static_cast<int>(Level::Info);
    if (std::strcmp(v, "debug") == 0) return static_cast<int>(Level::Debug);
    return static_cast<int>(Level::Warn);
}

const char* tag(Level lv) {
    switch (lv) {
        case Level::Error: return "error";
        case Level::Warn: return "warn";
        case Level::Info: return "info";
        case Level::Debug: return "debug";
    }
    return "?";
}

}  // namespace

Level level() {
    int lv = g_level.load(std::memory_order_relaxed);
    if (lv < 0) {
        lv = parse_env();
        g_level.store(lv, std::memory_order_relaxed);
    }
    return static_cast<Level>(lv);
}

void set_level(Level lv) { g_level.store(static_cast<int>(lv), std::memory_order_relaxed); }

void reset_from_env() { g_level.store(parse_env(), std::memory_order_relaxed); }

void log(Level lv, const std::string& msg) {
    if (static_cast<int>(lv) > static_cast<int>(level())) return;
    std::fprintf(stderr, "[%s] %s\n", tag(lv), msg.c_str());
}

}  // namespace contactflow::logging
