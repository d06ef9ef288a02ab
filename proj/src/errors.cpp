#include "smsnme/errors.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace smsnme {

namespace {
std::mutex sink_mutex;
WarningSink &sink() {
    static WarningSink s = [](const std::string &m) { std::cerr << "warning: " << m << '\n'; };
    return s;
}
} // namespace

WarningSink set_warning_sink(WarningSink new_sink) {
    std::lock_guard<std::mutex> lock(sink_mutex);
    return std::exchange(sink(), std::move(new_sink));
}

void warn(const std::string &message) {
    std::lock_guard<std::mutex> lock(sink_mutex);
    if (sink()) {
        sink()(message);
    }
}

} // namespace smsnme
