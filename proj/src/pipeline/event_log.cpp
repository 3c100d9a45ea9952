#include "tactoshape/pipeline/event_log.hpp"

#include <fstream>
#include <stdexcept>

namespace tact::pipeline {

void EventLog::record(const std::string& kind, Event fields) {
    Event ev = Event::object();
    ev["event"] = kind;
    for (auto& [key, value] : fields.items())
        ev[key] = std::move(value);
    events_.push_back(std::move(ev));
}

std::string EventLog::dump() const {
    std::string out;
    for (const auto& ev : events_) {
        out += ev.dump();
        out += '\n';
    }
    return out;
}

void EventLog::save(const std::string& path) const {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw std::runtime_error("event log: cannot open '" + path + "'");
    file << dump();
}

}  // namespace tact::pipeline
