#pragma once

// Structured run log. Every pipeline event is one JSON object; the full log
// serializes to JSON Lines, so two runs can be compared byte-for-byte.

#include <string>
#include <vector>

#include <json.hpp>

namespace tact::pipeline {

class EventLog {
public:
    using Event = nlohmann::ordered_json;

    // Appends one event. `fields` gains a leading "event": `kind` entry so
    // consumers can filter without knowing the payload schema.
    void record(const std::string& kind, Event fields = Event::object());

    const std::vector<Event>& events() const { return events_; }

    // One compact JSON object per line, '\n'-terminated.
    std::string dump() const;

    // Writes dump() to `path`, replacing any existing file.
    void save(const std::string& path) const;

private:
    std::vector<Event> events_;
};

}  // namespace tact::pipeline
