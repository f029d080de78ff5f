#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wbhawkes {

// One observed event: a timestamp and a 0-based type index.
struct Event {
    double time = 0.0;
    std::size_t type = 0;

    friend bool operator==(const Event&, const Event&) = default;
};

// An ordered event sequence on an observation window (t_begin, t_end].
// Times are strictly increasing and strictly positive; type indices are
// 0-based in memory (file formats use 1-based types, see dataio).
struct EventSequence {
    std::vector<Event> events;
    double t_begin = 0.0;
    double t_end = 0.0;

    friend bool operator==(const EventSequence&, const EventSequence&) = default;

    void validate(std::size_t c_count) const {
        if (!(t_begin >= 0.0) || !(t_end > t_begin))
            throw std::invalid_argument("sequence: window must satisfy 0 <= t_begin < t_end");
        double prev = t_begin;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const Event& e = events[i];
            if (!(e.time > 0.0))
                throw std::invalid_argument("sequence: event " + std::to_string(i) + " has non-positive time");
            if (!(e.time > prev))
                throw std::invalid_argument("sequence: event " + std::to_string(i) +
                                            " breaks strictly increasing times inside the window");
            if (e.time > t_end)
                throw std::invalid_argument("sequence: event " + std::to_string(i) + " lies beyond the window end");
            if (e.type >= c_count)
                throw std::invalid_argument("sequence: event " + std::to_string(i) + " has type out of range");
            prev = e.time;
        }
    }
};

inline void validate_dataset(const std::vector<EventSequence>& dataset, std::size_t c_count) {
    for (std::size_t n = 0; n < dataset.size(); ++n) {
        try {
            dataset[n].validate(c_count);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("dataset sequence " + std::to_string(n) + ": " + e.what());
        }
    }
}

} // namespace wbhawkes
