#pragma once

#include <string>
#include <vector>

namespace crowdforge {

// Non-fatal problems recorded during generation or simulation. The CLI maps
// the incident count against a threshold to decide the process exit code.
struct Incident {
    enum class Severity { Warning, Error };
    Severity severity = Severity::Error;
    std::string stage;    // "citygen", "agendagen", "sim", ...
    std::string message;
    double time = -1.0;   // sim time of day, -1 when not applicable
    int personId = -1;
};

class IncidentLog {
  public:
    void warn(std::string stage, std::string message, double time = -1.0, int personId = -1) {
        entries_.push_back({Incident::Severity::Warning, std::move(stage), std::move(message),
                            time, personId});
    }
    void error(std::string stage, std::string message, double time = -1.0, int personId = -1) {
        entries_.push_back({Incident::Severity::Error, std::move(stage), std::move(message),
                            time, personId});
    }
    const std::vector<Incident>& entries() const { return entries_; }
    std::size_t errorCount() const {
        std::size_t n = 0;
        for (const auto& e : entries_)
            if (e.severity == Incident::Severity::Error) ++n;
        return n;
    }
    void clear() { entries_.clear(); }

  private:
    std::vector<Incident> entries_;
};

}  // namespace crowdforge
