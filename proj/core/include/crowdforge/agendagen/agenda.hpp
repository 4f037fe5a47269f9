#pragma once

#include <map>
#include <string>
#include <vector>

#include "crowdforge/rulelang/value.hpp"

namespace crowdforge::agendagen {

inline constexpr double kDayLength = 86400.0;

enum class TaskKind { StayInside, GoToBuilding, DelayedRule, FloatingSlot, GroupAccompany };

const char* taskKindName(TaskKind kind);  // "stay_inside", ...

struct AgendaTask {
    double t0 = 0.0;
    double t1 = 0.0;  // half-open [t0, t1), t0 < t1
    TaskKind kind = TaskKind::StayInside;
    int building = -1;    // StayInside / GoToBuilding / GroupAccompany target
    std::string ruleName;  // DelayedRule
    std::map<std::string, rulelang::Value> vars;  // DelayedRule capture, by value
    int groupId = -1;   // GroupAccompany; also set on accompanied member tasks
    int leaderId = -1;  // GroupAccompany
    std::vector<int> memberIds;
};

// A person's daily timeline. Tasks are kept sorted and non-overlapping;
// after finalize() they partition [0, kDayLength) exactly.
struct Agenda {
    int ownerPersonId = -1;
    std::vector<AgendaTask> tasks;

    // Newest wins: existing tasks inside [t0,t1) are dropped, stragglers are
    // trimmed, an enclosing task is split around the newcomer.
    void insert(AgendaTask task);

    // Fills every gap with StayInside(homeBuilding).
    void finalize(int homeBuilding);

    // Index of the task covering t, -1 when t falls into a gap.
    int indexAt(double t) const;
    const AgendaTask* taskAt(double t) const;
};

// A pooled activity waiting for a floating slot.
struct FloatingTaskEntry {
    int ownerPersonId = -1;
    double maxDuration = 0.0;
    std::string ruleName;
    double priority = 0.0;
    std::map<std::string, rulelang::Value> vars;
};

}  // namespace crowdforge::agendagen
