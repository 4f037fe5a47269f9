#include "crowdforge/agendagen/agenda.hpp"

#include <utility>

namespace crowdforge::agendagen {

const char* taskKindName(TaskKind kind) {
    switch (kind) {
        case TaskKind::StayInside: return "stay_inside";
        case TaskKind::GoToBuilding: return "go_to_building";
        case TaskKind::DelayedRule: return "delayed_rule";
        case TaskKind::FloatingSlot: return "floating_slot";
        case TaskKind::GroupAccompany: return "group_accompany";
    }
    return "?";
}

void Agenda::insert(AgendaTask task) {
    std::vector<AgendaTask> out;
    out.reserve(tasks.size() + 2);
    bool placed = false;
    for (auto& old : tasks) {
        if (old.t1 <= task.t0) {  // entirely before
            out.push_back(std::move(old));
            continue;
        }
        if (old.t0 >= task.t1) {  // entirely after
            if (!placed) {
                out.push_back(task);
                placed = true;
            }
            out.push_back(std::move(old));
            continue;
        }
        if (old.t0 < task.t0) {  // head survives
            AgendaTask head = old;
            head.t1 = task.t0;
            out.push_back(std::move(head));
        }
        if (!placed) {
            out.push_back(task);
            placed = true;
        }
        if (old.t1 > task.t1) {  // tail survives
            AgendaTask tail = std::move(old);
            tail.t0 = task.t1;
            out.push_back(std::move(tail));
        }
    }
    if (!placed) out.push_back(std::move(task));
    tasks = std::move(out);
}

void Agenda::finalize(int homeBuilding) {
    std::vector<AgendaTask> out;
    out.reserve(tasks.size() + tasks.size() + 1);
    double cursor = 0.0;
    auto fill = [&](double a, double b) {
        if (b <= a) return;
        AgendaTask stay;
        stay.t0 = a;
        stay.t1 = b;
        stay.kind = TaskKind::StayInside;
        stay.building = homeBuilding;
        out.push_back(std::move(stay));
    };
    for (auto& t : tasks) {
        fill(cursor, t.t0);
        cursor = t.t1;
        out.push_back(std::move(t));
    }
    fill(cursor, kDayLength);
    tasks = std::move(out);
}

int Agenda::indexAt(double t) const {
    for (std::size_t i = 0; i < tasks.size(); ++i)
        if (tasks[i].t0 <= t && t < tasks[i].t1) return static_cast<int>(i);
    return -1;
}

const AgendaTask* Agenda::taskAt(double t) const {
    int i = indexAt(t);
    return i < 0 ? nullptr : &tasks[i];
}

}  // namespace crowdforge::agendagen
