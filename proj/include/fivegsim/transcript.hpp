#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "fivegsim/common.hpp"

namespace fivegsim {

enum class Link : uint8_t { Radio, Core };

inline std::string_view to_string(Link l) { return l == Link::Radio ? "radio" : "core"; }

// Append-only event log of one run. Rendered lines are the persistent form;
// determinism of a run is judged on the rendered text.
class Transcript {
 public:
  enum class EventKind : uint8_t {
    Send, Deliver, Drop, Observe, Mutate, Inject, Expose, Note,
  };

  struct Event {
    Tick tick = 0;
    uint64_t seq = 0;
    EventKind kind = EventKind::Note;
    Link link = Link::Radio;
    std::string from;
    std::string to;
    std::string text;
  };

  static std::string_view kind_name(EventKind k) {
    switch (k) {
      case EventKind::Send: return "send";
      case EventKind::Deliver: return "deliver";
      case EventKind::Drop: return "drop";
      case EventKind::Observe: return "observe";
      case EventKind::Mutate: return "mutate";
      case EventKind::Inject: return "inject";
      case EventKind::Expose: return "expose";
      case EventKind::Note: return "note";
    }
    return "?";
  }

  void log(Tick tick, EventKind kind, Link link, std::string from, std::string to,
           std::string text) {
    events_.push_back(Event{tick, next_seq_++, kind, link, std::move(from),
                            std::move(to), std::move(text)});
  }

  void note(Tick tick, std::string actor, std::string text) {
    log(tick, EventKind::Note, Link::Radio, std::move(actor), "", std::move(text));
  }

  const std::vector<Event>& events() const { return events_; }
  size_t size() const { return events_.size(); }

  static std::string render_line(const Event& e) {
    char head[48];
    std::snprintf(head, sizeof head, "t=%06llu e=%05llu",
                  static_cast<unsigned long long>(e.tick),
                  static_cast<unsigned long long>(e.seq));
    std::string line = head;
    line += " ";
    line += kind_name(e.kind);
    if (e.kind != EventKind::Note) {
      line += " ";
      line += to_string(e.link);
    }
    line += " " + e.from;
    if (!e.to.empty()) line += " -> " + e.to;
    if (!e.text.empty()) line += " " + e.text;
    return line;
  }

  // 1-based line numbers; evidence references use them.
  std::string line(size_t number) const {
    if (number == 0 || number > events_.size()) return {};
    return render_line(events_[number - 1]);
  }

  std::string render() const {
    std::string out;
    for (const auto& e : events_) {
      out += render_line(e);
      out += "\n";
    }
    return out;
  }

 private:
  std::vector<Event> events_;
  uint64_t next_seq_ = 0;
};

}  // namespace fivegsim
