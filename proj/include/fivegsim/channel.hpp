#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "fivegsim/messages.hpp"
#include "fivegsim/transcript.hpp"

namespace fivegsim {

enum class TriggerKind : uint8_t {
  PowerOn,
  RetryTimeout,
  EmergencyDial,   // arg "malicious" marks the attacker-induced path
  TauMove,         // arg = target network endpoint
  Rederive,
  HandoverExec,    // arg = target network endpoint
  AttackerScript,  // dispatched to the installed attack script
};

inline std::string_view to_string(TriggerKind k) {
  switch (k) {
    case TriggerKind::PowerOn: return "power-on";
    case TriggerKind::RetryTimeout: return "retry-timeout";
    case TriggerKind::EmergencyDial: return "emergency-dial";
    case TriggerKind::TauMove: return "tau-move";
    case TriggerKind::Rederive: return "rederive";
    case TriggerKind::HandoverExec: return "handover";
    case TriggerKind::AttackerScript: return "attacker-script";
  }
  return "?";
}

struct Delivery {
  std::string from;
  std::string to;
  Link link = Link::Radio;
  ProtocolMessage msg;
  bool injected = false;  // queued by the attacker
};

struct Trigger {
  std::string actor;
  TriggerKind kind = TriggerKind::PowerOn;
  std::string arg;
};

// Everything waiting for a delivery tick; ordered by (tick, enqueue seq) so a
// run is a pure function of (scenario, seed).
struct PendingEvent {
  Tick tick = 0;
  uint64_t seq = 0;
  std::optional<Delivery> delivery;
  std::optional<Trigger> trigger;
};

// Radio-side attacker capabilities are realized as channel hooks; the core
// link between operators is not tappable from the radio side.
class ChannelHook {
 public:
  virtual ~ChannelHook() = default;
  // Called for every radio send. Return false to drop; mutate in place.
  virtual bool on_radio_send(Delivery& delivery, Tick tick) = 0;
};

class Channel {
 public:
  explicit Channel(Transcript& transcript) : transcript_(transcript) {}

  void set_hook(ChannelHook* hook) { hook_ = hook; }
  void register_ue_endpoint(const std::string& endpoint) {
    ue_endpoints_.push_back(endpoint);
  }

  static constexpr Tick kDeliveryDelay = 1;

  void send(Tick now, const std::string& from, const std::string& to,
            ProtocolMessage msg, Link link = Link::Radio) {
    Delivery d{from, to, link, std::move(msg), false};
    dispatch(now, std::move(d), Transcript::EventKind::Send);
  }

  // Attacker-originated message; goes through the same pipeline but is logged
  // as an injection. No hook pass (the attacker does not filter itself).
  void inject(Tick now, const std::string& from, const std::string& to,
              ProtocolMessage msg) {
    Delivery d{from, to, Link::Radio, std::move(msg), true};
    transcript_.log(now, Transcript::EventKind::Inject, Link::Radio, d.from, d.to,
                    observable_view(d.msg));
    enqueue(now + kDeliveryDelay, std::move(d));
  }

  // Broadcast fan-out: one delivery per registered UE endpoint.
  void broadcast(Tick now, const std::string& from, const ProtocolMessage& msg,
                 bool injected = false) {
    for (const auto& ue : ue_endpoints_) {
      Delivery d{from, ue, Link::Radio, msg, injected};
      dispatch(now, std::move(d),
               injected ? Transcript::EventKind::Inject : Transcript::EventKind::Send);
    }
  }

  void schedule_trigger(Tick at, const std::string& actor, TriggerKind kind,
                        std::string arg = {}) {
    PendingEvent ev;
    ev.tick = at;
    ev.seq = next_seq_++;
    ev.trigger = Trigger{actor, kind, std::move(arg)};
    queue_.push_back(std::move(ev));
  }

  // Non-message exposure on the radio link (e.g. an insecure handover
  // spilling context material); visible to the sniffer hook via transcript.
  void expose(Tick now, const std::string& from, const std::string& text) {
    transcript_.log(now, Transcript::EventKind::Expose, Link::Radio, from, "", text);
  }

  std::optional<PendingEvent> pop_next() {
    if (queue_.empty()) return std::nullopt;
    size_t best = 0;
    for (size_t i = 1; i < queue_.size(); ++i) {
      if (queue_[i].tick < queue_[best].tick ||
          (queue_[i].tick == queue_[best].tick && queue_[i].seq < queue_[best].seq)) {
        best = i;
      }
    }
    PendingEvent ev = std::move(queue_[best]);
    queue_.erase(queue_.begin() + static_cast<ptrdiff_t>(best));
    return ev;
  }

  bool idle() const { return queue_.empty(); }
  Transcript& transcript() { return transcript_; }

 private:
  void dispatch(Tick now, Delivery d, Transcript::EventKind kind) {
    transcript_.log(now, kind, d.link, d.from, d.to, observable_view(d.msg));
    if (d.link == Link::Radio && hook_ != nullptr && !d.injected) {
      if (!hook_->on_radio_send(d, now)) {
        transcript_.log(now, Transcript::EventKind::Drop, d.link, d.from, d.to,
                        "dropped-by-attacker " + std::string(to_string(d.msg.kind)));
        return;
      }
    }
    enqueue(now + kDeliveryDelay, std::move(d));
  }

  void enqueue(Tick at, Delivery d) {
    PendingEvent ev;
    ev.tick = at;
    ev.seq = next_seq_++;
    ev.delivery = std::move(d);
    queue_.push_back(std::move(ev));
  }

  Transcript& transcript_;
  ChannelHook* hook_ = nullptr;
  std::vector<std::string> ue_endpoints_;
  std::deque<PendingEvent> queue_;
  uint64_t next_seq_ = 0;
};

}  // namespace fivegsim
