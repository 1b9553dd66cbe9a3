#pragma once

#include <memory>
#include <string>

#include "fivegsim/adversary_model.hpp"
#include "fivegsim/sim_engine.hpp"

namespace fivegsim {

inline const Plmn kNoKeyPlmn{"999", "99"};  // never provisioned in any USIM
inline constexpr int32_t kLurePriority = 100;
inline constexpr Tick kLateLureTick = 60;       // after the benign registration
inline constexpr Tick kEmergencyTriggerTick = 30;

// All catalog behaviors in one script, switched by kind. The sniffer and the
// in-transit mutator live in the channel hook; the rogue base station is a
// radio endpoint that answers lured UEs according to the scripted exploit.
class CatalogAttackScript final : public AttackScript {
 public:
  CatalogAttackScript(AttackKind kind, AttackerCapabilities caps)
      : kind_(kind), caps_(caps) {}

  std::string endpoint() const override {
    return needs_rogue() ? "attacker:rogue" : "";
  }

  void install(Simulation& sim) override {
    sim_ = &sim;
    if (!sim.config().subscribers.empty()) {
      home_plmn_ = sim.config().subscribers[0].supi.plmn();
    }
    switch (kind_) {
      case AttackKind::PreauthDosReject:
      case AttackKind::SilentDowngrade:
        sim.channel().schedule_trigger(0, endpoint(), TriggerKind::AttackerScript,
                                       "broadcast");
        break;
      case AttackKind::SupiCatchActive:
        sim.channel().schedule_trigger(kLateLureTick, endpoint(),
                                       TriggerKind::AttackerScript, "broadcast");
        break;
      case AttackKind::EmergencySupiCatch:
        // The malicious emergency trigger is out of band (forced service
        // drop plus emergency dial); it is not a network message and no
        // signature gate applies to it.
        for (const auto& sub : sim.config().subscribers) {
          sim.channel().schedule_trigger(kEmergencyTriggerTick,
                                         "ue:" + sub.supi.render(),
                                         TriggerKind::EmergencyDial, "malicious");
        }
        break;
      case AttackKind::SupiCatchPassive:
      case AttackKind::BiddingDown:
        break;
    }
  }

  bool on_radio_send(Delivery& delivery, Tick now) override {
    if (caps_.can_sniff) {
      sim_->transcript().log(now, Transcript::EventKind::Observe, Link::Radio,
                             "attacker:sniffer", delivery.to,
                             observable_view(delivery.msg));
    }
    if (kind_ == AttackKind::BiddingDown && caps_.can_mutate_in_transit &&
        !mutated_once_ && delivery.msg.clear() &&
        delivery.msg.kind == MessageKind::RegistrationRequest) {
      auto* body = std::get_if<RegistrationRequestBody>(&delivery.msg.body);
      if (body) {
        std::string before = codec::encode_caps(body->caps);
        body->caps.ciphering = {CipherAlg::NEA0};
        body->caps.integrity = {IntegrityAlg::NIA0};
        mutated_once_ = true;
        sim_->transcript().log(now, Transcript::EventKind::Mutate, Link::Radio,
                               "attacker:mitm", delivery.to,
                               "caps-stripped before={" + before + "} after={" +
                                   codec::encode_caps(body->caps) + "}");
      }
    }
    return true;  // catalog scripts never drop outright
  }

  void on_script_trigger(Simulation& sim, const Trigger& trigger, Tick now) override {
    if (trigger.arg != "broadcast") return;
    Plmn claimed = kind_ == AttackKind::SilentDowngrade ? kNoKeyPlmn : home_plmn_;
    ProtocolMessage lure =
        make_clear(MessageKind::Broadcast, claimed, BroadcastBody{kLurePriority});
    sim.channel().broadcast(now, endpoint(), lure, /*injected=*/true);
  }

  void on_rogue_message(Simulation& sim, const Delivery& delivery, Tick now) override {
    const ProtocolMessage& msg = delivery.msg;
    switch (kind_) {
      case AttackKind::PreauthDosReject:
        if (msg.kind == MessageKind::RegistrationRequest) {
          sim.channel().inject(now, endpoint(), delivery.from,
                               make_clear(MessageKind::RegistrationReject, home_plmn_,
                                          RegistrationRejectBody{"permanent"}));
        } else if (msg.kind == MessageKind::TauRequest) {
          sim.channel().inject(now, endpoint(), delivery.from,
                               make_clear(MessageKind::TauReject, home_plmn_,
                                          TauRejectBody{"permanent"}));
        }
        break;
      case AttackKind::SilentDowngrade:
        if (msg.kind == MessageKind::RegistrationRequest) {
          sim.channel().inject(now, endpoint(), delivery.from,
                               make_clear(MessageKind::DowngradeCommand, kNoKeyPlmn,
                                          DowngradeCommandBody{}));
        }
        break;
      case AttackKind::SupiCatchActive:
        // Claim the temporary identity is unknown so the UE re-identifies.
        if (msg.kind == MessageKind::RegistrationRequest) {
          sim.channel().inject(now, endpoint(), delivery.from,
                               make_clear(MessageKind::IdentityRequest, home_plmn_,
                                          IdentityRequestBody{}));
        }
        // The IdentityResponse itself is captured by the sniffer hook.
        break;
      default:
        break;
    }
  }

 private:
  bool needs_rogue() const {
    return kind_ == AttackKind::PreauthDosReject ||
           kind_ == AttackKind::SilentDowngrade ||
           kind_ == AttackKind::SupiCatchActive;
  }

  AttackKind kind_;
  AttackerCapabilities caps_;
  Simulation* sim_ = nullptr;
  Plmn home_plmn_;
  bool mutated_once_ = false;
};

// ---- evidence extraction ---------------------------------------------------------
// The verdict comes from scanning the transcript, never from the attacker's
// own bookkeeping. Line numbers are 1-based into the rendered transcript.

inline AttackOutcome extract_outcome(AttackKind kind, const ScenarioConfig& cfg,
                                     const Transcript& transcript) {
  AttackOutcome outcome;
  outcome.attack = kind;
  outcome.config_fingerprint = cfg.fingerprint();

  auto add = [&](size_t index0, std::string claim, std::string description) {
    outcome.evidence.push_back(Evidence{index0 + 1, std::move(claim),
                                        std::move(description)});
  };

  const auto& events = transcript.events();
  switch (kind) {
    case AttackKind::SupiCatchPassive:
    case AttackKind::SupiCatchActive:
    case AttackKind::EmergencySupiCatch: {
      for (const auto& sub : cfg.subscribers) {
        const std::string& msin = sub.supi.msin;
        for (size_t i = 0; i < events.size(); ++i) {
          const auto& e = events[i];
          if (e.kind != Transcript::EventKind::Observe) continue;
          if (kind == AttackKind::SupiCatchActive &&
              e.text.find("IdentityResponse") == std::string::npos)
            continue;
          if (kind == AttackKind::EmergencySupiCatch &&
              e.text.find("EmergencyRequest") == std::string::npos)
            continue;
          if (e.text.find(msin) != std::string::npos) {
            add(i, msin, "msin of " + sub.supi.render() + " visible to the sniffer");
            break;
          }
        }
      }
      break;
    }
    case AttackKind::PreauthDosReject: {
      for (size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.kind == Transcript::EventKind::Note && e.from.starts_with("ue:") &&
            e.text.starts_with("phase=denied")) {
          add(i, "phase=denied", "UE " + e.from + " denied service");
          break;
        }
      }
      break;
    }
    case AttackKind::SilentDowngrade: {
      for (size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.kind == Transcript::EventKind::Note && e.from.starts_with("ue:") &&
            e.text.starts_with("phase=attached-legacy")) {
          add(i, "phase=attached-legacy", "UE " + e.from + " on legacy pseudo-network");
          break;
        }
      }
      break;
    }
    case AttackKind::BiddingDown: {
      for (size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.kind == Transcript::EventKind::Note && e.from.starts_with("ue:") &&
            e.text.find("context-active") != std::string::npos &&
            e.text.find("cipher=NEA0") != std::string::npos &&
            e.text.find("integ=NIA0") != std::string::npos) {
          add(i, "cipher=NEA0", "UE " + e.from + " active on null algorithms");
          break;
        }
      }
      break;
    }
  }
  outcome.verdict = outcome.evidence.empty() ? Verdict::Fail : Verdict::Success;
  return outcome;
}

}  // namespace fivegsim
