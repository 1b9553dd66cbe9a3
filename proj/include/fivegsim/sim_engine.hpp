#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fivegsim/channel.hpp"
#include "fivegsim/protocol.hpp"
#include "fivegsim/scenario.hpp"

namespace fivegsim {

class Simulation;

// One scripted attacker behavior: a channel hook (sniff / mutate / drop) plus
// an optional rogue radio presence that answers lured UEs.
class AttackScript : public ChannelHook {
 public:
  ~AttackScript() override = default;
  virtual void install(Simulation& sim) = 0;
  virtual std::string endpoint() const = 0;  // empty when there is no rogue cell
  virtual void on_rogue_message(Simulation& sim, const Delivery& delivery,
                                Tick now) = 0;
  virtual void on_script_trigger(Simulation& sim, const Trigger& trigger, Tick now) = 0;
};

inline void emit_step_output(Channel& ch, Tick now, const std::string& from,
                             StepOutput&& out) {
  for (auto& note : out.notes) ch.transcript().note(now, from, note);
  for (auto& [to, msg] : out.radio) {
    if (to == "*") {
      ch.broadcast(now, from, msg);
    } else {
      ch.send(now, from, to, std::move(msg));
    }
  }
  for (auto& [to, msg] : out.core) ch.send(now, from, to, std::move(msg), Link::Core);
  for (auto& t : out.triggers) ch.schedule_trigger(now + t.delay, from, t.kind, t.arg);
}

// Owns the actors, the channel and the clock for one deterministic run.
class Simulation {
 public:
  explicit Simulation(ScenarioConfig config)
      : config_(std::move(config)), channel_(transcript_) {
    build();
  }

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  void set_attack_script(AttackScript* script) {
    script_ = script;
    channel_.set_hook(script);
  }

  void run() {
    if (script_) script_->install(*this);
    schedule_start();
    loop();
    finish_notes();
  }

  // accessors used by scripts, operations and tests
  const ScenarioConfig& config() const { return config_; }
  Channel& channel() { return channel_; }
  Transcript& transcript() { return transcript_; }
  const Transcript& transcript() const { return transcript_; }
  Tick now() const { return now_; }
  Interconnect& interconnect() { return interconnect_; }

  std::vector<std::unique_ptr<UeActor>>& ues() { return ues_; }
  std::vector<std::unique_ptr<NetworkActor>>& networks() { return networks_; }

  UeActor* ue_by_endpoint(const std::string& ep) {
    for (auto& ue : ues_) {
      if (ue->st.endpoint == ep) return ue.get();
    }
    return nullptr;
  }
  UeActor* ue_by_supi(const std::string& supi_render) {
    return ue_by_endpoint("ue:" + supi_render);
  }
  NetworkActor* network_by_endpoint(const std::string& ep) {
    for (auto& net : networks_) {
      if (net->st.endpoint == ep) return net.get();
    }
    return nullptr;
  }
  NetworkActor* network_by_name(const std::string& name) {
    return network_by_endpoint("net:" + name);
  }

 private:
  void build() {
    Rng master(config_.seed);
    Rng ca_rng = master.fork(0x1);
    std::optional<SigningAuthority> ca_root;
    if (config_.knobs.ca_mode) {
      ca_root = SigningAuthority::generate("fiveg-root-ca", ca_rng);
    }

    // Home records per network PLMN; subscribers live in their home PLMN db.
    for (const auto& net_cfg : config_.networks) {
      if (interconnect_.contains(net_cfg.plmn.render())) continue;
      HomeNetworkDb db;
      db.plmn = net_cfg.plmn;
      Rng key_rng = master.fork(0x100 + interconnect_.size());
      db.keys = HnKeyMaterial::generate(key_rng);
      interconnect_[net_cfg.plmn.render()] = std::move(db);
    }
    for (const auto& sub : config_.subscribers) {
      auto& db = interconnect_.at(sub.supi.plmn().render());
      db.subscribers[sub.supi.render()] =
          SubscriberRecord{sub.supi, sub.root_key, 0};
    }

    size_t index = 0;
    for (const auto& net_cfg : config_.networks) {
      auto actor = std::make_unique<NetworkActor>();
      actor->st.endpoint = "net:" + net_cfg.name;
      actor->st.name = net_cfg.name;
      actor->st.plmn = net_cfg.plmn;
      actor->st.broadcast_priority = net_cfg.broadcast_priority;
      actor->st.policy = OperatorPolicy::standard(config_.knobs.null_algorithms_allowed);
      actor->st.knobs = config_.knobs;
      actor->st.interconnect = &interconnect_;
      actor->st.rng = master.fork(0x200 + index);
      if (ca_root) {
        Rng cred_rng = master.fork(0x300 + index);
        actor->st.credential =
            OperatorCredential::issue_for(net_cfg.plmn.render(), *ca_root, cred_rng);
      }
      networks_.push_back(std::move(actor));
      index++;
    }
    // Core routing: home PLMN -> the first network hosting it.
    for (auto& net : networks_) {
      for (const auto& other : networks_) {
        std::string plmn = other->st.plmn.render();
        if (!net->st.core_directory.contains(plmn))
          net->st.core_directory[plmn] = other->st.endpoint;
      }
    }

    index = 0;
    for (const auto& sub : config_.subscribers) {
      auto ue = std::make_unique<UeActor>();
      ue->st.endpoint = "ue:" + sub.supi.render();
      ue->st.supi = sub.supi;
      ue->st.root_key = sub.root_key;
      ue->st.rng = master.fork(0x400 + index);
      ue->st.policy.auth_method = sub.auth_method;
      ue->st.policy.null_algorithms_allowed = config_.knobs.null_algorithms_allowed;
      ue->st.policy.unauthenticated_emergency_allowed =
          config_.knobs.unauthenticated_emergency_allowed;
      ue->st.policy.ca_mode = config_.knobs.ca_mode;
      ue->st.policy.capability_echo = config_.knobs.capability_echo;
      ue->st.policy.hn_forces_null_scheme = config_.knobs.hn_forces_null_scheme;
      // USIM provisioning per the privacy scheme knob: the null scheme models
      // an operator that provisioned no public key at all.
      if (config_.knobs.suci_scheme == SuciScheme::ProbabilisticPk) {
        ue->st.usim_keys.provisioned_networks = sub.provisioned_networks;
        if (sub.provisioned_networks.contains(sub.supi.plmn())) {
          ue->st.usim_keys.public_key =
              interconnect_.at(sub.supi.plmn().render()).keys.public_key;
        }
      }
      if (ca_root) ue->st.trust_store.add_root(*ca_root);
      channel_.register_ue_endpoint(ue->st.endpoint);
      ues_.push_back(std::move(ue));
      index++;
    }
  }

  void schedule_start() {
    for (auto& net : networks_) {
      channel_.schedule_trigger(0, net->st.endpoint, TriggerKind::PowerOn);
    }
    for (auto& ue : ues_) {
      channel_.schedule_trigger(2, ue->st.endpoint, TriggerKind::PowerOn);
    }
    for (const auto& ev : config_.events) {
      std::string ue_ep = "ue:" + ev.subscriber;
      if (ev.action == "emergency_dial") {
        channel_.schedule_trigger(ev.at, ue_ep, TriggerKind::EmergencyDial, "user");
      } else if (ev.action == "tau_move") {
        channel_.schedule_trigger(ev.at, ue_ep, TriggerKind::TauMove, "net:" + ev.target);
      } else if (ev.action == "rederive") {
        channel_.schedule_trigger(ev.at, "net:" + ev.target, TriggerKind::Rederive,
                                  ue_ep);
      } else if (ev.action == "handover") {
        channel_.schedule_trigger(ev.at, "sim", TriggerKind::HandoverExec,
                                  ev.subscriber + "|" + ev.target);
      }
    }
  }

  void loop() {
    while (true) {
      auto ev = channel_.pop_next();
      if (!ev) break;
      if (ev->tick > config_.max_ticks) break;
      now_ = std::max(now_, ev->tick);
      if (ev->delivery) {
        route_delivery(*ev->delivery);
      } else if (ev->trigger) {
        route_trigger(*ev->trigger);
      }
    }
  }

  void route_delivery(Delivery& d) {
    if (script_ && !script_->endpoint().empty() && d.to == script_->endpoint()) {
      transcript_.log(now_, Transcript::EventKind::Deliver, d.link, d.from, d.to,
                      observable_view(d.msg) + " verdict=rogue");
      script_->on_rogue_message(*this, d, now_);
      return;
    }
    if (UeActor* ue = ue_by_endpoint(d.to)) {
      StepOutput out = ue->on_message(d, now_);
      transcript_.log(now_, Transcript::EventKind::Deliver, d.link, d.from, d.to,
                      observable_view(d.msg) + " verdict=" + out.verdict);
      emit_step_output(channel_, now_, d.to, std::move(out));
      return;
    }
    if (NetworkActor* net = network_by_endpoint(d.to)) {
      StepOutput out = net->on_message(d, now_);
      transcript_.log(now_, Transcript::EventKind::Deliver, d.link, d.from, d.to,
                      observable_view(d.msg) + " verdict=" + out.verdict);
      emit_step_output(channel_, now_, d.to, std::move(out));
      return;
    }
    transcript_.log(now_, Transcript::EventKind::Drop, d.link, d.from, d.to,
                    "no-such-endpoint");
  }

  void route_trigger(const Trigger& t) {
    if (t.kind == TriggerKind::HandoverExec && t.actor == "sim") {
      exec_handover(t.arg);
      return;
    }
    if (script_ && (t.kind == TriggerKind::AttackerScript ||
                    (!script_->endpoint().empty() && t.actor == script_->endpoint()))) {
      script_->on_script_trigger(*this, t, now_);
      return;
    }
    if (UeActor* ue = ue_by_endpoint(t.actor)) {
      emit_step_output(channel_, now_, t.actor, ue->on_trigger(t, now_));
      return;
    }
    if (NetworkActor* net = network_by_endpoint(t.actor)) {
      emit_step_output(channel_, now_, t.actor, net->on_trigger(t, now_));
      return;
    }
  }

  void exec_handover(const std::string& arg) {
    auto sep = arg.find('|');
    if (sep == std::string::npos) return;
    UeActor* ue = ue_by_supi(arg.substr(0, sep));
    NetworkActor* target = network_by_name(arg.substr(sep + 1));
    if (!ue || !target) return;
    // Source is wherever the UE currently holds an active AS context.
    NetworkActor* source = nullptr;
    for (const auto& [conn, ctx] : ue->st.contexts) {
      if (ctx.scope == ContextScope::As && ctx.state == ContextState::Active) {
        source = network_by_endpoint(ctx.peer);
        if (source) break;
      }
    }
    if (!source || source == target) return;
    HandoverOutcome outcome = handover(*ue, *source, *target,
                                       config_.knobs.handover_security, channel_, now_);
    if (!outcome.ok) {
      transcript_.note(now_, "sim", "handover-failed error=" + outcome.error);
    }
  }

  void finish_notes() {
    for (auto& ue : ues_) {
      size_t active = 0;
      for (const auto& [conn, ctx] : ue->st.contexts) {
        if (ctx.state == ContextState::Active) active++;
      }
      transcript_.note(now_, ue->st.endpoint,
                       "final phase=" + std::string(to_string(ue->st.phase)) +
                           " active-contexts=" + std::to_string(active) +
                           " h=" + ue->state_hash());
    }
    for (auto& net : networks_) {
      transcript_.note(now_, net->st.endpoint,
                       "final sessions=" + std::to_string(net->st.sessions.size()) +
                           " h=" + net->state_hash());
    }
  }

  ScenarioConfig config_;
  Transcript transcript_;
  Channel channel_;
  Interconnect interconnect_;
  std::vector<std::unique_ptr<UeActor>> ues_;
  std::vector<std::unique_ptr<NetworkActor>> networks_;
  AttackScript* script_ = nullptr;
  Tick now_ = 0;
};

}  // namespace fivegsim
