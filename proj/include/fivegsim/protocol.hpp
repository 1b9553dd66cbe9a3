#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fivegsim/channel.hpp"
#include "fivegsim/crypto_suite.hpp"
#include "fivegsim/identity.hpp"
#include "fivegsim/keys.hpp"
#include "fivegsim/messages.hpp"
#include "fivegsim/pki.hpp"
#include "fivegsim/scenario.hpp"

namespace fivegsim {

// ---- home network records ----------------------------------------------------

struct SubscriberRecord {
  Supi supi;
  RootKey root_key;  // ARPF copy of K
  uint32_t run_counter = 0;
};

struct ConfirmationEntry {
  std::string supi;
  std::string visited_plmn;
  uint32_t run = 0;
  Tick tick = 0;
};

struct AuthVector {
  Bytes nonce;
  uint32_t run = 0;
  Bytes autn;
  Bytes xres;
};

namespace aka {
inline Bytes autn(const RootKey& k, BytesView nonce, uint32_t run) {
  Bytes input(nonce.begin(), nonce.end());
  append_u32(input, run);
  return default_prf().derive(k.k, "aka-autn", input, 16);
}

inline Bytes res(const RootKey& k, BytesView nonce, uint32_t run, const Plmn& serving) {
  Bytes input(nonce.begin(), nonce.end());
  append_u32(input, run);
  append_bytes(input, to_bytes(serving.render()));
  return default_prf().derive(k.k, "aka-res", input, 16);
}
}  // namespace aka

// ARPF + UDM + home-control ledger for one home network. Serving networks
// reach it over the operator interconnect; the attacker has no access.
struct HomeNetworkDb {
  Plmn plmn;
  HnKeyMaterial keys;  // private key present on this side
  std::map<std::string, SubscriberRecord> subscribers;  // by rendered SUPI
  std::vector<ConfirmationEntry> ledger;

  std::optional<AuthVector> make_vector(const std::string& supi, const Plmn& serving,
                                        Rng& rng) {
    auto it = subscribers.find(supi);
    if (it == subscribers.end()) return std::nullopt;
    AuthVector v;
    v.nonce = rng.bytes(16);
    v.run = it->second.run_counter + 1;
    v.autn = aka::autn(it->second.root_key, v.nonce, v.run);
    v.xres = aka::res(it->second.root_key, v.nonce, v.run, serving);
    return v;
  }

  void confirm_run(const std::string& supi, uint32_t run) {
    auto it = subscribers.find(supi);
    if (it != subscribers.end() && run > it->second.run_counter)
      it->second.run_counter = run;
  }

  void resync(const std::string& supi, uint32_t reported_run) {
    auto it = subscribers.find(supi);
    if (it != subscribers.end() && reported_run > it->second.run_counter)
      it->second.run_counter = reported_run;
  }
};

using Interconnect = std::map<std::string, HomeNetworkDb>;  // by rendered PLMN

// ---- step output --------------------------------------------------------------

struct ScheduledTrigger {
  Tick delay = 0;
  TriggerKind kind = TriggerKind::RetryTimeout;
  std::string arg;
};

struct StepOutput {
  std::vector<std::pair<std::string, ProtocolMessage>> radio;  // to, message
  std::vector<std::pair<std::string, ProtocolMessage>> core;
  std::vector<ScheduledTrigger> triggers;
  std::vector<std::string> notes;
  std::string verdict = "ok";  // shown on the deliver transcript line

  void note(std::string text) { notes.push_back(std::move(text)); }
};

// ---- UE ------------------------------------------------------------------------

enum class UePhase : uint8_t {
  Idle,
  AwaitingAuth,
  AwaitingSmc,
  AwaitingAccept,
  Registered,
  Denied,
  AttachedLegacy,
  EmergencyActive,
};

inline std::string_view to_string(UePhase p) {
  switch (p) {
    case UePhase::Idle: return "idle";
    case UePhase::AwaitingAuth: return "awaiting-auth";
    case UePhase::AwaitingSmc: return "awaiting-smc";
    case UePhase::AwaitingAccept: return "awaiting-accept";
    case UePhase::Registered: return "registered";
    case UePhase::Denied: return "denied";
    case UePhase::AttachedLegacy: return "attached-legacy";
    case UePhase::EmergencyActive: return "emergency-active";
  }
  return "?";
}

struct CandidateNetwork {
  std::string endpoint;
  Plmn plmn;
  int32_t priority = 0;
};

struct UePolicy {
  std::string auth_method = "5g-aka";
  bool null_algorithms_allowed = false;
  bool unauthenticated_emergency_allowed = false;
  bool ca_mode = false;
  bool capability_echo = true;
  bool hn_forces_null_scheme = false;
};

inline constexpr Tick kRegistrationTimeout = 40;

struct UeState {
  std::string endpoint;
  Supi supi;
  RootKey root_key;        // USIM copy of K
  HnKeyMaterial usim_keys; // public key only
  TrustStore trust_store;
  UePolicy policy;
  Rng rng{0};

  UePhase phase = UePhase::Idle;
  bool powered_on = false;
  std::map<std::string, CandidateNetwork> candidates;
  std::optional<CandidateNetwork> camped;
  std::set<Plmn> barred_plmns;
  std::set<std::string> attempted;
  uint32_t last_accepted_run = 0;
  std::optional<Guti> guti;
  SecurityCapabilities sent_caps;
  std::string pending_access = "3gpp";
  std::optional<AuthChallengeBody> pending_challenge;
  std::map<std::string, SecurityContext> contexts;    // conn id -> context
  std::map<std::string, KeyHierarchy> hierarchies;    // conn id -> hierarchy
  uint64_t timer_cookie = 0;
  uint64_t anomalies = 0;

  HnKeyMaterial concealment_keys() const {
    return policy.hn_forces_null_scheme ? usim_keys.without_public_key() : usim_keys;
  }

  bool plmn_provisioned(const Plmn& plmn) const {
    return usim_keys.provisioned_networks.contains(plmn);
  }

  std::string nas_conn(const std::string& peer, const std::string& access) const {
    return peer + "/" + access;
  }

  SecurityContext* active_nas_context() {
    if (!camped) return nullptr;
    auto it = contexts.find(nas_conn(camped->endpoint, pending_access));
    if (it == contexts.end() || it->second.state != ContextState::Active) return nullptr;
    return &it->second;
  }

  // Protocol-visible state only; diagnostic counters stay out so that a
  // discarded message provably leaves the state unchanged.
  std::string state_hash() const {
    std::string s = std::string(to_string(phase));
    for (const auto& p : barred_plmns) s += "|barred:" + p.render();
    for (const auto& [conn, ctx] : contexts) s += "|" + conn + ":" + ctx.render();
    if (guti) s += "|guti:" + guti->render();
    s += "|run:" + std::to_string(last_accepted_run);
    return short_hash(s);
  }
};

// ---- network -------------------------------------------------------------------

enum class SessionPhase : uint8_t {
  Idle,
  AwaitingIdentity,
  AwaitingAuthResponse,
  AwaitingSmcComplete,
  Registered,
  EmergencyActive,
};

inline std::string_view to_string(SessionPhase p) {
  switch (p) {
    case SessionPhase::Idle: return "idle";
    case SessionPhase::AwaitingIdentity: return "awaiting-identity";
    case SessionPhase::AwaitingAuthResponse: return "awaiting-auth-response";
    case SessionPhase::AwaitingSmcComplete: return "awaiting-smc-complete";
    case SessionPhase::Registered: return "registered";
    case SessionPhase::EmergencyActive: return "emergency-active";
  }
  return "?";
}

struct NetSession {
  SessionPhase phase = SessionPhase::Idle;
  std::string ue_endpoint;
  std::optional<Supi> supi;
  SecurityCapabilities caps_seen;
  std::string access = "3gpp";
  std::string auth_method = "5g-aka";
  std::optional<AuthVector> vector;
  bool resynced = false;
  std::optional<KeyHierarchy> hierarchy;
  std::map<std::string, SecurityContext> contexts;  // conn id -> context
  std::optional<Guti> guti;
};

struct NetworkState {
  std::string endpoint;
  std::string name;
  Plmn plmn;
  int32_t broadcast_priority = 0;
  OperatorPolicy policy;
  Knobs knobs;
  std::optional<OperatorCredential> credential;
  Interconnect* interconnect = nullptr;  // null for actors with no operator trust
  std::map<std::string, std::string> core_directory;  // rendered PLMN -> endpoint
  Rng rng{0};

  std::map<std::string, NetSession> sessions;       // by UE endpoint
  std::map<uint32_t, std::string> guti_table;       // temp id -> rendered SUPI
  std::map<std::string, Guti> current_gutis;        // rendered SUPI -> last GUTI
  uint64_t registration_events = 0;
  std::vector<std::string> audit_trail;

  HomeNetworkDb* home_db_for(const Plmn& home) const {
    if (!interconnect) return nullptr;
    auto it = interconnect->find(home.render());
    return it == interconnect->end() ? nullptr : &it->second;
  }

  std::string nas_conn(const std::string& ue, const std::string& access) const {
    return ue + "/" + access;
  }

  std::string state_hash() const {
    std::string s = name;
    for (const auto& [ue, session] : sessions) {
      s += "|" + ue + ":" + std::string(to_string(session.phase));
      for (const auto& [conn, ctx] : session.contexts) s += "|" + conn + ":" + ctx.render();
    }
    s += "|events:" + std::to_string(registration_events);
    return short_hash(s);
  }
};

// ---- operations ---------------------------------------------------------------

// CA-mode gate for pre-authentication messages. With CA mode disabled
// (empty trust store) everything is unverifiable and baseline trust applies.
inline SignatureVerdict verify_preauth_signature(const ProtocolMessage& msg,
                                                 const TrustStore& trust) {
  Bytes body_bytes = encode_body(msg.kind, msg.body);
  return verify_message_signature(
      msg.signature,
      ProtocolMessage::signing_input(msg.kind, msg.sender_claimed_plmn, body_bytes),
      msg.sender_claimed_plmn.render(), trust);
}

namespace detail {

inline SecurityContext make_context(ContextScope scope, const std::string& conn,
                                    const std::string& peer, const std::string& access,
                                    const KeyHierarchy& h, uint8_t tx_direction) {
  SecurityContext ctx;
  ctx.scope = scope;
  ctx.connection_id = conn;
  ctx.peer = peer;
  ctx.bearer = access;
  ctx.enc_key = scope == ContextScope::Nas ? h.nas_enc : h.rrc_enc;
  ctx.int_key = scope == ContextScope::Nas ? h.nas_int : h.rrc_int;
  ctx.cipher_alg = h.context.cipher_alg;
  ctx.integrity_alg = h.context.integrity_alg;
  ctx.tx_direction = tx_direction;
  ctx.state = ContextState::Partial;
  return ctx;
}

}  // namespace detail

// ---- UE state machine -----------------------------------------------------------

class UeActor {
 public:
  UeState st;

  // Fresh concealed identity for this registration; GUTI is preferred when it
  // was assigned by the same PLMN.
  void start_registration(const CandidateNetwork& target, const std::string& access,
                          Tick /*now*/, StepOutput& out) {
    st.camped = target;
    st.attempted.insert(target.endpoint);
    st.pending_access = access;
    st.phase = UePhase::AwaitingAuth;

    // A new radio attach toward this endpoint invalidates any session state
    // left from an earlier attach on the same access.
    std::string conn = st.nas_conn(target.endpoint, access);
    if (st.contexts.erase(conn) > 0) {
      out.note("context-dropped conn=" + conn + " peer=" + target.endpoint);
    }
    st.contexts.erase(conn + "/as");
    st.hierarchies.erase(conn);

    RegistrationRequestBody body;
    if (st.guti && st.guti->plmn == target.plmn) {
      body.guti = st.guti;
    } else {
      body.suci = conceal_supi(st.supi, st.concealment_keys(), st.rng);
    }
    body.caps = SecurityCapabilities::standard(st.policy.null_algorithms_allowed);
    body.access = access;
    body.auth_method = st.policy.auth_method;
    st.sent_caps = body.caps;

    // Same-PLMN dual registration reuses the common NAS security context:
    // second access gets the same keys with its own counter stream.
    if (access == "non3gpp") {
      auto primary = st.contexts.find(st.nas_conn(target.endpoint, "3gpp"));
      if (primary != st.contexts.end() && primary->second.state == ContextState::Active) {
        SecurityContext second = primary->second;
        second.connection_id = st.nas_conn(target.endpoint, access);
        second.bearer = access;
        second.tx_counter = 0;
        second.rx_last = 0;
        second.rx_seen = false;
        st.contexts[second.connection_id] = second;
        auto h = st.hierarchies.find(st.nas_conn(target.endpoint, "3gpp"));
        if (h != st.hierarchies.end())
          st.hierarchies[second.connection_id] = h->second;
        st.phase = UePhase::AwaitingAccept;
      }
    }

    out.radio.emplace_back(target.endpoint,
                           make_clear(MessageKind::RegistrationRequest, st.supi.plmn(),
                                      std::move(body)));
    st.timer_cookie++;
    out.triggers.push_back(
        {kRegistrationTimeout, TriggerKind::RetryTimeout, std::to_string(st.timer_cookie)});
  }

  // Candidate selection: highest priority wins; barred PLMNs and endpoints
  // already attempted this round are skipped. A registered UE moves only for
  // a strictly better cell.
  void reselect(Tick now, StepOutput& out) {
    if (st.phase == UePhase::AttachedLegacy || st.phase == UePhase::EmergencyActive)
      return;
    bool busy = st.phase == UePhase::AwaitingAuth || st.phase == UePhase::AwaitingSmc ||
                st.phase == UePhase::AwaitingAccept;
    if (busy) return;
    const CandidateNetwork* best = nullptr;
    for (const auto& [ep, cand] : st.candidates) {
      if (st.barred_plmns.contains(cand.plmn)) continue;
      if (st.attempted.contains(ep)) continue;
      if (st.phase == UePhase::Registered) {
        if (!st.camped || cand.priority <= st.camped->priority) continue;
      }
      if (!best || cand.priority > best->priority) best = &cand;
    }
    if (best) start_registration(*best, "3gpp", now, out);
  }

  StepOutput on_trigger(const Trigger& trigger, Tick now) {
    StepOutput out;
    switch (trigger.kind) {
      case TriggerKind::PowerOn:
        st.powered_on = true;
        reselect(now, out);
        break;
      case TriggerKind::RetryTimeout: {
        if (trigger.arg != std::to_string(st.timer_cookie)) break;  // stale
        bool stuck = st.phase == UePhase::AwaitingAuth ||
                     st.phase == UePhase::AwaitingSmc ||
                     st.phase == UePhase::AwaitingAccept;
        if (!stuck) break;
        out.note("registration-timeout endpoint=" +
                 (st.camped ? st.camped->endpoint : std::string("-")));
        st.phase = UePhase::Idle;
        st.camped.reset();
        reselect(now, out);
        if (st.phase == UePhase::Idle) {
          // No untried cell left; start a fresh selection round.
          st.attempted.clear();
          reselect(now, out);
        }
        if (st.phase == UePhase::Idle) out.note("phase=idle no-viable-candidates");
        break;
      }
      case TriggerKind::EmergencyDial: {
        if (!st.policy.unauthenticated_emergency_allowed) {
          out.note("emergency-ignored unauthenticated-not-allowed");
          break;
        }
        // Unauthenticated emergency uses the null protection scheme for the
        // identity regardless of key provisioning.
        HnKeyMaterial null_keys;
        Suci identity = conceal_supi(st.supi, null_keys, st.rng);
        EmergencyRequestBody body{identity};
        const CandidateNetwork* target = st.camped ? &*st.camped : nullptr;
        if (!target) {
          for (const auto& [ep, cand] : st.candidates) {
            if (!target || cand.priority > target->priority) target = &cand;
          }
        }
        if (!target) {
          out.note("emergency-failed no-network");
          break;
        }
        st.phase = UePhase::EmergencyActive;
        out.note("emergency-dial unauthenticated identity={" + identity.render() + "}");
        out.radio.emplace_back(target->endpoint,
                               make_clear(MessageKind::EmergencyRequest, st.supi.plmn(),
                                          std::move(body)));
        break;
      }
      case TriggerKind::TauMove: {
        // Movement into a new tracking area handled by a network we hold no
        // context with; the request is one of the clear pre-authentication
        // edge cases.
        if (!st.guti) break;
        auto it = st.candidates.find(trigger.arg);
        if (it == st.candidates.end()) break;
        st.camped = it->second;
        st.attempted.insert(trigger.arg);
        st.phase = UePhase::AwaitingAuth;
        st.pending_access = "3gpp";
        TauRequestBody body{*st.guti};
        out.radio.emplace_back(trigger.arg, make_clear(MessageKind::TauRequest,
                                                       st.supi.plmn(), std::move(body)));
        st.timer_cookie++;
        out.triggers.push_back({kRegistrationTimeout, TriggerKind::RetryTimeout,
                                std::to_string(st.timer_cookie)});
        break;
      }
      default:
        break;
    }
    return out;
  }

  StepOutput on_message(const Delivery& delivery, Tick now) {
    StepOutput out;
    const ProtocolMessage& msg = delivery.msg;

    if (!msg.clear()) {
      handle_protected(delivery, now, out);
      return out;
    }

    // CA mode gates every clear downlink message, broadcasts included.
    if (st.policy.ca_mode) {
      SignatureVerdict v = verify_preauth_signature(msg, st.trust_store);
      if (v != SignatureVerdict::Verified) {
        out.verdict = "discarded-" + std::string(to_string(v));
        st.anomalies++;
        return out;
      }
      out.verdict = "signature-verified";
    }

    // A clear NAS message from a peer we already share an active context with
    // is a protocol violation; only broadcasts stay acceptable.
    if (msg.kind != MessageKind::Broadcast) {
      for (const auto& [conn, ctx] : st.contexts) {
        if (ctx.peer == delivery.from && ctx.state == ContextState::Active &&
            ctx.scope == ContextScope::Nas) {
          out.verdict = "discarded-clear-after-context";
          st.anomalies++;
          return out;
        }
      }
    }

    switch (msg.kind) {
      case MessageKind::Broadcast: {
        const auto* body = std::get_if<BroadcastBody>(&msg.body);
        if (!body) break;
        st.candidates[delivery.from] =
            CandidateNetwork{delivery.from, msg.sender_claimed_plmn, body->priority};
        // Cell scan completes at power-on; afterwards new broadcasts can pull
        // the UE to a better cell or out of a denied/idle corner.
        if (st.powered_on) reselect(now, out);
        break;
      }
      case MessageKind::AuthChallenge:
        handle_auth_challenge(delivery, now, out);
        break;
      case MessageKind::IdentityRequest: {
        if (st.phase != UePhase::AwaitingAuth || !st.camped ||
            st.camped->endpoint != delivery.from) {
          drop_unexpected(msg, out);
          break;
        }
        // Identity re-request: respond with a fresh SUCI.
        IdentityResponseBody body{conceal_supi(st.supi, st.concealment_keys(), st.rng)};
        out.radio.emplace_back(delivery.from,
                               make_clear(MessageKind::IdentityResponse, st.supi.plmn(),
                                          std::move(body)));
        break;
      }
      case MessageKind::RegistrationReject:
      case MessageKind::TauReject: {
        if (!st.camped || st.camped->endpoint != delivery.from ||
            st.phase == UePhase::Registered) {
          drop_unexpected(msg, out);
          break;
        }
        std::string cause = msg.kind == MessageKind::RegistrationReject
                                ? std::get<RegistrationRejectBody>(msg.body).cause
                                : std::get<TauRejectBody>(msg.body).cause;
        // Baseline trust of unauthenticated reject messages: a permanent
        // cause bars the PLMN for the rest of the scenario.
        if (cause == "permanent") {
          st.barred_plmns.insert(msg.sender_claimed_plmn);
          out.note("reject-accepted cause=permanent barred=" +
                   msg.sender_claimed_plmn.render());
        } else {
          out.note("reject-accepted cause=" + cause);
        }
        st.phase = UePhase::Idle;
        st.camped.reset();
        reselect(now, out);
        if (st.phase == UePhase::Idle) {
          st.phase = UePhase::Denied;
          std::string barred;
          for (const auto& p : st.barred_plmns) {
            if (!barred.empty()) barred += ",";
            barred += p.render();
          }
          out.note("phase=denied barred=" + (barred.empty() ? "-" : barred));
        }
        break;
      }
      case MessageKind::DowngradeCommand: {
        if (!st.camped || st.camped->endpoint != delivery.from) {
          drop_unexpected(msg, out);
          break;
        }
        // Obeyed only when the claimed network has no public key provisioned
        // in the USIM (and CA mode did not already discard the message).
        if (st.plmn_provisioned(msg.sender_claimed_plmn)) {
          out.note("downgrade-refused plmn-provisioned " +
                   msg.sender_claimed_plmn.render());
          break;
        }
        const auto& body = std::get<DowngradeCommandBody>(msg.body);
        st.phase = UePhase::AttachedLegacy;
        st.timer_cookie++;  // cancel pending retries
        out.note("phase=attached-legacy target=" + body.target +
                 " mutual-auth=none protection=null-equivalent");
        break;
      }
      default:
        drop_unexpected(msg, out);
        break;
    }
    return out;
  }

  std::string state_hash() const { return st.state_hash(); }

 private:
  void drop_unexpected(const ProtocolMessage& /*msg*/, StepOutput& out) {
    out.verdict = "discarded-unexpected";
    st.anomalies++;
  }

  void handle_auth_challenge(const Delivery& delivery, Tick /*now*/, StepOutput& out) {
    const ProtocolMessage& msg = delivery.msg;
    const auto* body = std::get_if<AuthChallengeBody>(&msg.body);
    if (!body || st.phase != UePhase::AwaitingAuth || !st.camped ||
        st.camped->endpoint != delivery.from) {
      drop_unexpected(msg, out);
      return;
    }
    Bytes expected_autn = aka::autn(st.root_key, body->nonce, body->run);
    if (expected_autn != body->autn) {
      // The network failed to prove knowledge of K; mutual authentication
      // stops here.
      out.note("network-auth-failed endpoint=" + delivery.from);
      AuthResponseBody resp;
      resp.failure = AuthFailureKind::MacFailure;
      out.radio.emplace_back(delivery.from,
                             make_clear(MessageKind::AuthResponse, st.supi.plmn(),
                                        std::move(resp)));
      return;
    }
    if (body->run <= st.last_accepted_run) {
      AuthResponseBody resp;
      resp.failure = AuthFailureKind::SyncFailure;
      resp.sync_run = st.last_accepted_run;
      out.note("sync-failure challenge-run=" + std::to_string(body->run) +
               " ue-run=" + std::to_string(st.last_accepted_run));
      out.radio.emplace_back(delivery.from,
                             make_clear(MessageKind::AuthResponse, st.supi.plmn(),
                                        std::move(resp)));
      return;
    }
    st.last_accepted_run = body->run;
    st.pending_challenge = *body;
    AuthResponseBody resp;
    resp.res = aka::res(st.root_key, body->nonce, body->run, msg.sender_claimed_plmn);
    out.radio.emplace_back(delivery.from, make_clear(MessageKind::AuthResponse,
                                                     st.supi.plmn(), std::move(resp)));
    st.phase = UePhase::AwaitingSmc;
  }

  void handle_protected(const Delivery& delivery, Tick now, StepOutput& out) {
    const ProtocolMessage& msg = delivery.msg;
    const ProtectionEnvelope& env = *msg.envelope;

    if (msg.kind == MessageKind::SecurityModeCommand && st.phase == UePhase::AwaitingSmc &&
        st.camped && st.camped->endpoint == delivery.from && st.pending_challenge) {
      handle_smc(delivery, now, out);
      return;
    }

    // Everything else protected must match an existing context with the peer.
    std::string conn = st.nas_conn(delivery.from, st.pending_access);
    auto it = st.contexts.find(conn);
    if (it == st.contexts.end() || it->second.scope != ContextScope::Nas) {
      drop_unexpected(msg, out);
      return;
    }
    SecurityContext& ctx = it->second;
    UnprotectResult r = unprotect(env, ctx);
    if (!r.ok()) {
      out.verdict = "discarded-" + std::string(to_string(r.verdict));
      return;
    }
    auto decoded = decode_body(msg.kind, r.payload);
    if (!decoded) {
      out.verdict = "discarded-malformed";
      st.anomalies++;
      return;
    }
    switch (msg.kind) {
      case MessageKind::RegistrationAccept: {
        if (st.phase != UePhase::AwaitingAccept) {
          drop_unexpected(msg, out);
          return;
        }
        const auto& body = std::get<RegistrationAcceptBody>(*decoded);
        st.guti = body.guti;
        ctx.state = ContextState::Active;
        st.phase = UePhase::Registered;
        st.attempted.clear();
        st.timer_cookie++;
        out.note("registered plmn=" + msg.sender_claimed_plmn.render() +
                 " guti={" + body.guti.render() + "}");
        break;
      }
      case MessageKind::AuthChallenge: {
        // Network-initiated re-authentication over the protected connection.
        const auto& body = std::get<AuthChallengeBody>(*decoded);
        if (st.phase != UePhase::Registered) {
          drop_unexpected(msg, out);
          return;
        }
        auto hier = st.hierarchies.find(conn);
        Bytes expected_autn = aka::autn(st.root_key, body.nonce, body.run);
        if (hier == st.hierarchies.end() || expected_autn != body.autn ||
            body.run <= st.last_accepted_run) {
          out.verdict = "discarded-bad-rederive";
          st.anomalies++;
          return;
        }
        st.last_accepted_run = body.run;
        AuthResponseBody resp;
        resp.res = aka::res(st.root_key, body.nonce, body.run, msg.sender_claimed_plmn);
        ProtocolMessage reply = make_protected(MessageKind::AuthResponse, st.supi.plmn(),
                                               MessageBody{resp}, ctx);
        out.radio.emplace_back(delivery.from, std::move(reply));
        // Swap in the rederived hierarchy; counters restart with the new keys.
        DerivationContext dctx = hier->second.context;
        dctx.run_counter = body.run;
        KeyHierarchy next = derive_hierarchy(st.root_key, dctx);
        adopt_hierarchy(conn, delivery.from, next, /*tx_direction=*/0);
        st.contexts[conn].state = ContextState::Active;
        out.note("rederived run=" + std::to_string(body.run) + " conn=" + conn);
        break;
      }
      default:
        drop_unexpected(msg, out);
        return;
    }
  }

  void handle_smc(const Delivery& delivery, Tick now, StepOutput& out) {
    const ProtocolMessage& msg = delivery.msg;
    const ProtectionEnvelope& env = *msg.envelope;
    // The envelope metadata names the selected algorithms; keys are derived
    // from them, then the envelope must verify under the fresh context.
    DerivationContext dctx;
    dctx.serving_network = msg.sender_claimed_plmn.render();
    dctx.run_counter = st.pending_challenge->run;
    dctx.cipher_alg = env.cipher_alg;
    dctx.integrity_alg = env.integrity_alg;
    KeyHierarchy h = derive_hierarchy(st.root_key, dctx);

    std::string conn = st.nas_conn(delivery.from, st.pending_access);
    SecurityContext ctx = detail::make_context(ContextScope::Nas, conn, delivery.from,
                                               st.pending_access, h, /*tx_direction=*/0);
    UnprotectResult r = unprotect(env, ctx);
    if (!r.ok()) {
      out.verdict = "discarded-" + std::string(to_string(r.verdict));
      return;  // candidate context dropped, state unchanged
    }
    auto decoded = decode_body(MessageKind::SecurityModeCommand, r.payload);
    if (!decoded) {
      out.verdict = "discarded-malformed";
      st.anomalies++;
      return;
    }
    const auto& body = std::get<SecurityModeCommandBody>(*decoded);
    if (body.run != st.pending_challenge->run || body.cipher != env.cipher_alg ||
        body.integrity != env.integrity_alg) {
      out.verdict = "discarded-inconsistent-smc";
      st.anomalies++;
      return;
    }
    // Bidding-down check: the echoed capabilities must equal what we sent.
    if (body.replayed_caps && !(*body.replayed_caps == st.sent_caps)) {
      out.note("bidding-down-detected sent={" + st.sent_caps.render() + "} echoed={" +
               body.replayed_caps->render() + "}");
      st.phase = UePhase::Idle;
      st.attempted.clear();
      CandidateNetwork target = *st.camped;
      st.camped.reset();
      start_registration(target, st.pending_access, now, out);
      return;
    }
    adopt_hierarchy(conn, delivery.from, h, /*tx_direction=*/0);
    SecurityContext& committed = st.contexts[conn];
    committed.rx_last = env.replay_counter;
    committed.rx_seen = true;
    committed.state = ContextState::Active;
    out.note("context-active conn=" + conn + " cipher=" + to_string(env.cipher_alg) +
             " integ=" + to_string(env.integrity_alg) + " peer=" + delivery.from);
    ProtocolMessage reply = make_protected(MessageKind::SecurityModeComplete,
                                           st.supi.plmn(),
                                           MessageBody{SecurityModeCompleteBody{}},
                                           committed);
    out.radio.emplace_back(delivery.from, std::move(reply));
    st.phase = UePhase::AwaitingAccept;
  }

  void adopt_hierarchy(const std::string& conn, const std::string& peer,
                       const KeyHierarchy& h, uint8_t tx_direction) {
    st.hierarchies[conn] = h;
    st.contexts[conn] = detail::make_context(ContextScope::Nas, conn, peer,
                                             st.pending_access, h, tx_direction);
    std::string as_conn = conn + "/as";
    SecurityContext as_ctx = detail::make_context(ContextScope::As, as_conn, peer,
                                                  st.pending_access, h, tx_direction);
    as_ctx.state = ContextState::Active;
    st.contexts[as_conn] = as_ctx;
  }
};

// ---- network state machine -------------------------------------------------------

class NetworkActor {
 public:
  NetworkState st;

  ProtocolMessage signed_clear(MessageKind kind, MessageBody body) const {
    if (st.knobs.ca_mode && st.credential)
      return make_clear_signed(kind, st.plmn, std::move(body), *st.credential);
    return make_clear(kind, st.plmn, std::move(body));
  }

  StepOutput on_trigger(const Trigger& trigger, Tick /*now*/) {
    StepOutput out;
    switch (trigger.kind) {
      case TriggerKind::PowerOn: {  // network start: announce the cell
        ProtocolMessage msg =
            signed_clear(MessageKind::Broadcast, BroadcastBody{st.broadcast_priority});
        out.radio.emplace_back("*", std::move(msg));
        break;
      }
      case TriggerKind::Rederive: {
        // Operator-initiated re-authentication for one registered UE.
        auto it = st.sessions.find(trigger.arg);
        if (it == st.sessions.end() || it->second.phase != SessionPhase::Registered) {
          out.note("rederive-skipped no-active-nas-connection ue=" + trigger.arg);
          break;
        }
        NetSession& session = it->second;
        HomeNetworkDb* home = st.home_db_for(session.supi->plmn());
        if (!home) break;
        auto vec = home->make_vector(session.supi->render(), st.plmn, st.rng);
        if (!vec) break;
        session.vector = vec;
        AuthChallengeBody body{vec->nonce, vec->run, vec->autn};
        std::string conn = st.nas_conn(trigger.arg, session.access);
        auto ctx = session.contexts.find(conn);
        if (ctx == session.contexts.end()) break;
        out.radio.emplace_back(trigger.arg,
                               make_protected(MessageKind::AuthChallenge, st.plmn,
                                              MessageBody{body}, ctx->second));
        out.note("rederive-initiated ue=" + trigger.arg +
                 " run=" + std::to_string(vec->run));
        break;
      }
      default:
        break;
    }
    return out;
  }

  StepOutput on_message(const Delivery& delivery, Tick now) {
    StepOutput out;
    const ProtocolMessage& msg = delivery.msg;
    if (delivery.link == Link::Core) {
      handle_core(delivery, now, out);
      return out;
    }
    if (!msg.clear()) {
      handle_protected(delivery, now, out);
      return out;
    }
    switch (msg.kind) {
      case MessageKind::RegistrationRequest:
        handle_registration_request(delivery, now, out);
        break;
      case MessageKind::TauRequest: {
        const auto* body = std::get_if<TauRequestBody>(&msg.body);
        if (!body) {
          out.verdict = "discarded-malformed";
          break;
        }
        RegistrationRequestBody as_registration;
        as_registration.guti = body->guti;
        as_registration.caps = SecurityCapabilities::standard(
            st.knobs.null_algorithms_allowed);
        Delivery d = delivery;
        d.msg.body = as_registration;
        d.msg.kind = MessageKind::RegistrationRequest;
        handle_registration_request(d, now, out);
        break;
      }
      case MessageKind::IdentityResponse: {
        auto it = st.sessions.find(delivery.from);
        if (it == st.sessions.end() || it->second.phase != SessionPhase::AwaitingIdentity) {
          out.verdict = "discarded-unexpected";
          break;
        }
        const auto* body = std::get_if<IdentityResponseBody>(&msg.body);
        if (!body) {
          out.verdict = "discarded-malformed";
          break;
        }
        resolve_and_challenge(it->second, body->suci, delivery.from, now, out);
        break;
      }
      case MessageKind::AuthResponse:
        handle_auth_response(delivery, now, out);
        break;
      case MessageKind::EmergencyRequest: {
        const auto* body = std::get_if<EmergencyRequestBody>(&msg.body);
        if (!body) {
          out.verdict = "discarded-malformed";
          break;
        }
        if (!st.knobs.unauthenticated_emergency_allowed) {
          out.note("emergency-rejected unauthenticated-not-allowed ue=" + delivery.from);
          break;
        }
        NetSession& session = st.sessions[delivery.from];
        session.ue_endpoint = delivery.from;
        session.phase = SessionPhase::EmergencyActive;
        out.note("emergency-session ue=" + delivery.from +
                 " protection=null unauthenticated identity={" + body->identity.render() +
                 "}");
        break;
      }
      default:
        out.verdict = "discarded-unexpected";
        break;
    }
    return out;
  }

  std::string state_hash() const { return st.state_hash(); }

 private:
  void handle_core(const Delivery& delivery, Tick now, StepOutput& out) {
    const ProtocolMessage& msg = delivery.msg;
    if (msg.kind != MessageKind::AuthResult) {
      out.verdict = "discarded-unexpected";
      return;
    }
    const auto* body = std::get_if<AuthResultBody>(&msg.body);
    if (!body || !st.interconnect) {
      out.verdict = "discarded-malformed";
      return;
    }
    auto it = st.interconnect->find(st.plmn.render());
    if (it == st.interconnect->end()) {
      out.verdict = "discarded-not-home";
      return;
    }
    if (body->success) {
      it->second.ledger.push_back(
          ConfirmationEntry{body->supi, body->visited_plmn, body->run, now});
      it->second.confirm_run(body->supi, body->run);
      out.note("home-control-confirmation supi=" + body->supi +
               " visited=" + body->visited_plmn + " run=" + std::to_string(body->run));
    }
  }

  void handle_registration_request(const Delivery& delivery, Tick now, StepOutput& out) {
    const ProtocolMessage& msg = delivery.msg;
    const auto* body = std::get_if<RegistrationRequestBody>(&msg.body);
    if (!body || (!body->suci && !body->guti)) {
      out.verdict = "discarded-malformed";
      return;
    }
    NetSession session;
    session.ue_endpoint = delivery.from;
    session.caps_seen = body->caps;
    session.access = body->access;
    session.auth_method = body->auth_method;

    if (body->guti) {
      auto known = st.guti_table.find(body->guti->temp_id);
      if (known == st.guti_table.end()) {
        // Unknown temporary identity: ask the UE to identify itself.
        session.phase = SessionPhase::AwaitingIdentity;
        st.sessions[delivery.from] = std::move(session);
        out.radio.emplace_back(delivery.from, signed_clear(MessageKind::IdentityRequest,
                                                           IdentityRequestBody{}));
        return;
      }
      auto supi = Supi::parse(known->second);
      if (!supi) {
        out.verdict = "discarded-internal";
        return;
      }
      session.supi = supi;
      // Same-PLMN dual registration over a second access type: reuse the
      // common NAS security context rather than re-running authentication.
      if (try_dual_access(session, delivery.from, now, out)) return;
      challenge(session, delivery.from, now, out);
      return;
    }

    auto resolved = resolve_suci(*body->suci, out);
    if (!resolved) return;
    session.supi = resolved;
    if (try_dual_access(session, delivery.from, now, out)) return;
    challenge(session, delivery.from, now, out);
  }

  std::optional<Supi> resolve_suci(const Suci& suci, StepOutput& out) {
    HomeNetworkDb* home = st.home_db_for(suci.plmn());
    if (!home) {
      out.verdict = "discarded-unknown-home-plmn";
      return std::nullopt;
    }
    DeconcealResult r = deconceal_supi(suci, home->keys);
    if (!r.ok()) {
      out.verdict = r.error == DeconcealError::MissingPrivateKey
                        ? "discarded-missing-private-key"
                        : "discarded-malformed-ciphertext";
      return std::nullopt;
    }
    if (!home->subscribers.contains(r.supi->render())) {
      out.verdict = "discarded-unknown-subscriber";
      return std::nullopt;
    }
    return r.supi;
  }

  bool try_dual_access(NetSession& session, const std::string& ue, Tick /*now*/,
                       StepOutput& out) {
    if (session.access == "3gpp") return false;
    auto existing = st.sessions.find(ue);
    if (existing == st.sessions.end() ||
        existing->second.phase != SessionPhase::Registered ||
        !existing->second.supi || !session.supi ||
        !(*existing->second.supi == *session.supi)) {
      return false;
    }
    std::string primary_conn = st.nas_conn(ue, existing->second.access);
    auto primary = existing->second.contexts.find(primary_conn);
    if (primary == existing->second.contexts.end() ||
        primary->second.state != ContextState::Active) {
      return false;
    }
    SecurityContext second = primary->second;
    second.connection_id = st.nas_conn(ue, session.access);
    second.bearer = session.access;
    second.tx_counter = 0;
    second.rx_last = 0;
    second.rx_seen = false;
    existing->second.contexts[second.connection_id] = second;
    out.note("context-active conn=" + second.connection_id +
             " cipher=" + to_string(second.cipher_alg) +
             " integ=" + to_string(second.integrity_alg) + " shared-nas-keys ue=" + ue);
    RegistrationAcceptBody accept{assign_guti(session.supi->render())};
    out.radio.emplace_back(
        ue, make_protected(MessageKind::RegistrationAccept, st.plmn,
                           MessageBody{accept},
                           existing->second.contexts[second.connection_id]));
    return true;
  }

  void resolve_and_challenge(NetSession& session, const Suci& suci,
                             const std::string& ue, Tick now, StepOutput& out) {
    auto resolved = resolve_suci(suci, out);
    if (!resolved) return;
    NetSession fresh;
    fresh.ue_endpoint = ue;
    fresh.caps_seen = session.caps_seen;
    fresh.access = session.access;
    fresh.auth_method = session.auth_method;
    fresh.supi = resolved;
    challenge(fresh, ue, now, out);
  }

  void challenge(NetSession& session, const std::string& ue, Tick /*now*/, StepOutput& out) {
    HomeNetworkDb* home = st.home_db_for(session.supi->plmn());
    if (!home) {
      out.verdict = "discarded-unknown-home-plmn";
      return;
    }
    auto vec = home->make_vector(session.supi->render(), st.plmn, st.rng);
    if (!vec) {
      out.verdict = "discarded-unknown-subscriber";
      return;
    }
    session.vector = vec;
    session.phase = SessionPhase::AwaitingAuthResponse;
    st.sessions[ue] = session;
    AuthChallengeBody body{vec->nonce, vec->run, vec->autn, session.auth_method};
    out.radio.emplace_back(ue, signed_clear(MessageKind::AuthChallenge, body));
  }

  void handle_auth_response(const Delivery& delivery, Tick /*now*/, StepOutput& out) {
    auto it = st.sessions.find(delivery.from);
    if (it == st.sessions.end() ||
        it->second.phase != SessionPhase::AwaitingAuthResponse || !it->second.vector) {
      out.verdict = "discarded-unexpected";
      return;
    }
    NetSession& session = it->second;
    const auto* body = std::get_if<AuthResponseBody>(&delivery.msg.body);
    if (!body) {
      out.verdict = "discarded-malformed";
      return;
    }
    HomeNetworkDb* home = st.home_db_for(session.supi->plmn());
    if (!home) {
      out.verdict = "discarded-unknown-home-plmn";
      return;
    }
    if (body->failure == AuthFailureKind::MacFailure) {
      out.note("auth-failure kind=mac-failure supi=" + session.supi->render());
      st.sessions.erase(it);
      return;
    }
    if (body->failure == AuthFailureKind::SyncFailure) {
      if (session.resynced) {  // one recovery attempt per session
        out.note("auth-failure kind=sync-unrecovered supi=" + session.supi->render());
        st.sessions.erase(it);
        return;
      }
      home->resync(session.supi->render(), body->sync_run);
      auto vec = home->make_vector(session.supi->render(), st.plmn, st.rng);
      if (!vec) return;
      session.vector = vec;
      session.resynced = true;
      out.note("resync supi=" + session.supi->render() +
               " run=" + std::to_string(vec->run));
      AuthChallengeBody challenge_body{vec->nonce, vec->run, vec->autn};
      out.radio.emplace_back(delivery.from,
                             signed_clear(MessageKind::AuthChallenge, challenge_body));
      return;
    }
    if (body->res != session.vector->xres) {
      out.note("auth-failure kind=res-mismatch supi=" + session.supi->render());
      st.sessions.erase(it);
      return;
    }

    // Authentication succeeded: confirm to the home network over the
    // interconnect, then negotiate algorithms and establish the context.
    auto home_ep = st.core_directory.find(session.supi->plmn().render());
    if (home_ep != st.core_directory.end()) {
      AuthResultBody confirmation{session.supi->render(), st.plmn.render(),
                                  session.vector->run, true};
      out.core.emplace_back(home_ep->second,
                            make_clear(MessageKind::AuthResult, st.plmn,
                                       MessageBody{confirmation}));
    }

    NegotiationResult negotiated = negotiate(session.caps_seen, st.policy);
    if (!negotiated.ok()) {
      out.note("no-common-algorithm ue=" + delivery.from);
      out.radio.emplace_back(delivery.from,
                             signed_clear(MessageKind::RegistrationReject,
                                          RegistrationRejectBody{"no-common-algorithm"}));
      st.sessions.erase(it);
      return;
    }

    DerivationContext dctx;
    dctx.serving_network = st.plmn.render();
    dctx.run_counter = session.vector->run;
    dctx.cipher_alg = *negotiated.cipher;
    dctx.integrity_alg = *negotiated.integrity;
    RootKey k = home->subscribers.at(session.supi->render()).root_key;
    session.hierarchy = derive_hierarchy(k, dctx);

    std::string conn = st.nas_conn(delivery.from, session.access);
    SecurityContext nas_ctx = detail::make_context(ContextScope::Nas, conn, delivery.from,
                                                   session.access, *session.hierarchy,
                                                   /*tx_direction=*/1);
    SecurityContext as_ctx = detail::make_context(ContextScope::As, conn + "/as",
                                                  delivery.from, session.access,
                                                  *session.hierarchy,
                                                  /*tx_direction=*/1);
    as_ctx.state = ContextState::Active;
    session.contexts[conn] = nas_ctx;
    session.contexts[conn + "/as"] = as_ctx;
    out.note("context-partial conn=" + conn + " cipher=" + to_string(*negotiated.cipher) +
             " integ=" + to_string(*negotiated.integrity) + " ue=" + delivery.from);

    SecurityModeCommandBody smc;
    smc.cipher = *negotiated.cipher;
    smc.integrity = *negotiated.integrity;
    smc.run = session.vector->run;
    if (st.knobs.capability_echo) smc.replayed_caps = negotiated.replayed_caps;
    out.radio.emplace_back(delivery.from,
                           make_protected(MessageKind::SecurityModeCommand, st.plmn,
                                          MessageBody{smc}, session.contexts[conn]));
    session.phase = SessionPhase::AwaitingSmcComplete;
  }

  void handle_protected(const Delivery& delivery, Tick /*now*/, StepOutput& out) {
    auto it = st.sessions.find(delivery.from);
    if (it == st.sessions.end()) {
      out.verdict = "discarded-unexpected";
      return;
    }
    NetSession& session = it->second;
    std::string conn = st.nas_conn(delivery.from, session.access);
    auto ctx_it = session.contexts.find(conn);
    if (ctx_it == session.contexts.end()) {
      out.verdict = "discarded-no-context";
      return;
    }
    UnprotectResult r = unprotect(*delivery.msg.envelope, ctx_it->second);
    if (!r.ok()) {
      out.verdict = "discarded-" + std::string(to_string(r.verdict));
      return;
    }
    auto decoded = decode_body(delivery.msg.kind, r.payload);
    if (!decoded) {
      out.verdict = "discarded-malformed";
      return;
    }
    switch (delivery.msg.kind) {
      case MessageKind::SecurityModeComplete: {
        if (session.phase != SessionPhase::AwaitingSmcComplete) {
          out.verdict = "discarded-unexpected";
          return;
        }
        ctx_it->second.state = ContextState::Active;
        session.phase = SessionPhase::Registered;
        out.note("context-active conn=" + conn +
                 " cipher=" + to_string(ctx_it->second.cipher_alg) +
                 " integ=" + to_string(ctx_it->second.integrity_alg) +
                 " ue=" + delivery.from);
        uint32_t run = session.vector ? session.vector->run : 0;
        HomeNetworkDb* home = st.home_db_for(session.supi->plmn());
        if (home) home->confirm_run(session.supi->render(), run);
        RegistrationAcceptBody accept{assign_guti(session.supi->render())};
        session.guti = accept.guti;
        out.note("registered supi=" + session.supi->render() + " guti={" +
                 accept.guti.render() + "}");
        out.radio.emplace_back(delivery.from,
                               make_protected(MessageKind::RegistrationAccept, st.plmn,
                                              MessageBody{accept}, ctx_it->second));
        apply_session_up_policy(delivery.from, out);
        break;
      }
      case MessageKind::AuthResponse: {
        // Response to a protected (rederive) challenge.
        const auto& body = std::get<AuthResponseBody>(*decoded);
        if (!session.vector || body.failure != AuthFailureKind::None ||
            body.res != session.vector->xres) {
          out.note("rederive-failed ue=" + delivery.from);
          return;
        }
        HomeNetworkDb* home = st.home_db_for(session.supi->plmn());
        if (!home) return;
        auto home_ep = st.core_directory.find(session.supi->plmn().render());
        if (home_ep != st.core_directory.end()) {
          AuthResultBody confirmation{session.supi->render(), st.plmn.render(),
                                      session.vector->run, true};
          out.core.emplace_back(home_ep->second,
                                make_clear(MessageKind::AuthResult, st.plmn,
                                           MessageBody{confirmation}));
        }
        DerivationContext dctx = session.hierarchy->context;
        dctx.run_counter = session.vector->run;
        RootKey k = home->subscribers.at(session.supi->render()).root_key;
        session.hierarchy = derive_hierarchy(k, dctx);
        SecurityContext nas_ctx = detail::make_context(
            ContextScope::Nas, conn, delivery.from, session.access, *session.hierarchy,
            1);
        nas_ctx.state = ContextState::Active;
        SecurityContext as_ctx = detail::make_context(
            ContextScope::As, conn + "/as", delivery.from, session.access,
            *session.hierarchy, 1);
        as_ctx.state = ContextState::Active;
        session.contexts[conn] = nas_ctx;
        session.contexts[conn + "/as"] = as_ctx;
        out.note("rederived run=" + std::to_string(session.vector->run) +
                 " ue=" + delivery.from);
        break;
      }
      default:
        out.verdict = "discarded-unexpected";
        return;
    }
  }

  Guti assign_guti(const std::string& supi_render) {
    st.registration_events++;
    auto current = st.current_gutis.find(supi_render);
    if (current == st.current_gutis.end()) {
      Guti fresh{st.plmn, st.rng.next_u32(), 0};
      st.current_gutis[supi_render] = fresh;
      st.guti_table[fresh.temp_id] = supi_render;
      return fresh;
    }
    if (st.knobs.guti_policy.should_reassign(st.registration_events)) {
      Guti next = reassign_guti(current->second, st.rng);
      st.guti_table.erase(current->second.temp_id);
      st.guti_table[next.temp_id] = supi_render;
      current->second = next;
    }
    return current->second;
  }

  void apply_session_up_policy(const std::string& ue, StepOutput& out);
};

// ---- user plane policy ----------------------------------------------------------

// DRB protection flags for one PDU session. The local SMF may override the
// confidentiality choice received from the home SMF; overrides are auditable.
struct DrbConfig {
  bool integrity_on = true;
  bool ciphering_on = true;
  std::string origin = "home-smf";

  std::string render() const {
    return "integrity=" + std::string(integrity_on ? "on" : "off") +
           " ciphering=" + std::string(ciphering_on ? "on" : "off") +
           " origin=" + origin;
  }
};

inline DrbConfig apply_up_policy(UpPolicyChoice integrity, UpPolicyChoice confidentiality,
                                 LocalSmfOverride local_override,
                                 std::vector<std::string>* audit_trail = nullptr) {
  DrbConfig cfg;
  cfg.integrity_on = integrity != UpPolicyChoice::NotNeeded;
  cfg.ciphering_on = confidentiality != UpPolicyChoice::NotNeeded;
  if (local_override == LocalSmfOverride::ConfNotNeeded) {
    cfg.ciphering_on = false;
    cfg.origin = "local-smf-override";
  } else if (local_override == LocalSmfOverride::ConfRequired) {
    cfg.ciphering_on = true;
    cfg.origin = "local-smf-override";
  }
  if (audit_trail && cfg.origin == "local-smf-override") {
    audit_trail->push_back("local-smf-override confidentiality=" +
                           std::string(cfg.ciphering_on ? "on" : "off"));
  }
  return cfg;
}

inline void NetworkActor::apply_session_up_policy(const std::string& ue,
                                                  StepOutput& out) {
  DrbConfig cfg = apply_up_policy(st.knobs.up_integrity, st.knobs.up_confidentiality,
                                  st.knobs.local_smf_override, &st.audit_trail);
  if (cfg.origin == "local-smf-override") {
    out.note("audit " + st.audit_trail.back() + " ue=" + ue);
  }
  out.note("drb ue=" + ue + " " + cfg.render());
}

// ---- driver for the focused operations -------------------------------------------

// Steps deliveries between one UE and a set of networks until the queue goes
// idle. Used by run_aka / establish_contexts / tests; the full scenario engine
// has its own loop with attacker hooks.
inline void drive_until_idle(UeActor& ue, std::vector<NetworkActor*> networks,
                             Channel& ch, Tick& now, Tick tick_budget = 400) {
  Tick deadline = now + tick_budget;
  auto emit = [&](const std::string& from, StepOutput&& out) {
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
  };
  while (now <= deadline) {
    auto ev = ch.pop_next();
    if (!ev) break;
    now = std::max(now, ev->tick);
    if (ev->delivery) {
      Delivery& d = *ev->delivery;
      if (d.to == ue.st.endpoint) {
        StepOutput out = ue.on_message(d, now);
        ch.transcript().log(now, Transcript::EventKind::Deliver, d.link, d.from, d.to,
                            observable_view(d.msg) + " verdict=" + out.verdict);
        emit(ue.st.endpoint, std::move(out));
        continue;
      }
      for (NetworkActor* net : networks) {
        if (d.to == net->st.endpoint) {
          StepOutput out = net->on_message(d, now);
          ch.transcript().log(now, Transcript::EventKind::Deliver, d.link, d.from, d.to,
                              observable_view(d.msg) + " verdict=" + out.verdict);
          emit(net->st.endpoint, std::move(out));
          break;
        }
      }
    } else if (ev->trigger) {
      Trigger& t = *ev->trigger;
      if (t.actor == ue.st.endpoint) {
        emit(ue.st.endpoint, ue.on_trigger(t, now));
      } else {
        for (NetworkActor* net : networks) {
          if (t.actor == net->st.endpoint) {
            emit(net->st.endpoint, net->on_trigger(t, now));
            break;
          }
        }
      }
    }
  }
}

struct AkaResult {
  bool success = false;
  bool resynced = false;
  std::string failure;  // "auth-failure ..." when the run did not complete
};

// Drives a full registration (request, challenge/response, security mode,
// accept) between one UE and one serving network and reports how
// authentication ended. `other_networks` keeps additional operators (e.g. the
// home network of a roaming subscriber) reachable for core-link signaling.
// Success leaves mirrored hierarchies and active contexts on both sides.
inline AkaResult run_aka(UeActor& ue, NetworkActor& net, Channel& ch, Tick& now,
                         std::vector<NetworkActor*> other_networks = {}) {
  size_t first_event = ch.transcript().size();
  StepOutput out;
  ue.start_registration(CandidateNetwork{net.st.endpoint, net.st.plmn,
                                         net.st.broadcast_priority},
                        "3gpp", now, out);
  for (auto& [to, msg] : out.radio) ch.send(now, ue.st.endpoint, to, std::move(msg));
  for (auto& t : out.triggers)
    ch.schedule_trigger(now + t.delay, ue.st.endpoint, t.kind, t.arg);
  std::vector<NetworkActor*> routes{&net};
  routes.insert(routes.end(), other_networks.begin(), other_networks.end());
  drive_until_idle(ue, routes, ch, now);

  AkaResult result;
  auto session = net.st.sessions.find(ue.st.endpoint);
  result.success = ue.st.phase == UePhase::Registered &&
                   session != net.st.sessions.end() &&
                   session->second.phase == SessionPhase::Registered;
  for (size_t i = first_event; i < ch.transcript().size(); ++i) {
    const auto& e = ch.transcript().events()[i];
    if (e.kind != Transcript::EventKind::Note) continue;
    if (e.text.starts_with("resync")) result.resynced = true;
    if (e.text.starts_with("auth-failure") || e.text.starts_with("network-auth-failed"))
      result.failure = e.text;
  }
  return result;
}

enum class ContextLayoutMode : uint8_t { DistinctSn, SamePlmnDual };

struct ContextLayout {
  // Connection ids established on the UE side, in establishment order.
  std::vector<std::string> connections;
  bool ok = false;
};

// Registers the UE once per serving network (distinct-sn) or twice over the
// same network on different access types (same-plmn-dual) and reports the
// resulting context layout.
inline ContextLayout establish_contexts(UeActor& ue, std::vector<NetworkActor*> networks,
                                        ContextLayoutMode mode, Channel& ch, Tick& now) {
  ContextLayout layout;
  auto kick = [&](NetworkActor& net, const std::string& access) {
    StepOutput out;
    ue.start_registration(CandidateNetwork{net.st.endpoint, net.st.plmn,
                                           net.st.broadcast_priority},
                          access, now, out);
    for (auto& note : out.notes) ch.transcript().note(now, ue.st.endpoint, note);
    for (auto& [to, msg] : out.radio) ch.send(now, ue.st.endpoint, to, std::move(msg));
    for (auto& t : out.triggers)
      ch.schedule_trigger(now + t.delay, ue.st.endpoint, t.kind, t.arg);
    drive_until_idle(ue, networks, ch, now);
    layout.connections.push_back(ue.st.nas_conn(net.st.endpoint, access));
  };

  if (mode == ContextLayoutMode::DistinctSn) {
    if (networks.size() < 2) return layout;
    kick(*networks[0], "3gpp");
    kick(*networks[1], "3gpp");
  } else {
    if (networks.empty()) return layout;
    kick(*networks[0], "3gpp");
    kick(*networks[0], "non3gpp");
  }
  layout.ok = true;
  for (const auto& conn : layout.connections) {
    auto it = ue.st.contexts.find(conn);
    if (it == ue.st.contexts.end() || it->second.state != ContextState::Active)
      layout.ok = false;
  }
  return layout;
}

struct HandoverOutcome {
  bool ok = false;
  std::string error;
  bool fresh_keys = false;
};

// AS-level handover. Secure policy derives fresh gNB-level keys at the
// target; the insecure variant forwards the source context verbatim and the
// transfer is exposed on the radio link where a sniffer can capture it.
inline HandoverOutcome handover(UeActor& ue, NetworkActor& source, NetworkActor& target,
                                HandoverSecurity policy, Channel& ch, Tick now) {
  HandoverOutcome outcome;
  std::string src_as_conn;
  for (const auto& [conn, ctx] : ue.st.contexts) {
    if (ctx.scope == ContextScope::As && ctx.peer == source.st.endpoint &&
        ctx.state == ContextState::Active) {
      src_as_conn = conn;
      break;
    }
  }
  if (src_as_conn.empty()) {
    outcome.error = "NoActiveContext";
    return outcome;
  }
  std::string nas_conn = src_as_conn.substr(0, src_as_conn.size() - 3);  // strip "/as"
  auto hier = ue.st.hierarchies.find(nas_conn);
  if (hier == ue.st.hierarchies.end()) {
    outcome.error = "NoActiveContext";
    return outcome;
  }

  const Prf& prf = default_prf();
  Bytes new_kgnb;
  if (policy == HandoverSecurity::Secure) {
    new_kgnb = prf.derive(hier->second.k_gnb, "kdf-handover",
                          to_bytes(target.st.plmn.render()), kRootKeyLen);
    outcome.fresh_keys = true;
  } else {
    new_kgnb = hier->second.k_gnb;
  }
  Bytes rrc_enc = prf.derive(new_kgnb, "kdf-rrc-enc", {}, kLeafKeyLen);
  Bytes rrc_int = prf.derive(new_kgnb, "kdf-rrc-int", {}, kLeafKeyLen);
  if (policy == HandoverSecurity::Insecure) {
    // Verbatim context transfer over the air.
    rrc_enc = hier->second.rrc_enc;
    rrc_int = hier->second.rrc_int;
    ch.expose(now, source.st.endpoint,
              "KEYMAT handover ue=" + ue.st.endpoint + " target=" + target.st.endpoint +
                  " rrc_enc=" + hex_encode(rrc_enc) + " rrc_int=" + hex_encode(rrc_int));
  }

  std::string new_conn = ue.st.nas_conn(target.st.endpoint, "3gpp") + "/as";
  SecurityContext ue_ctx;
  ue_ctx.scope = ContextScope::As;
  ue_ctx.connection_id = new_conn;
  ue_ctx.peer = target.st.endpoint;
  ue_ctx.bearer = "3gpp";
  ue_ctx.enc_key = rrc_enc;
  ue_ctx.int_key = rrc_int;
  ue_ctx.cipher_alg = hier->second.context.cipher_alg;
  ue_ctx.integrity_alg = hier->second.context.integrity_alg;
  ue_ctx.tx_direction = 0;
  ue_ctx.state = ContextState::Active;
  ue.st.contexts.erase(src_as_conn);
  ue.st.contexts[new_conn] = ue_ctx;

  SecurityContext net_ctx = ue_ctx;
  net_ctx.connection_id = target.st.nas_conn(ue.st.endpoint, "3gpp") + "/as";
  net_ctx.tx_direction = 1;
  NetSession& session = target.st.sessions[ue.st.endpoint];
  session.ue_endpoint = ue.st.endpoint;
  session.contexts[net_ctx.connection_id] = net_ctx;

  ch.transcript().note(now, source.st.endpoint,
                       "handover ue=" + ue.st.endpoint + " target=" +
                           target.st.endpoint + " policy=" +
                           std::string(to_string(policy)) + " fresh-keys=" +
                           (outcome.fresh_keys ? "yes" : "no"));
  outcome.ok = true;
  return outcome;
}

}  // namespace fivegsim
