#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fivegsim/adversary_model.hpp"
#include "fivegsim/common.hpp"
#include "fivegsim/crypto_alg.hpp"
#include "fivegsim/identity.hpp"
#include "fivegsim/keys.hpp"
#include "fivegsim/prf.hpp"

#include "json.hpp"

namespace fivegsim {

inline constexpr std::string_view kFormatVersion = "fiveg-sim/1";

struct SubscriberConfig {
  Supi supi;
  RootKey root_key;
  std::set<Plmn> provisioned_networks;
  std::string auth_method = "5g-aka";  // "5g-aka" or "eap-aka"
};

struct NetworkConfig {
  std::string name;
  Plmn plmn;
  int32_t broadcast_priority = 0;
};

enum class HandoverSecurity : uint8_t { Secure, Insecure };
enum class UpPolicyChoice : uint8_t { Required, Preferred, NotNeeded };
enum class LocalSmfOverride : uint8_t { Off, ConfNotNeeded, ConfRequired };

inline std::string_view to_string(HandoverSecurity v) {
  return v == HandoverSecurity::Secure ? "secure" : "insecure";
}
inline std::string_view to_string(UpPolicyChoice v) {
  switch (v) {
    case UpPolicyChoice::Required: return "required";
    case UpPolicyChoice::Preferred: return "preferred";
    case UpPolicyChoice::NotNeeded: return "not-needed";
  }
  return "required";
}
inline std::string_view to_string(LocalSmfOverride v) {
  switch (v) {
    case LocalSmfOverride::Off: return "off";
    case LocalSmfOverride::ConfNotNeeded: return "conf-not-needed";
    case LocalSmfOverride::ConfRequired: return "conf-required";
  }
  return "off";
}

// Every stored scenario must spell out every knob; there are no implicit
// defaults in files. hn_forces_null_scheme is the one optional extra: the
// "null scheme although a key is provisioned" operator configuration.
struct Knobs {
  SuciScheme suci_scheme = SuciScheme::ProbabilisticPk;
  bool null_algorithms_allowed = false;
  bool unauthenticated_emergency_allowed = false;
  HandoverSecurity handover_security = HandoverSecurity::Secure;
  UpPolicyChoice up_integrity = UpPolicyChoice::Required;
  UpPolicyChoice up_confidentiality = UpPolicyChoice::Required;
  LocalSmfOverride local_smf_override = LocalSmfOverride::Off;
  bool ca_mode = false;
  GutiPolicy guti_policy;
  bool capability_echo = true;
  bool hn_forces_null_scheme = false;

  std::string render() const {
    std::string out;
    out += "suci_scheme=" + std::string(suci_scheme == SuciScheme::Null ? "null" : "pk");
    out += " null_algorithms_allowed=" + std::string(null_algorithms_allowed ? "on" : "off");
    out += " unauthenticated_emergency_allowed=" +
           std::string(unauthenticated_emergency_allowed ? "on" : "off");
    out += " handover_security=" + std::string(to_string(handover_security));
    out += " up_integrity=" + std::string(to_string(up_integrity));
    out += " up_confidentiality=" + std::string(to_string(up_confidentiality));
    out += " local_smf_override=" + std::string(to_string(local_smf_override));
    out += " ca_mode=" + std::string(ca_mode ? "on" : "off");
    out += " guti_policy=" + guti_policy.render();
    out += " capability_echo=" + std::string(capability_echo ? "on" : "off");
    out += " hn_forces_null_scheme=" + std::string(hn_forces_null_scheme ? "on" : "off");
    return out;
  }
};

struct ScenarioEvent {
  Tick at = 0;
  std::string action;  // emergency_dial | tau_move | rederive | handover
  std::string subscriber;  // rendered SUPI
  std::string target;      // network name for handover/tau_move
};

struct ScenarioConfig {
  uint64_t seed = 0;
  Tick max_ticks = 600;
  std::vector<SubscriberConfig> subscribers;
  std::vector<NetworkConfig> networks;
  Knobs knobs;
  AttackerCapabilities attacker_caps;
  std::optional<AttackKind> attack;
  std::vector<ScenarioEvent> events;

  // Stable hash of all knobs; identifies a defense configuration.
  std::string fingerprint() const { return short_hash(knobs.render()); }

  const NetworkConfig* network_named(std::string_view name) const {
    for (const auto& n : networks) {
      if (n.name == name) return &n;
    }
    return nullptr;
  }

  const NetworkConfig* network_with_plmn(const Plmn& plmn) const {
    for (const auto& n : networks) {
      if (n.plmn == plmn) return &n;
    }
    return nullptr;
  }
};

struct ScenarioParseResult {
  std::optional<ScenarioConfig> config;
  std::vector<std::string> errors;
  bool ok() const { return config.has_value() && errors.empty(); }
};

namespace scenario_detail {

using json = nlohmann::ordered_json;

inline std::optional<bool> as_bool(const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  return std::nullopt;
}

}  // namespace scenario_detail

// Parses and validates a scenario document, collecting field-level
// diagnostics instead of stopping at the first problem.
inline ScenarioParseResult parse_scenario(const nlohmann::ordered_json& doc) {
  using scenario_detail::as_bool;
  ScenarioParseResult result;
  auto& errors = result.errors;
  ScenarioConfig cfg;

  if (!doc.is_object()) {
    errors.push_back("document: expected a JSON object");
    return result;
  }
  if (!doc.contains("version") || !doc["version"].is_string() ||
      doc["version"].get<std::string>() != kFormatVersion) {
    errors.push_back("version: required and must be \"" + std::string(kFormatVersion) +
                     "\"");
  }
  if (!doc.contains("seed") || !doc["seed"].is_number_unsigned()) {
    errors.push_back("seed: required unsigned integer");
  } else {
    cfg.seed = doc["seed"].get<uint64_t>();
  }
  if (doc.contains("max_ticks")) {
    if (!doc["max_ticks"].is_number_unsigned()) {
      errors.push_back("max_ticks: expected unsigned integer");
    } else {
      cfg.max_ticks = doc["max_ticks"].get<uint64_t>();
    }
  }

  // subscribers
  if (!doc.contains("subscribers") || !doc["subscribers"].is_array() ||
      doc["subscribers"].empty()) {
    errors.push_back("subscribers: required non-empty array");
  } else {
    size_t idx = 0;
    for (const auto& s : doc["subscribers"]) {
      std::string at = "subscribers[" + std::to_string(idx++) + "]";
      SubscriberConfig sub;
      if (!s.contains("supi") || !s["supi"].is_string()) {
        errors.push_back(at + ".supi: required string");
        continue;
      }
      auto supi = Supi::parse(s["supi"].get<std::string>());
      if (!supi) {
        errors.push_back(at + ".supi: expected MCC-MNC-MSIN with 3/2-3/10 digits");
        continue;
      }
      sub.supi = *supi;
      if (!s.contains("root_key") || !s["root_key"].is_string()) {
        errors.push_back(at + ".root_key: required string");
        continue;
      }
      sub.root_key = RootKey::from_hex(s["root_key"].get<std::string>());
      if (!sub.root_key.well_formed()) {
        errors.push_back(at + ".root_key: expected 64 hex characters");
        continue;
      }
      if (!s.contains("provisioned_networks") || !s["provisioned_networks"].is_array()) {
        errors.push_back(at + ".provisioned_networks: required array");
        continue;
      }
      if (s.contains("auth_method")) {
        std::string m = s["auth_method"].is_string() ? s["auth_method"] : "";
        if (m != "5g-aka" && m != "eap-aka") {
          errors.push_back(at + ".auth_method: expected \"5g-aka\" or \"eap-aka\"");
          continue;
        }
        sub.auth_method = m;
      }
      bool bad = false;
      for (const auto& p : s["provisioned_networks"]) {
        Plmn plmn = p.is_string() ? Plmn::parse(p.get<std::string>()) : Plmn{};
        if (!plmn.well_formed()) {
          errors.push_back(at + ".provisioned_networks: expected \"MCC-MNC\" strings");
          bad = true;
          break;
        }
        sub.provisioned_networks.insert(plmn);
      }
      if (!bad) cfg.subscribers.push_back(std::move(sub));
    }
  }

  // networks
  if (!doc.contains("networks") || !doc["networks"].is_array() ||
      doc["networks"].empty()) {
    errors.push_back("networks: required non-empty array");
  } else {
    size_t idx = 0;
    std::set<std::string> names;
    for (const auto& n : doc["networks"]) {
      std::string at = "networks[" + std::to_string(idx++) + "]";
      NetworkConfig net;
      if (!n.contains("name") || !n["name"].is_string() ||
          n["name"].get<std::string>().empty()) {
        errors.push_back(at + ".name: required non-empty string");
        continue;
      }
      net.name = n["name"].get<std::string>();
      if (!names.insert(net.name).second) {
        errors.push_back(at + ".name: duplicate network name \"" + net.name + "\"");
        continue;
      }
      if (!n.contains("plmn") || !n["plmn"].is_string()) {
        errors.push_back(at + ".plmn: required string");
        continue;
      }
      net.plmn = Plmn::parse(n["plmn"].get<std::string>());
      if (!net.plmn.well_formed()) {
        errors.push_back(at + ".plmn: expected \"MCC-MNC\"");
        continue;
      }
      if (!n.contains("broadcast_priority") || !n["broadcast_priority"].is_number_integer()) {
        errors.push_back(at + ".broadcast_priority: required integer");
        continue;
      }
      net.broadcast_priority = n["broadcast_priority"].get<int32_t>();
      cfg.networks.push_back(std::move(net));
    }
  }

  // every subscriber's home PLMN must be hosted by some network (it holds the
  // ARPF record and the home-control ledger)
  for (const auto& sub : cfg.subscribers) {
    if (!cfg.network_with_plmn(sub.supi.plmn())) {
      errors.push_back("subscribers: no network hosts home PLMN " +
                       sub.supi.plmn().render() + " of " + sub.supi.render());
    }
  }

  // knobs
  if (!doc.contains("knobs") || !doc["knobs"].is_object()) {
    errors.push_back("knobs: required object");
  } else {
    const auto& k = doc["knobs"];
    auto need = [&](std::string_view name) -> const nlohmann::ordered_json* {
      if (!k.contains(name)) {
        errors.push_back("knobs." + std::string(name) + ": missing (all knobs are explicit)");
        return nullptr;
      }
      return &k[name];
    };
    if (auto* v = need("suci_scheme")) {
      std::string s = v->is_string() ? v->get<std::string>() : "";
      if (s == "null") cfg.knobs.suci_scheme = SuciScheme::Null;
      else if (s == "pk") cfg.knobs.suci_scheme = SuciScheme::ProbabilisticPk;
      else errors.push_back("knobs.suci_scheme: expected \"null\" or \"pk\"");
    }
    auto need_bool = [&](std::string_view name, bool& out) {
      if (auto* v = need(name)) {
        if (auto b = as_bool(*v)) out = *b;
        else errors.push_back("knobs." + std::string(name) + ": expected boolean");
      }
    };
    need_bool("null_algorithms_allowed", cfg.knobs.null_algorithms_allowed);
    need_bool("unauthenticated_emergency_allowed",
              cfg.knobs.unauthenticated_emergency_allowed);
    if (auto* v = need("handover_security")) {
      std::string s = v->is_string() ? v->get<std::string>() : "";
      if (s == "secure") cfg.knobs.handover_security = HandoverSecurity::Secure;
      else if (s == "insecure") cfg.knobs.handover_security = HandoverSecurity::Insecure;
      else errors.push_back("knobs.handover_security: expected \"secure\" or \"insecure\"");
    }
    auto parse_up = [&](std::string_view name, UpPolicyChoice& out) {
      if (auto* v = need(name)) {
        std::string s = v->is_string() ? v->get<std::string>() : "";
        if (s == "required") out = UpPolicyChoice::Required;
        else if (s == "preferred") out = UpPolicyChoice::Preferred;
        else if (s == "not-needed") out = UpPolicyChoice::NotNeeded;
        else
          errors.push_back("knobs." + std::string(name) +
                           ": expected \"required\", \"preferred\" or \"not-needed\"");
      }
    };
    parse_up("up_integrity", cfg.knobs.up_integrity);
    parse_up("up_confidentiality", cfg.knobs.up_confidentiality);
    if (auto* v = need("local_smf_override")) {
      std::string s = v->is_string() ? v->get<std::string>() : "";
      if (s == "off") cfg.knobs.local_smf_override = LocalSmfOverride::Off;
      else if (s == "conf-not-needed")
        cfg.knobs.local_smf_override = LocalSmfOverride::ConfNotNeeded;
      else if (s == "conf-required")
        cfg.knobs.local_smf_override = LocalSmfOverride::ConfRequired;
      else
        errors.push_back(
            "knobs.local_smf_override: expected \"off\", \"conf-not-needed\" or "
            "\"conf-required\"");
    }
    need_bool("ca_mode", cfg.knobs.ca_mode);
    if (auto* v = need("guti_policy")) {
      std::string s = v->is_string() ? v->get<std::string>() : "";
      auto policy = GutiPolicy::parse(s);
      if (policy) cfg.knobs.guti_policy = *policy;
      else
        errors.push_back(
            "knobs.guti_policy: expected \"never\", \"every-registration\" or "
            "\"every-N\"");
    }
    need_bool("capability_echo", cfg.knobs.capability_echo);
    if (k.contains("hn_forces_null_scheme")) {
      if (auto b = as_bool(k["hn_forces_null_scheme"]))
        cfg.knobs.hn_forces_null_scheme = *b;
      else
        errors.push_back("knobs.hn_forces_null_scheme: expected boolean");
    }
  }

  // attacker
  if (doc.contains("attacker")) {
    const auto& a = doc["attacker"];
    if (!a.is_object()) {
      errors.push_back("attacker: expected object");
    } else {
      if (a.contains("capabilities")) {
        if (!a["capabilities"].is_array()) {
          errors.push_back("attacker.capabilities: expected array of strings");
        } else {
          for (const auto& c : a["capabilities"]) {
            std::string s = c.is_string() ? c.get<std::string>() : "";
            if (s == "sniff") cfg.attacker_caps.can_sniff = true;
            else if (s == "inject_preauth") cfg.attacker_caps.can_inject_preauth = true;
            else if (s == "broadcast") cfg.attacker_caps.can_broadcast = true;
            else if (s == "mutate_in_transit") cfg.attacker_caps.can_mutate_in_transit = true;
            else errors.push_back("attacker.capabilities: unknown capability \"" + s + "\"");
          }
        }
      }
      if (a.contains("attacks")) {
        if (!a["attacks"].is_array() || a["attacks"].size() > 1) {
          errors.push_back("attacker.attacks: expected array with at most one attack id");
        } else if (a["attacks"].size() == 1) {
          std::string s =
              a["attacks"][0].is_string() ? a["attacks"][0].get<std::string>() : "";
          auto kind = attack_from_string(s);
          if (kind) cfg.attack = kind;
          else errors.push_back("attacker.attacks: unknown attack id \"" + s + "\"");
        }
      }
    }
  }

  // events
  if (doc.contains("events")) {
    if (!doc["events"].is_array()) {
      errors.push_back("events: expected array");
    } else {
      size_t idx = 0;
      for (const auto& e : doc["events"]) {
        std::string at = "events[" + std::to_string(idx++) + "]";
        ScenarioEvent ev;
        if (!e.contains("at") || !e["at"].is_number_unsigned()) {
          errors.push_back(at + ".at: required unsigned tick");
          continue;
        }
        ev.at = e["at"].get<uint64_t>();
        std::string action =
            e.contains("action") && e["action"].is_string() ? e["action"] : "";
        if (action != "emergency_dial" && action != "tau_move" && action != "rederive" &&
            action != "handover") {
          errors.push_back(at + ".action: expected emergency_dial, tau_move, rederive or handover");
          continue;
        }
        ev.action = action;
        if (!e.contains("subscriber") || !e["subscriber"].is_string()) {
          errors.push_back(at + ".subscriber: required SUPI string");
          continue;
        }
        ev.subscriber = e["subscriber"].get<std::string>();
        if (e.contains("target")) {
          if (!e["target"].is_string()) {
            errors.push_back(at + ".target: expected network name string");
            continue;
          }
          ev.target = e["target"].get<std::string>();
        }
        cfg.events.push_back(std::move(ev));
      }
    }
  }

  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

inline ScenarioParseResult parse_scenario_text(std::string_view text) {
  ScenarioParseResult result;
  auto doc = nlohmann::ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    result.errors.push_back("document: not valid JSON");
    return result;
  }
  return parse_scenario(doc);
}

}  // namespace fivegsim
