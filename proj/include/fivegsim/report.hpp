#pragma once

#include <string>

#include "fivegsim/simcore.hpp"

namespace fivegsim {

// Human-readable run report. Every verdict line names the transcript line its
// evidence sits on; timestamps are logical ticks so identical runs render
// identical reports.
inline std::string render_report(const ScenarioConfig& config, const RunResult& run) {
  std::string out;
  out += std::string(kFormatVersion) + " run report\n";
  out += "fingerprint: " + config.fingerprint() + "\n";
  out += "effective_seed: " + std::to_string(config.seed) + "\n";
  out += "knobs: " + config.knobs.render() + "\n";
  out += "attacker_capabilities: " + config.attacker_caps.render() + "\n";
  if (run.outcomes.empty()) {
    out += "attacks: none\n";
  }
  for (const auto& outcome : run.outcomes) {
    out += "attack: " + std::string(to_string(outcome.attack)) +
           " ref=" + std::string(catalog_ref(outcome.attack)) +
           " verdict=" + std::string(to_string(outcome.verdict)) + "\n";
    if (outcome.evidence.empty()) {
      out += "  evidence: none\n";
    }
    for (const auto& ev : outcome.evidence) {
      out += "  evidence@" + std::to_string(ev.transcript_line) + ": " +
             ev.description + "\n";
      if (run.sim) {
        out += "    " + run.sim->transcript().line(ev.transcript_line) + "\n";
      }
    }
  }
  if (run.sim) {
    for (const auto& ue : run.sim->ues()) {
      out += "final " + ue->st.endpoint + ": phase=" +
             std::string(to_string(ue->st.phase));
      if (ue->st.guti) out += " guti={" + ue->st.guti->render() + "}";
      out += "\n";
    }
    for (const auto& [plmn, db] : run.sim->interconnect()) {
      out += "home-control " + plmn + ": confirmations=" +
             std::to_string(db.ledger.size()) + "\n";
    }
  }
  return out;
}

inline nlohmann::ordered_json report_json(const ScenarioConfig& config,
                                          const RunResult& run) {
  nlohmann::ordered_json doc;
  doc["version"] = std::string(kFormatVersion);
  doc["fingerprint"] = config.fingerprint();
  doc["effective_seed"] = config.seed;
  doc["knobs"] = config.knobs.render();
  doc["attacks"] = nlohmann::ordered_json::array();
  for (const auto& outcome : run.outcomes) {
    nlohmann::ordered_json a;
    a["id"] = std::string(to_string(outcome.attack));
    a["ref"] = std::string(catalog_ref(outcome.attack));
    a["verdict"] = std::string(to_string(outcome.verdict));
    a["evidence"] = nlohmann::ordered_json::array();
    for (const auto& ev : outcome.evidence) {
      nlohmann::ordered_json e;
      e["transcript_line"] = ev.transcript_line;
      e["claim"] = ev.claim;
      e["description"] = ev.description;
      a["evidence"].push_back(std::move(e));
    }
    doc["attacks"].push_back(std::move(a));
  }
  return doc;
}

}  // namespace fivegsim
