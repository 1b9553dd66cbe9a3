#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "fivegsim/attacks.hpp"
#include "fivegsim/scenario.hpp"
#include "fivegsim/sim_engine.hpp"

namespace fivegsim {

struct RunResult {
  std::string error;  // empty on success ("unsupported-attack-for-config", ...)
  std::unique_ptr<Simulation> sim;
  std::vector<AttackOutcome> outcomes;
  std::string transcript_text;
  bool ok() const { return error.empty(); }
};

// One deterministic run of a validated scenario. The scenario's own attack
// (if any) runs inside the simulation; its outcome is extracted from the raw
// transcript afterwards and re-validated against it.
inline RunResult run_scenario(const ScenarioConfig& config) {
  RunResult result;
  std::unique_ptr<CatalogAttackScript> script;
  if (config.attack) {
    if (!config.attacker_caps.covers(required_capabilities(*config.attack))) {
      result.error = "unsupported-attack-for-config: " +
                     std::string(to_string(*config.attack)) + " requires {" +
                     required_capabilities(*config.attack).render() +
                     "}, scenario grants {" + config.attacker_caps.render() + "}";
      return result;
    }
    script = std::make_unique<CatalogAttackScript>(*config.attack, config.attacker_caps);
  }
  result.sim = std::make_unique<Simulation>(config);
  if (script) result.sim->set_attack_script(script.get());
  result.sim->run();
  result.transcript_text = result.sim->transcript().render();
  if (config.attack) {
    AttackOutcome outcome =
        extract_outcome(*config.attack, config, result.sim->transcript());
    if (!validate_evidence(outcome, result.sim->transcript())) {
      result.error = "evidence-validation-failed";
    }
    result.outcomes.push_back(std::move(outcome));
  }
  return result;
}

// Runs one attack against one configuration; the scenario's own attack field
// is overridden and the needed capabilities are checked against the grant.
inline RunResult execute_attack(AttackKind kind, ScenarioConfig config) {
  config.attack = kind;
  return run_scenario(config);
}

// ---- configuration grids -----------------------------------------------------------

struct GridAxis {
  std::string knob;
  std::vector<std::string> values;  // rendered values, e.g. "null", "on", "off"
};

struct GridSpec {
  ScenarioConfig base;
  std::vector<GridAxis> axes;
  std::vector<AttackKind> attacks;
};

struct GridParseResult {
  std::optional<GridSpec> grid;
  std::vector<std::string> errors;
  bool ok() const { return grid.has_value() && errors.empty(); }
};

namespace grid_detail {

inline bool apply_knob(Knobs& knobs, const std::string& name, const std::string& value) {
  auto on_off = [&](bool& out) {
    if (value == "on") { out = true; return true; }
    if (value == "off") { out = false; return true; }
    return false;
  };
  if (name == "suci_scheme") {
    if (value == "null") { knobs.suci_scheme = SuciScheme::Null; return true; }
    if (value == "pk") { knobs.suci_scheme = SuciScheme::ProbabilisticPk; return true; }
    return false;
  }
  if (name == "null_algorithms_allowed") return on_off(knobs.null_algorithms_allowed);
  if (name == "unauthenticated_emergency_allowed")
    return on_off(knobs.unauthenticated_emergency_allowed);
  if (name == "ca_mode") return on_off(knobs.ca_mode);
  if (name == "capability_echo") return on_off(knobs.capability_echo);
  if (name == "hn_forces_null_scheme") return on_off(knobs.hn_forces_null_scheme);
  if (name == "handover_security") {
    if (value == "secure") { knobs.handover_security = HandoverSecurity::Secure; return true; }
    if (value == "insecure") { knobs.handover_security = HandoverSecurity::Insecure; return true; }
    return false;
  }
  if (name == "guti_policy") {
    auto p = GutiPolicy::parse(value);
    if (!p) return false;
    knobs.guti_policy = *p;
    return true;
  }
  auto up_choice = [&](UpPolicyChoice& out) {
    if (value == "required") { out = UpPolicyChoice::Required; return true; }
    if (value == "preferred") { out = UpPolicyChoice::Preferred; return true; }
    if (value == "not-needed") { out = UpPolicyChoice::NotNeeded; return true; }
    return false;
  };
  if (name == "up_integrity") return up_choice(knobs.up_integrity);
  if (name == "up_confidentiality") return up_choice(knobs.up_confidentiality);
  if (name == "local_smf_override") {
    if (value == "off") { knobs.local_smf_override = LocalSmfOverride::Off; return true; }
    if (value == "conf-not-needed") { knobs.local_smf_override = LocalSmfOverride::ConfNotNeeded; return true; }
    if (value == "conf-required") { knobs.local_smf_override = LocalSmfOverride::ConfRequired; return true; }
    return false;
  }
  return false;
}

}  // namespace grid_detail

// Grid documents: { version, base: <scenario>, axes: {knob: [values...]},
// attacks: [ids...] }. Axis order in the file fixes row order in the matrix.
inline GridParseResult parse_grid(const nlohmann::ordered_json& doc) {
  GridParseResult result;
  auto& errors = result.errors;
  if (!doc.is_object()) {
    errors.push_back("document: expected a JSON object");
    return result;
  }
  if (!doc.contains("version") || doc["version"] != std::string(kFormatVersion)) {
    errors.push_back("version: required and must be \"" + std::string(kFormatVersion) +
                     "\"");
  }
  GridSpec grid;
  if (!doc.contains("base")) {
    errors.push_back("base: required scenario object");
  } else {
    ScenarioParseResult base = parse_scenario(doc["base"]);
    for (auto& e : base.errors) errors.push_back("base." + e);
    if (base.ok()) grid.base = std::move(*base.config);
  }
  if (!doc.contains("axes") || !doc["axes"].is_object() || doc["axes"].empty()) {
    errors.push_back("axes: required non-empty object of knob -> value list");
  } else {
    for (auto it = doc["axes"].begin(); it != doc["axes"].end(); ++it) {
      GridAxis axis;
      axis.knob = it.key();
      if (!it.value().is_array() || it.value().empty()) {
        errors.push_back("axes." + axis.knob + ": expected non-empty array");
        continue;
      }
      for (const auto& v : it.value()) {
        std::string rendered;
        if (v.is_string()) rendered = v.get<std::string>();
        else if (v.is_boolean()) rendered = v.get<bool>() ? "on" : "off";
        else {
          errors.push_back("axes." + axis.knob + ": values must be strings or booleans");
          continue;
        }
        Knobs probe = grid.base.knobs;
        if (!grid_detail::apply_knob(probe, axis.knob, rendered)) {
          errors.push_back("axes." + axis.knob + ": invalid value \"" + rendered + "\"");
          continue;
        }
        axis.values.push_back(rendered);
      }
      grid.axes.push_back(std::move(axis));
    }
  }
  if (!doc.contains("attacks") || !doc["attacks"].is_array()) {
    errors.push_back("attacks: required array of attack ids (may be empty)");
  } else {
    for (const auto& a : doc["attacks"]) {
      std::string s = a.is_string() ? a.get<std::string>() : "";
      auto kind = attack_from_string(s);
      if (!kind) {
        errors.push_back("attacks: unknown attack id \"" + s + "\"");
        continue;
      }
      grid.attacks.push_back(*kind);
    }
  }
  if (errors.empty()) result.grid = std::move(grid);
  return result;
}

inline GridParseResult parse_grid_text(std::string_view text) {
  GridParseResult result;
  auto doc = nlohmann::ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    result.errors.push_back("document: not valid JSON");
    return result;
  }
  return parse_grid(doc);
}

// ---- outcome matrix ------------------------------------------------------------------

struct OutcomeMatrix {
  std::vector<std::string> axis_names;
  std::vector<std::string> attack_names;

  struct Row {
    std::vector<std::string> axis_values;
    std::string fingerprint;
    std::vector<std::string> verdicts;  // aligned with attack_names
  };
  std::vector<Row> rows;

  std::string render_tsv() const {
    std::string out;
    for (size_t i = 0; i < axis_names.size(); ++i) {
      if (i) out += "\t";
      out += axis_names[i];
    }
    for (const auto& a : attack_names) out += "\t" + a;
    out += "\n";
    for (const auto& row : rows) {
      for (size_t i = 0; i < row.axis_values.size(); ++i) {
        if (i) out += "\t";
        out += row.axis_values[i];
      }
      for (const auto& v : row.verdicts) out += "\t" + v;
      out += "\n";
    }
    return out;
  }

  nlohmann::ordered_json render_json() const {
    nlohmann::ordered_json doc;
    doc["version"] = std::string(kFormatVersion);
    doc["axes"] = axis_names;
    doc["attacks"] = attack_names;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
      nlohmann::ordered_json r;
      nlohmann::ordered_json config;
      for (size_t i = 0; i < axis_names.size(); ++i) {
        config[axis_names[i]] = row.axis_values[i];
      }
      r["config"] = config;
      r["fingerprint"] = row.fingerprint;
      nlohmann::ordered_json verdicts;
      for (size_t i = 0; i < attack_names.size(); ++i) {
        verdicts[attack_names[i]] = row.verdicts[i];
      }
      r["verdicts"] = verdicts;
      doc["rows"].push_back(std::move(r));
    }
    return doc;
  }
};

// Expands the grid (odometer order, last axis fastest) and runs every
// (configuration, attack) cell. Runs share nothing; `workers` > 1 fans them
// out across threads with results assembled in deterministic order.
inline OutcomeMatrix enumerate_outcomes(const GridSpec& grid, unsigned workers = 1) {
  OutcomeMatrix matrix;
  for (const auto& axis : grid.axes) matrix.axis_names.push_back(axis.knob);
  for (AttackKind k : grid.attacks)
    matrix.attack_names.push_back(std::string(to_string(k)));

  size_t combos = 1;
  for (const auto& axis : grid.axes) combos *= axis.values.size();

  std::vector<ScenarioConfig> configs;
  configs.reserve(combos);
  matrix.rows.resize(combos);
  for (size_t c = 0; c < combos; ++c) {
    ScenarioConfig cfg = grid.base;
    OutcomeMatrix::Row& row = matrix.rows[c];
    size_t rem = c;
    size_t div = combos;
    for (const auto& axis : grid.axes) {
      div /= axis.values.size();
      const std::string& value = axis.values[(rem / div) % axis.values.size()];
      grid_detail::apply_knob(cfg.knobs, axis.knob, value);
      row.axis_values.push_back(value);
    }
    row.fingerprint = cfg.fingerprint();
    row.verdicts.assign(grid.attacks.size(), "");
    configs.push_back(std::move(cfg));
  }

  size_t total = combos * grid.attacks.size();
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= total) break;
      size_t c = i / grid.attacks.size();
      size_t a = i % grid.attacks.size();
      RunResult r = execute_attack(grid.attacks[a], configs[c]);
      std::string verdict = "ERROR";
      if (r.ok() && !r.outcomes.empty())
        verdict = std::string(to_string(r.outcomes[0].verdict));
      matrix.rows[c].verdicts[a] = verdict;
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return matrix;
}

// Cell-by-cell comparison against an expectations table with the same shape.
struct MatrixDiff {
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

inline MatrixDiff diff_matrix(const OutcomeMatrix& matrix,
                              std::string_view expectations_tsv) {
  MatrixDiff diff;
  std::vector<std::vector<std::string>> table;
  for (const auto& line : codec::split(expectations_tsv, '\n')) {
    if (line.empty() || line.starts_with("#")) continue;
    table.push_back(codec::split(line, '\t'));
  }
  if (table.empty()) {
    diff.mismatches.push_back("expectations: empty table");
    return diff;
  }
  std::vector<std::string> expected_header = matrix.axis_names;
  for (const auto& a : matrix.attack_names) expected_header.push_back(a);
  if (table[0] != expected_header) {
    diff.mismatches.push_back("expectations: header mismatch");
    return diff;
  }
  if (table.size() - 1 != matrix.rows.size()) {
    diff.mismatches.push_back(
        "expectations: row count " + std::to_string(table.size() - 1) + " != " +
        std::to_string(matrix.rows.size()));
    return diff;
  }
  size_t n_axes = matrix.axis_names.size();
  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    const auto& expected = table[r + 1];
    const auto& row = matrix.rows[r];
    if (expected.size() != n_axes + matrix.attack_names.size()) {
      diff.mismatches.push_back("row " + std::to_string(r + 1) + ": wrong column count");
      continue;
    }
    std::string config_label;
    for (size_t i = 0; i < n_axes; ++i) {
      if (i) config_label += " ";
      config_label += matrix.axis_names[i] + "=" + row.axis_values[i];
      if (expected[i] != row.axis_values[i]) {
        diff.mismatches.push_back("row " + std::to_string(r + 1) +
                                  ": config column mismatch (" + expected[i] +
                                  " != " + row.axis_values[i] + ")");
      }
    }
    for (size_t a = 0; a < matrix.attack_names.size(); ++a) {
      const std::string& want = expected[n_axes + a];
      const std::string& got = row.verdicts[a];
      if (want != got) {
        diff.mismatches.push_back(config_label + ": " + matrix.attack_names[a] +
                                  " expected=" + want + " actual=" + got);
      }
    }
  }
  return diff;
}

// Deterministic re-execution check: a persisted transcript is faithful iff an
// identical run reproduces it byte for byte.
inline bool verify_transcript(const ScenarioConfig& config,
                              std::string_view transcript_text) {
  RunResult r = run_scenario(config);
  return r.ok() && r.transcript_text == transcript_text;
}

}  // namespace fivegsim
