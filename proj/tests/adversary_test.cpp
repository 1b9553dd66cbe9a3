#include "fivegsim/attacks.hpp"

#include <gtest/gtest.h>

#include "fivegsim/simcore.hpp"
#include "test_support.hpp"

namespace fivegsim {
namespace {

using test::base_config;

AttackOutcome must_run(AttackKind kind, const ScenarioConfig& cfg) {
  RunResult r = execute_attack(kind, cfg);
  EXPECT_TRUE(r.ok()) << r.error;
  EXPECT_EQ(r.outcomes.size(), 1u);
  return r.outcomes.empty() ? AttackOutcome{} : r.outcomes[0];
}

TEST(AttackCatalog, StableIdStrings) {
  EXPECT_EQ(to_string(AttackKind::SupiCatchPassive), "supi_catch_passive");
  EXPECT_EQ(to_string(AttackKind::SupiCatchActive), "supi_catch_active");
  EXPECT_EQ(to_string(AttackKind::PreauthDosReject), "preauth_dos_reject");
  EXPECT_EQ(to_string(AttackKind::SilentDowngrade), "silent_downgrade");
  EXPECT_EQ(to_string(AttackKind::BiddingDown), "bidding_down");
  EXPECT_EQ(to_string(AttackKind::EmergencySupiCatch), "emergency_supi_catch");
  for (AttackKind k : kAllAttacks) {
    EXPECT_EQ(attack_from_string(to_string(k)), k);
  }
  EXPECT_FALSE(attack_from_string("no_such_attack").has_value());
}

TEST(AttackCatalog, CatalogRefs) {
  EXPECT_EQ(catalog_ref(AttackKind::SupiCatchPassive), "T3R1");
  EXPECT_EQ(catalog_ref(AttackKind::PreauthDosReject), "T3R2");
  EXPECT_EQ(catalog_ref(AttackKind::SilentDowngrade), "T3R3");
  EXPECT_EQ(catalog_ref(AttackKind::BiddingDown), "T1-bidding");
}

TEST(ExecuteAttack, UnsupportedForConfigWithoutCapabilities) {
  ScenarioConfig cfg = base_config();
  cfg.attacker_caps = {};  // no capabilities granted
  RunResult r = execute_attack(AttackKind::SupiCatchPassive, cfg);
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.error.find("unsupported-attack-for-config"), std::string::npos);
  EXPECT_NE(r.error.find("supi_catch_passive"), std::string::npos);
}

TEST(ExecuteAttack, SupiCatchPassiveSucceedsOnlyUnderNullScheme) {
  ScenarioConfig null_cfg = base_config();
  null_cfg.knobs.suci_scheme = SuciScheme::Null;
  AttackOutcome hit = must_run(AttackKind::SupiCatchPassive, null_cfg);
  EXPECT_EQ(hit.verdict, Verdict::Success);
  ASSERT_FALSE(hit.evidence.empty());
  EXPECT_EQ(hit.evidence[0].claim, null_cfg.subscribers[0].supi.msin);

  AttackOutcome miss = must_run(AttackKind::SupiCatchPassive, base_config());
  EXPECT_EQ(miss.verdict, Verdict::Fail);
  EXPECT_TRUE(miss.evidence.empty());
}

TEST(ExecuteAttack, HnForcedNullSchemeExposesSupiDespiteProvisionedKey) {
  ScenarioConfig cfg = base_config();
  cfg.knobs.hn_forces_null_scheme = true;  // key provisioned but unused
  AttackOutcome outcome = must_run(AttackKind::SupiCatchPassive, cfg);
  EXPECT_EQ(outcome.verdict, Verdict::Success);
}

TEST(ExecuteAttack, PreauthDosRejectBaselineVsCaMode) {
  ScenarioConfig cfg = base_config();
  RunResult baseline = execute_attack(AttackKind::PreauthDosReject, cfg);
  ASSERT_TRUE(baseline.ok());
  EXPECT_EQ(baseline.outcomes[0].verdict, Verdict::Success);
  EXPECT_EQ(baseline.sim->ues()[0]->st.phase, UePhase::Denied);

  cfg.knobs.ca_mode = true;
  RunResult defended = execute_attack(AttackKind::PreauthDosReject, cfg);
  ASSERT_TRUE(defended.ok());
  EXPECT_EQ(defended.outcomes[0].verdict, Verdict::Fail);
  // The signature gate drops the rogue traffic and the UE registers normally.
  EXPECT_EQ(defended.sim->ues()[0]->st.phase, UePhase::Registered);
}

TEST(ExecuteAttack, SilentDowngradeNeedsUnprovisionedPlmnAndNoCa) {
  ScenarioConfig cfg = base_config();
  RunResult hit = execute_attack(AttackKind::SilentDowngrade, cfg);
  ASSERT_TRUE(hit.ok());
  EXPECT_EQ(hit.outcomes[0].verdict, Verdict::Success);
  EXPECT_EQ(hit.sim->ues()[0]->st.phase, UePhase::AttachedLegacy);

  cfg.knobs.ca_mode = true;
  RunResult miss = execute_attack(AttackKind::SilentDowngrade, cfg);
  ASSERT_TRUE(miss.ok());
  EXPECT_EQ(miss.outcomes[0].verdict, Verdict::Fail);
  EXPECT_EQ(miss.sim->ues()[0]->st.phase, UePhase::Registered);
}

TEST(ExecuteAttack, BiddingDownGatedByCapabilityEcho) {
  ScenarioConfig cfg = base_config();
  cfg.knobs.null_algorithms_allowed = true;
  cfg.knobs.capability_echo = false;
  RunResult hit = execute_attack(AttackKind::BiddingDown, cfg);
  ASSERT_TRUE(hit.ok());
  EXPECT_EQ(hit.outcomes[0].verdict, Verdict::Success);
  // The UE ends registered, silently on null algorithms.
  const UeActor& ue = *hit.sim->ues()[0];
  EXPECT_EQ(ue.st.phase, UePhase::Registered);
  bool null_ctx = false;
  for (const auto& [conn, ctx] : ue.st.contexts) {
    if (ctx.state == ContextState::Active && ctx.cipher_alg == CipherAlg::NEA0 &&
        ctx.integrity_alg == IntegrityAlg::NIA0)
      null_ctx = true;
  }
  EXPECT_TRUE(null_ctx);

  cfg.knobs.capability_echo = true;
  RunResult miss = execute_attack(AttackKind::BiddingDown, cfg);
  ASSERT_TRUE(miss.ok());
  EXPECT_EQ(miss.outcomes[0].verdict, Verdict::Fail);
  EXPECT_NE(miss.transcript_text.find("bidding-down-detected"), std::string::npos);
  // Second attempt goes through clean: the UE recovers a real context.
  const UeActor& ue2 = *miss.sim->ues()[0];
  EXPECT_EQ(ue2.st.phase, UePhase::Registered);
  for (const auto& [conn, ctx] : ue2.st.contexts) {
    if (ctx.state == ContextState::Active && ctx.scope == ContextScope::Nas) {
      EXPECT_NE(ctx.cipher_alg, CipherAlg::NEA0);
      EXPECT_NE(ctx.integrity_alg, IntegrityAlg::NIA0);
    }
  }
}

TEST(ExecuteAttack, EmergencyCatchGatedByEmergencyAllowance) {
  ScenarioConfig cfg = base_config();
  cfg.knobs.unauthenticated_emergency_allowed = true;
  AttackOutcome hit = must_run(AttackKind::EmergencySupiCatch, cfg);
  EXPECT_EQ(hit.verdict, Verdict::Success);

  cfg.knobs.unauthenticated_emergency_allowed = false;
  AttackOutcome miss = must_run(AttackKind::EmergencySupiCatch, cfg);
  EXPECT_EQ(miss.verdict, Verdict::Fail);
}

TEST(ExecuteAttack, EmergencyCatchWorksEvenWithPkSchemeAndCaMode) {
  // The emergency identity rides the null scheme regardless of provisioning,
  // and the out-of-band trigger is not subject to the signature gate.
  ScenarioConfig cfg = base_config();
  cfg.knobs.unauthenticated_emergency_allowed = true;
  cfg.knobs.ca_mode = true;
  AttackOutcome outcome = must_run(AttackKind::EmergencySupiCatch, cfg);
  EXPECT_EQ(outcome.verdict, Verdict::Success);
}

TEST(ExecuteAttack, SupiCatchActiveUsesIdentityRequestEdgeCase) {
  ScenarioConfig cfg = base_config();
  cfg.knobs.suci_scheme = SuciScheme::Null;
  RunResult r = execute_attack(AttackKind::SupiCatchActive, cfg);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.outcomes[0].verdict, Verdict::Success);
  // The catch happened on the IdentityResponse, not the initial request.
  ASSERT_FALSE(r.outcomes[0].evidence.empty());
  std::string line = r.sim->transcript().line(r.outcomes[0].evidence[0].transcript_line);
  EXPECT_NE(line.find("IdentityResponse"), std::string::npos);
  // The UE was lured off a registered state via the better-cell broadcast.
  EXPECT_NE(r.transcript_text.find("guti="), std::string::npos);

  // With the probabilistic scheme the response reveals only the SUCI.
  ScenarioConfig pk_cfg = base_config();
  AttackOutcome miss = must_run(AttackKind::SupiCatchActive, pk_cfg);
  EXPECT_EQ(miss.verdict, Verdict::Fail);
}

TEST(ExecuteAttack, SupiCatchActiveBlockedByCaMode) {
  ScenarioConfig cfg = base_config();
  cfg.knobs.suci_scheme = SuciScheme::Null;
  cfg.knobs.ca_mode = true;
  AttackOutcome outcome = must_run(AttackKind::SupiCatchActive, cfg);
  // Rogue broadcast and identity request are unsigned: never trusted.
  EXPECT_EQ(outcome.verdict, Verdict::Fail);
}

TEST(Sniffer, ClearBodiesVisibleProtectedBodiesOpaque) {
  ScenarioConfig cfg = base_config();
  RunResult r = execute_attack(AttackKind::SupiCatchPassive, cfg);
  ASSERT_TRUE(r.ok());
  bool saw_clear_registration = false, saw_protected_metadata = false;
  for (const auto& e : r.sim->transcript().events()) {
    if (e.kind != Transcript::EventKind::Observe) continue;
    if (e.text.find("RegistrationRequest") != std::string::npos) {
      EXPECT_NE(e.text.find("caps="), std::string::npos);  // caps readable
      EXPECT_NE(e.text.find("suci="), std::string::npos);
      saw_clear_registration = true;
    }
    if (e.text.find("SecurityModeCommand") != std::string::npos) {
      EXPECT_NE(e.text.find("protected"), std::string::npos);
      EXPECT_EQ(e.text.find("body={"), std::string::npos);  // body opaque
      EXPECT_NE(e.text.find("cipher="), std::string::npos);  // metadata visible
      saw_protected_metadata = true;
    }
  }
  EXPECT_TRUE(saw_clear_registration);
  EXPECT_TRUE(saw_protected_metadata);
}

TEST(Sniffer, NullCipheredPayloadReadable) {
  ScenarioConfig cfg = base_config();
  cfg.knobs.null_algorithms_allowed = true;
  cfg.knobs.capability_echo = false;
  RunResult r = execute_attack(AttackKind::BiddingDown, cfg);
  ASSERT_TRUE(r.ok());
  // After the strip the accept travels under NEA0: payload bytes visible.
  bool saw_readable_protected_body = false;
  for (const auto& e : r.sim->transcript().events()) {
    if (e.kind == Transcript::EventKind::Observe &&
        e.text.find("cipher=NEA0") != std::string::npos &&
        e.text.find("payload={") != std::string::npos) {
      saw_readable_protected_body = true;
    }
  }
  EXPECT_TRUE(saw_readable_protected_body);
}

TEST(Evidence, ValidatorChecksLineAndClaim) {
  ScenarioConfig cfg = base_config();
  cfg.knobs.suci_scheme = SuciScheme::Null;
  RunResult r = execute_attack(AttackKind::SupiCatchPassive, cfg);
  ASSERT_TRUE(r.ok());
  AttackOutcome outcome = r.outcomes[0];
  EXPECT_TRUE(validate_evidence(outcome, r.sim->transcript()));

  AttackOutcome bad_line = outcome;
  bad_line.evidence[0].transcript_line = 999999;
  EXPECT_FALSE(validate_evidence(bad_line, r.sim->transcript()));

  AttackOutcome bad_claim = outcome;
  bad_claim.evidence[0].claim = "not-on-that-line";
  EXPECT_FALSE(validate_evidence(bad_claim, r.sim->transcript()));

  AttackOutcome bare_success = outcome;
  bare_success.evidence.clear();
  EXPECT_FALSE(validate_evidence(bare_success, r.sim->transcript()));
}

TEST(Adversary, AttackerNeverReachesContextActive) {
  for (AttackKind kind : kAllAttacks) {
    for (bool weak : {false, true}) {
      ScenarioConfig cfg = base_config();
      if (weak) {
        cfg.knobs.suci_scheme = SuciScheme::Null;
        cfg.knobs.null_algorithms_allowed = true;
        cfg.knobs.unauthenticated_emergency_allowed = true;
        cfg.knobs.capability_echo = false;
      }
      RunResult r = execute_attack(kind, cfg);
      ASSERT_TRUE(r.ok());
      for (const auto& ue : r.sim->ues()) {
        for (const auto& [conn, ctx] : ue->st.contexts) {
          if (ctx.state == ContextState::Active) {
            EXPECT_TRUE(ctx.peer.starts_with("net:"))
                << to_string(kind) << ": active context with " << ctx.peer;
          }
        }
      }
    }
  }
}

TEST(Adversary, CaModeNeverFlipsFailToSuccess) {
  for (AttackKind kind : kAllAttacks) {
    ScenarioConfig cfg = base_config();
    cfg.knobs.null_algorithms_allowed = true;
    cfg.knobs.unauthenticated_emergency_allowed = true;
    RunResult off = execute_attack(kind, cfg);
    cfg.knobs.ca_mode = true;
    RunResult on = execute_attack(kind, cfg);
    ASSERT_TRUE(off.ok() && on.ok());
    if (off.outcomes[0].verdict == Verdict::Fail) {
      EXPECT_EQ(on.outcomes[0].verdict, Verdict::Fail) << to_string(kind);
    }
  }
}

TEST(Sniffer, ViewContainsOnlyCapturedEvents) {
  ScenarioConfig cfg = base_config();
  cfg.knobs.suci_scheme = SuciScheme::Null;
  RunResult r = execute_attack(AttackKind::SupiCatchPassive, cfg);
  ASSERT_TRUE(r.ok());
  auto view = sniffer_view(r.sim->transcript());
  ASSERT_FALSE(view.empty());
  bool saw_msin = false;
  for (const auto& line : view) {
    EXPECT_TRUE(line.find(" observe ") != std::string::npos ||
                line.find(" expose ") != std::string::npos);
    if (line.find(cfg.subscribers[0].supi.msin) != std::string::npos) saw_msin = true;
  }
  EXPECT_TRUE(saw_msin);

  // Without the sniff capability the attacker captures nothing.
  ScenarioConfig deaf = base_config();
  deaf.attacker_caps = {};
  deaf.attacker_caps.can_broadcast = deaf.attacker_caps.can_inject_preauth = true;
  RunResult r2 = execute_attack(AttackKind::PreauthDosReject, deaf);
  ASSERT_TRUE(r2.ok());
  EXPECT_TRUE(sniffer_view(r2.sim->transcript()).empty());
}

TEST(Sniffer, CoreLinkInvisibleToRadioObserver) {
  // Home-control confirmations carry the SUPI between operators; the radio
  // sniffer must never see them.
  ScenarioConfig cfg = base_config();
  RunResult r = execute_attack(AttackKind::SupiCatchPassive, cfg);
  ASSERT_TRUE(r.ok());
  bool confirmed = false;
  for (const auto& e : r.sim->transcript().events()) {
    if (e.kind == Transcript::EventKind::Observe) {
      EXPECT_EQ(e.text.find("AuthResult"), std::string::npos);
    }
    if (e.kind == Transcript::EventKind::Deliver && e.link == Link::Core &&
        e.text.find("AuthResult") != std::string::npos)
      confirmed = true;
  }
  EXPECT_TRUE(confirmed);  // the confirmation did happen, off the radio
}

TEST(Adversary, MsinNeverOnRadioUnderProbabilisticScheme) {
  // The UE sends its SUPI in the clear only under the null scheme or an
  // unauthenticated emergency; with the pk scheme and emergency disabled the
  // msin never appears in any radio event.
  for (AttackKind kind : kAllAttacks) {
    ScenarioConfig cfg = base_config();
    RunResult r = execute_attack(kind, cfg);
    ASSERT_TRUE(r.ok());
    const std::string& msin = cfg.subscribers[0].supi.msin;
    for (const auto& e : r.sim->transcript().events()) {
      if (e.link != Link::Radio) continue;
      if (e.kind == Transcript::EventKind::Note) continue;
      EXPECT_EQ(e.text.find(msin), std::string::npos)
          << to_string(kind) << " leaked msin: " << Transcript::render_line(e);
    }
  }
}

TEST(Adversary, CaModeInjectedMessagesLeaveUeStateUnchanged) {
  // With all roots provisioned, every injected pre-authentication message is
  // dropped; the UE ends in exactly the state of an attack-free run.
  ScenarioConfig benign = base_config();
  benign.knobs.ca_mode = true;
  benign.attacker_caps = {};
  RunResult clean = run_scenario(benign);
  ASSERT_TRUE(clean.ok());
  std::string clean_hash = clean.sim->ues()[0]->state_hash();

  for (AttackKind kind : {AttackKind::PreauthDosReject, AttackKind::SilentDowngrade,
                          AttackKind::SupiCatchActive}) {
    ScenarioConfig cfg = base_config();
    cfg.knobs.ca_mode = true;
    RunResult r = execute_attack(kind, cfg);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.sim->ues()[0]->state_hash(), clean_hash) << to_string(kind);
  }
}

TEST(Adversary, NoCapabilityGrantsKeyMaterial) {
  static_assert(!AttackerCapabilities::knows_root_keys);
  AttackerCapabilities all;
  all.can_sniff = all.can_inject_preauth = true;
  all.can_broadcast = all.can_mutate_in_transit = true;
  EXPECT_FALSE(all.knows_root_keys);
}

TEST(Adversary, RequiredCapabilitiesMatchCatalog) {
  EXPECT_TRUE(required_capabilities(AttackKind::SupiCatchPassive).can_sniff);
  EXPECT_FALSE(required_capabilities(AttackKind::SupiCatchPassive).can_broadcast);
  EXPECT_TRUE(required_capabilities(AttackKind::BiddingDown).can_mutate_in_transit);
  EXPECT_TRUE(required_capabilities(AttackKind::PreauthDosReject).can_inject_preauth);
  EXPECT_TRUE(required_capabilities(AttackKind::SilentDowngrade).can_broadcast);
}

}  // namespace
}  // namespace fivegsim
