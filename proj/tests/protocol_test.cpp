#include "fivegsim/protocol.hpp"

#include <gtest/gtest.h>

#include <set>

#include "fivegsim/sim_engine.hpp"
#include "test_support.hpp"

namespace fivegsim {
namespace {

using test::ActorHarness;

TEST(UeStep, PowerOnEmitsRegistrationRequestWithFreshSuci) {
  ActorHarness h;
  // Candidate known from a broadcast, then power-on.
  Delivery bcast{h.home.st.endpoint, h.ue.st.endpoint, Link::Radio,
                 make_clear(MessageKind::Broadcast, h.home.st.plmn, BroadcastBody{10})};
  h.ue.on_message(bcast, 1);
  StepOutput out = h.ue.on_trigger(Trigger{h.ue.st.endpoint, TriggerKind::PowerOn}, 2);
  ASSERT_EQ(out.radio.size(), 1u);
  EXPECT_EQ(out.radio[0].first, h.home.st.endpoint);
  const ProtocolMessage& msg = out.radio[0].second;
  EXPECT_EQ(msg.kind, MessageKind::RegistrationRequest);
  EXPECT_TRUE(msg.clear());
  const auto& body = std::get<RegistrationRequestBody>(msg.body);
  ASSERT_TRUE(body.suci.has_value());
  EXPECT_EQ(body.suci->scheme, SuciScheme::ProbabilisticPk);

  // A second attempt conceals with fresh randomness.
  StepOutput retry;
  h.ue.st.phase = UePhase::Idle;
  h.ue.st.attempted.clear();
  h.ue.start_registration(*h.ue.st.camped, "3gpp", 3, retry);
  const auto& body2 = std::get<RegistrationRequestBody>(retry.radio[0].second.body);
  EXPECT_NE(body.suci->ciphertext, body2.suci->ciphertext);
}

TEST(UeStep, ValidChallengeAnsweredWithRootKeyResponse) {
  ActorHarness h;
  h.ue.st.candidates[h.home.st.endpoint] =
      CandidateNetwork{h.home.st.endpoint, h.home.st.plmn, 10};
  StepOutput start;
  h.ue.start_registration(h.ue.st.candidates[h.home.st.endpoint], "3gpp", 1, start);

  Bytes nonce = Rng(50).bytes(16);
  AuthChallengeBody challenge{nonce, 1, aka::autn(h.ue.st.root_key, nonce, 1)};
  Delivery d{h.home.st.endpoint, h.ue.st.endpoint, Link::Radio,
             make_clear(MessageKind::AuthChallenge, h.home.st.plmn, challenge)};
  StepOutput out = h.ue.on_message(d, 2);
  ASSERT_EQ(out.radio.size(), 1u);
  const auto& resp = std::get<AuthResponseBody>(out.radio[0].second.body);
  EXPECT_EQ(resp.failure, AuthFailureKind::None);
  // Challenge-response oracle: recompute the expected answer directly.
  EXPECT_EQ(resp.res, aka::res(h.ue.st.root_key, nonce, 1, h.home.st.plmn));
  EXPECT_EQ(h.ue.st.phase, UePhase::AwaitingSmc);
}

TEST(UeStep, ForgedChallengeTriggersMacFailure) {
  ActorHarness h;
  h.ue.st.candidates[h.home.st.endpoint] =
      CandidateNetwork{h.home.st.endpoint, h.home.st.plmn, 10};
  StepOutput start;
  h.ue.start_registration(h.ue.st.candidates[h.home.st.endpoint], "3gpp", 1, start);

  Bytes nonce = Rng(51).bytes(16);
  AuthChallengeBody forged{nonce, 1, Rng(52).bytes(16)};  // rogue has no K
  Delivery d{h.home.st.endpoint, h.ue.st.endpoint, Link::Radio,
             make_clear(MessageKind::AuthChallenge, h.home.st.plmn, forged)};
  StepOutput out = h.ue.on_message(d, 2);
  ASSERT_EQ(out.radio.size(), 1u);
  EXPECT_EQ(std::get<AuthResponseBody>(out.radio[0].second.body).failure,
            AuthFailureKind::MacFailure);
  EXPECT_NE(h.ue.st.phase, UePhase::AwaitingSmc);
}

TEST(UeStep, UnauthenticatedRejectDeniesInBaselineMode) {
  ActorHarness h;
  h.ue.st.candidates[h.home.st.endpoint] =
      CandidateNetwork{h.home.st.endpoint, h.home.st.plmn, 10};
  StepOutput start;
  h.ue.start_registration(h.ue.st.candidates[h.home.st.endpoint], "3gpp", 1, start);

  Delivery d{h.home.st.endpoint, h.ue.st.endpoint, Link::Radio,
             make_clear(MessageKind::RegistrationReject, h.home.st.plmn,
                        RegistrationRejectBody{"permanent"})};
  StepOutput out = h.ue.on_message(d, 2);
  EXPECT_EQ(h.ue.st.phase, UePhase::Denied);
  EXPECT_TRUE(h.ue.st.barred_plmns.contains(h.home.st.plmn));
  bool denied_note = false;
  for (const auto& n : out.notes) {
    if (n.starts_with("phase=denied")) denied_note = true;
  }
  EXPECT_TRUE(denied_note);
}

TEST(UeStep, NonPermanentRejectDoesNotBar) {
  ActorHarness h;
  h.ue.st.candidates[h.home.st.endpoint] =
      CandidateNetwork{h.home.st.endpoint, h.home.st.plmn, 10};
  StepOutput start;
  h.ue.start_registration(h.ue.st.candidates[h.home.st.endpoint], "3gpp", 1, start);
  Delivery d{h.home.st.endpoint, h.ue.st.endpoint, Link::Radio,
             make_clear(MessageKind::RegistrationReject, h.home.st.plmn,
                        RegistrationRejectBody{"congestion"})};
  h.ue.on_message(d, 2);
  EXPECT_FALSE(h.ue.st.barred_plmns.contains(h.home.st.plmn));
}

TEST(NetworkStep, ProbabilisticSuciDeconcealedAndChallenged) {
  ActorHarness h;
  RegistrationRequestBody body;
  body.suci = conceal_supi(h.ue.st.supi, h.ue.st.usim_keys, h.ue.st.rng);
  body.caps = SecurityCapabilities::standard(false);
  Delivery d{h.ue.st.endpoint, h.home.st.endpoint, Link::Radio,
             make_clear(MessageKind::RegistrationRequest, h.ue.st.supi.plmn(), body)};
  StepOutput out = h.home.on_message(d, 1);
  ASSERT_EQ(out.radio.size(), 1u);
  EXPECT_EQ(out.radio[0].second.kind, MessageKind::AuthChallenge);
  auto session = h.home.st.sessions.find(h.ue.st.endpoint);
  ASSERT_NE(session, h.home.st.sessions.end());
  EXPECT_EQ(session->second.supi->render(), h.ue.st.supi.render());
}

TEST(NetworkStep, UnknownGutiTriggersIdentityRequest) {
  ActorHarness h;
  RegistrationRequestBody body;
  body.guti = Guti{h.home.st.plmn, 0xdeadbeef, 1};
  body.caps = SecurityCapabilities::standard(false);
  Delivery d{h.ue.st.endpoint, h.home.st.endpoint, Link::Radio,
             make_clear(MessageKind::RegistrationRequest, h.ue.st.supi.plmn(), body)};
  StepOutput out = h.home.on_message(d, 1);
  ASSERT_EQ(out.radio.size(), 1u);
  EXPECT_EQ(out.radio[0].second.kind, MessageKind::IdentityRequest);
}

TEST(NetworkStep, EmergencySessionWhenAllowed) {
  ActorHarness h;
  h.home.st.knobs.unauthenticated_emergency_allowed = true;
  Rng rng(60);
  EmergencyRequestBody body{conceal_supi(h.ue.st.supi, HnKeyMaterial{}, rng)};
  Delivery d{h.ue.st.endpoint, h.home.st.endpoint, Link::Radio,
             make_clear(MessageKind::EmergencyRequest, h.ue.st.supi.plmn(), body)};
  StepOutput out = h.home.on_message(d, 1);
  auto session = h.home.st.sessions.find(h.ue.st.endpoint);
  ASSERT_NE(session, h.home.st.sessions.end());
  EXPECT_EQ(session->second.phase, SessionPhase::EmergencyActive);
  bool noted = false;
  for (const auto& n : out.notes) {
    if (n.starts_with("emergency-session") &&
        n.find("protection=null") != std::string::npos)
      noted = true;
  }
  EXPECT_TRUE(noted);
}

TEST(NetworkStep, EmergencyRejectedWhenNotAllowed) {
  ActorHarness h;
  Rng rng(61);
  EmergencyRequestBody body{conceal_supi(h.ue.st.supi, HnKeyMaterial{}, rng)};
  Delivery d{h.ue.st.endpoint, h.home.st.endpoint, Link::Radio,
             make_clear(MessageKind::EmergencyRequest, h.ue.st.supi.plmn(), body)};
  h.home.on_message(d, 1);
  auto session = h.home.st.sessions.find(h.ue.st.endpoint);
  EXPECT_TRUE(session == h.home.st.sessions.end() ||
              session->second.phase != SessionPhase::EmergencyActive);
}

TEST(RunAka, MatchingRootKeysSucceedWithHomeControlEntry) {
  ActorHarness h;
  AkaResult r = run_aka(h.ue, h.home, h.channel, h.now);
  EXPECT_TRUE(r.success);
  EXPECT_FALSE(r.resynced);
  ASSERT_EQ(h.home_db().ledger.size(), 1u);
  EXPECT_EQ(h.home_db().ledger[0].supi, h.ue.st.supi.render());
  EXPECT_EQ(h.home_db().ledger[0].visited_plmn, "001-01");
}

TEST(RunAka, AuthMethodIsALabelWithIdenticalBehavior) {
  // The selected method rides the messages as a label; keys, contexts and
  // outcomes are unchanged.
  ActorHarness aka(42);
  aka.ue.st.policy.auth_method = "5g-aka";
  ASSERT_TRUE(run_aka(aka.ue, aka.home, aka.channel, aka.now).success);

  ActorHarness eap(42);
  eap.ue.st.policy.auth_method = "eap-aka";
  ASSERT_TRUE(run_aka(eap.ue, eap.home, eap.channel, eap.now).success);

  EXPECT_EQ(aka.ue.state_hash(), eap.ue.state_hash());
  EXPECT_NE(aka.channel.transcript().render().find("method=5g-aka"),
            std::string::npos);
  EXPECT_NE(eap.channel.transcript().render().find("method=eap-aka"),
            std::string::npos);
}

TEST(RunAka, RoamingConfirmationNamesVisitedNetwork) {
  ActorHarness h;
  // Served by the visited operator; the confirmation still lands in the home
  // ledger and names the serving PLMN.
  AkaResult r = run_aka(h.ue, h.visited, h.channel, h.now, {&h.home});
  EXPECT_TRUE(r.success);
  ASSERT_EQ(h.home_db().ledger.size(), 1u);
  EXPECT_EQ(h.home_db().ledger[0].visited_plmn, "310-410");
  EXPECT_EQ(h.home_db().ledger[0].supi, h.ue.st.supi.render());
}

TEST(RunAka, KeyMirrorAfterSuccess) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  std::string conn = h.ue.st.nas_conn(h.home.st.endpoint, "3gpp");
  const KeyHierarchy& ue_side = h.ue.st.hierarchies.at(conn);
  const KeyHierarchy& net_side =
      *h.home.st.sessions.at(h.ue.st.endpoint).hierarchy;
  EXPECT_EQ(ue_side, net_side);
}

TEST(RunAka, WrongRootKeyFailsWithoutContextOrLedgerEntry) {
  ActorHarness h;
  // ARPF holds a different K than the USIM: responses cannot match.
  h.home_db().subscribers.at(h.ue.st.supi.render()).root_key =
      RootKey{Rng(99).bytes(32)};
  AkaResult r = run_aka(h.ue, h.home, h.channel, h.now);
  EXPECT_FALSE(r.success);
  EXPECT_FALSE(r.failure.empty());
  EXPECT_EQ(h.home_db().ledger.size(), 0u);
  EXPECT_NE(h.ue.st.phase, UePhase::Registered);
  for (const auto& [conn, ctx] : h.ue.st.contexts) {
    EXPECT_NE(ctx.state, ContextState::Active);
  }
}

TEST(RunAka, CounterSkewRecoversThroughResync) {
  ActorHarness h;
  h.ue.st.last_accepted_run = 5;  // UE ahead of the ARPF record
  AkaResult r = run_aka(h.ue, h.home, h.channel, h.now);
  EXPECT_TRUE(r.success);
  EXPECT_TRUE(r.resynced);
  ASSERT_EQ(h.home_db().ledger.size(), 1u);
  EXPECT_GT(h.home_db().ledger[0].run, 5u);
}

TEST(EstablishContexts, DistinctServingNetworksShareZeroKeyBytes) {
  ActorHarness h;
  ContextLayout layout = establish_contexts(
      h.ue, {&h.home, &h.visited}, ContextLayoutMode::DistinctSn, h.channel, h.now);
  ASSERT_TRUE(layout.ok);
  ASSERT_EQ(layout.connections.size(), 2u);
  const SecurityContext& a = h.ue.st.contexts.at(layout.connections[0]);
  const SecurityContext& b = h.ue.st.contexts.at(layout.connections[1]);
  EXPECT_NE(a.enc_key, b.enc_key);
  EXPECT_NE(a.int_key, b.int_key);
  const KeyHierarchy& ha = h.ue.st.hierarchies.at(layout.connections[0]);
  const KeyHierarchy& hb = h.ue.st.hierarchies.at(layout.connections[1]);
  std::set<Bytes> a_keys{ha.k_ausf, ha.k_seaf, ha.k_amf, ha.k_gnb, ha.nas_enc,
                         ha.nas_int, ha.rrc_enc, ha.rrc_int, ha.up_enc, ha.up_int};
  for (const Bytes& k : {hb.k_ausf, hb.k_seaf, hb.k_amf, hb.k_gnb, hb.nas_enc,
                         hb.nas_int, hb.rrc_enc, hb.rrc_int, hb.up_enc, hb.up_int}) {
    EXPECT_FALSE(a_keys.contains(k));
  }
}

TEST(EstablishContexts, SamePlmnDualSharesNasKeysNotCounters) {
  ActorHarness h;
  ContextLayout layout = establish_contexts(h.ue, {&h.home},
                                            ContextLayoutMode::SamePlmnDual,
                                            h.channel, h.now);
  ASSERT_TRUE(layout.ok);
  SecurityContext& primary = h.ue.st.contexts.at(layout.connections[0]);
  SecurityContext& secondary = h.ue.st.contexts.at(layout.connections[1]);
  EXPECT_EQ(primary.enc_key, secondary.enc_key);
  EXPECT_EQ(primary.int_key, secondary.int_key);
  EXPECT_EQ(primary.cipher_alg, secondary.cipher_alg);
  // Independent counter streams: advancing one leaves the other untouched.
  uint32_t before = secondary.tx_counter;
  protect(to_bytes("x"), primary);
  protect(to_bytes("y"), primary);
  EXPECT_EQ(secondary.tx_counter, before);
  EXPECT_NE(primary.tx_counter, secondary.tx_counter);
}

TEST(EstablishContexts, SingleNetworkYieldsOneNasContext) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  size_t nas_count = 0;
  for (const auto& [conn, ctx] : h.ue.st.contexts) {
    if (ctx.scope == ContextScope::Nas && ctx.state == ContextState::Active) nas_count++;
  }
  EXPECT_EQ(nas_count, 1u);
}

TEST(Handover, SecurePolicyDerivesFreshKeys) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  std::string conn = h.ue.st.nas_conn(h.home.st.endpoint, "3gpp");
  Bytes old_rrc_enc = h.ue.st.contexts.at(conn + "/as").enc_key;
  HandoverOutcome r = handover(h.ue, h.home, h.visited, HandoverSecurity::Secure,
                               h.channel, h.now);
  ASSERT_TRUE(r.ok);
  EXPECT_TRUE(r.fresh_keys);
  std::string new_conn = h.ue.st.nas_conn(h.visited.st.endpoint, "3gpp") + "/as";
  EXPECT_NE(h.ue.st.contexts.at(new_conn).enc_key, old_rrc_enc);
  EXPECT_EQ(h.channel.transcript().render().find("KEYMAT"), std::string::npos);
}

TEST(Handover, InsecurePolicyExposesKeyMaterialOnTheChannel) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  std::string conn = h.ue.st.nas_conn(h.home.st.endpoint, "3gpp");
  Bytes old_rrc_enc = h.ue.st.contexts.at(conn + "/as").enc_key;
  HandoverOutcome r = handover(h.ue, h.home, h.visited, HandoverSecurity::Insecure,
                               h.channel, h.now);
  ASSERT_TRUE(r.ok);
  EXPECT_FALSE(r.fresh_keys);
  std::string new_conn = h.ue.st.nas_conn(h.visited.st.endpoint, "3gpp") + "/as";
  EXPECT_EQ(h.ue.st.contexts.at(new_conn).enc_key, old_rrc_enc);
  std::string transcript = h.channel.transcript().render();
  EXPECT_NE(transcript.find("KEYMAT"), std::string::npos);
  EXPECT_NE(transcript.find(hex_encode(old_rrc_enc)), std::string::npos);
}

TEST(Handover, WithoutContextFails) {
  ActorHarness h;
  HandoverOutcome r = handover(h.ue, h.home, h.visited, HandoverSecurity::Secure,
                               h.channel, h.now);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.error, "NoActiveContext");
}

TEST(UpPolicy, RequiredProtectionYieldsProtectedDrb) {
  DrbConfig cfg = apply_up_policy(UpPolicyChoice::Required, UpPolicyChoice::Required,
                                  LocalSmfOverride::Off);
  EXPECT_TRUE(cfg.integrity_on);
  EXPECT_TRUE(cfg.ciphering_on);
  EXPECT_EQ(cfg.origin, "home-smf");
}

TEST(UpPolicy, LocalOverrideDisablesConfidentialityAndAudits) {
  std::vector<std::string> audit;
  DrbConfig cfg = apply_up_policy(UpPolicyChoice::Required, UpPolicyChoice::Required,
                                  LocalSmfOverride::ConfNotNeeded, &audit);
  EXPECT_TRUE(cfg.integrity_on);
  EXPECT_FALSE(cfg.ciphering_on);
  EXPECT_EQ(cfg.origin, "local-smf-override");
  ASSERT_EQ(audit.size(), 1u);
  EXPECT_NE(audit[0].find("confidentiality=off"), std::string::npos);
}

// Tamper oracle on DRB traffic: with integrity not-needed the bearers run
// NIA0-equivalent and a tampered payload is accepted.
TEST(UpPolicy, IntegrityNotNeededAcceptsTamperedTraffic) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  std::string conn = h.ue.st.nas_conn(h.home.st.endpoint, "3gpp");
  const KeyHierarchy& hier = h.ue.st.hierarchies.at(conn);

  DrbConfig cfg = apply_up_policy(UpPolicyChoice::NotNeeded, UpPolicyChoice::Required,
                                  LocalSmfOverride::Off);
  auto make_drb = [&](uint8_t dir) {
    SecurityContext drb;
    drb.scope = ContextScope::As;
    drb.connection_id = "drb";
    drb.enc_key = hier.up_enc;
    drb.int_key = hier.up_int;
    drb.cipher_alg = cfg.ciphering_on ? hier.context.cipher_alg : CipherAlg::NEA0;
    drb.integrity_alg = cfg.integrity_on ? hier.context.integrity_alg : IntegrityAlg::NIA0;
    drb.tx_direction = dir;
    drb.state = ContextState::Active;
    return drb;
  };
  SecurityContext tx = make_drb(0), rx = make_drb(1);
  ProtectionEnvelope env = protect(to_bytes("user-bytes"), tx);
  env.payload[2] ^= 0x40;
  UnprotectResult r = unprotect(env, rx);
  EXPECT_TRUE(r.ok());  // tamper goes through: no integrity on this DRB
  EXPECT_NE(to_string(BytesView(r.payload)), "user-bytes");
}

TEST(VerifyPreauthSignature, ThreeVerdicts) {
  Rng rng(70);
  SigningAuthority root = SigningAuthority::generate("fiveg-root-ca", rng);
  OperatorCredential cred = OperatorCredential::issue_for("001-01", root, rng);
  TrustStore trust;
  trust.add_root(root);
  Plmn plmn{"001", "01"};

  ProtocolMessage legit = make_clear_signed(MessageKind::RegistrationReject, plmn,
                                            RegistrationRejectBody{"permanent"}, cred);
  EXPECT_EQ(verify_preauth_signature(legit, trust), SignatureVerdict::Verified);

  ProtocolMessage rogue = make_clear(MessageKind::RegistrationReject, plmn,
                                     RegistrationRejectBody{"permanent"});
  EXPECT_EQ(verify_preauth_signature(rogue, trust), SignatureVerdict::Invalid);

  TrustStore empty;  // CA mode off
  EXPECT_EQ(verify_preauth_signature(rogue, empty), SignatureVerdict::Unverifiable);
}

// Discarded messages leave no trace in actor state.
TEST(Invariants, FailedIntegrityLeavesStateUnchanged) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  std::string ue_hash = h.ue.state_hash();
  std::string net_hash = h.home.state_hash();

  // Tampered protected message toward the UE.
  std::string conn = h.ue.st.nas_conn(h.ue.st.endpoint, "3gpp");
  SecurityContext& net_ctx =
      h.home.st.sessions.at(h.ue.st.endpoint).contexts.at(conn);
  SecurityContext tx_copy = net_ctx;  // do not advance real state
  ProtocolMessage msg = make_protected(MessageKind::RegistrationAccept, h.home.st.plmn,
                                       RegistrationAcceptBody{Guti{h.home.st.plmn, 7, 1}},
                                       tx_copy);
  msg.envelope->payload[0] ^= 0x01;
  Delivery d{h.home.st.endpoint, h.ue.st.endpoint, Link::Radio, msg};
  StepOutput out = h.ue.on_message(d, h.now);
  EXPECT_NE(out.verdict, "ok");
  EXPECT_EQ(h.ue.state_hash(), ue_hash);

  // Tampered protected message toward the network.
  std::string ue_conn = h.ue.st.nas_conn(h.home.st.endpoint, "3gpp");
  SecurityContext ue_tx = h.ue.st.contexts.at(ue_conn);
  ProtocolMessage up_msg = make_protected(MessageKind::SecurityModeComplete,
                                          h.ue.st.supi.plmn(),
                                          SecurityModeCompleteBody{}, ue_tx);
  up_msg.envelope->payload.push_back(0xff);
  Delivery d2{h.ue.st.endpoint, h.home.st.endpoint, Link::Radio, up_msg};
  StepOutput out2 = h.home.on_message(d2, h.now);
  EXPECT_NE(out2.verdict, "ok");
  EXPECT_EQ(h.home.state_hash(), net_hash);
}

TEST(Invariants, ReplayedProtectedMessageDiscarded) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  // Capture the RegistrationAccept off the transcript path: rebuild an
  // identical envelope with a stale counter by replaying counter 1.
  std::string conn = h.ue.st.nas_conn(h.ue.st.endpoint, "3gpp");
  SecurityContext stale = h.home.st.sessions.at(h.ue.st.endpoint).contexts.at(conn);
  stale.tx_counter = 1;  // counter already consumed by the real Accept
  ProtocolMessage replay = make_protected(MessageKind::RegistrationAccept,
                                          h.home.st.plmn,
                                          RegistrationAcceptBody{Guti{h.home.st.plmn, 9, 2}},
                                          stale);
  std::string before = h.ue.state_hash();
  Delivery d{h.home.st.endpoint, h.ue.st.endpoint, Link::Radio, replay};
  StepOutput out = h.ue.on_message(d, h.now);
  EXPECT_EQ(out.verdict, "discarded-replay-detected");
  EXPECT_EQ(h.ue.state_hash(), before);
}

TEST(UeStep, ClearMessageAfterActiveContextDiscarded) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  std::string before = h.ue.state_hash();
  // Spoofed clear reject claiming the serving network's identity and path.
  Delivery d{h.home.st.endpoint, h.ue.st.endpoint, Link::Radio,
             make_clear(MessageKind::RegistrationReject, h.home.st.plmn,
                        RegistrationRejectBody{"permanent"})};
  StepOutput out = h.ue.on_message(d, h.now);
  EXPECT_EQ(out.verdict, "discarded-clear-after-context");
  EXPECT_EQ(h.ue.state_hash(), before);
  EXPECT_FALSE(h.ue.st.barred_plmns.contains(h.home.st.plmn));
}

TEST(UeStep, TauRejectPermanentBarsAndDenies) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  // Movement toward a cell we hold no context with; the rogue answers with a
  // permanent TAU reject.
  h.ue.st.candidates["attacker:rogue"] =
      CandidateNetwork{"attacker:rogue", h.home.st.plmn, 100};
  StepOutput moved = h.ue.on_trigger(
      Trigger{h.ue.st.endpoint, TriggerKind::TauMove, "attacker:rogue"}, h.now);
  ASSERT_EQ(moved.radio.size(), 1u);
  EXPECT_EQ(moved.radio[0].second.kind, MessageKind::TauRequest);
  EXPECT_TRUE(moved.radio[0].second.clear());

  Delivery reject{"attacker:rogue", h.ue.st.endpoint, Link::Radio,
                  make_clear(MessageKind::TauReject, h.home.st.plmn,
                             TauRejectBody{"permanent"})};
  h.ue.on_message(reject, h.now);
  EXPECT_EQ(h.ue.st.phase, UePhase::Denied);
  EXPECT_TRUE(h.ue.st.barred_plmns.contains(h.home.st.plmn));
}

TEST(GutiAssignment, EveryRegistrationPolicyYieldsDistinctIds) {
  ActorHarness h;
  std::set<uint32_t> ids;
  for (int i = 0; i < 5; ++i) {
    ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success) << "round " << i;
    ASSERT_TRUE(h.ue.st.guti.has_value());
    ids.insert(h.ue.st.guti->temp_id);
    h.ue.st.phase = UePhase::Idle;  // force a fresh registration round
    h.ue.st.attempted.clear();
  }
  EXPECT_EQ(ids.size(), 5u);
}

TEST(GutiAssignment, NeverPolicyKeepsTempIdConstant) {
  ActorHarness h;
  h.home.st.knobs.guti_policy = GutiPolicy{GutiPolicy::Kind::Never, 0};
  std::set<uint32_t> ids;
  for (int i = 0; i < 4; ++i) {
    ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
    ids.insert(h.ue.st.guti->temp_id);
    h.ue.st.phase = UePhase::Idle;
    h.ue.st.attempted.clear();
  }
  EXPECT_EQ(ids.size(), 1u);
}

TEST(Rederive, NetworkInitiatedReauthSwapsHierarchies) {
  ActorHarness h;
  ASSERT_TRUE(run_aka(h.ue, h.home, h.channel, h.now).success);
  std::string conn = h.ue.st.nas_conn(h.home.st.endpoint, "3gpp");
  KeyHierarchy before = h.ue.st.hierarchies.at(conn);

  StepOutput out = h.home.on_trigger(
      Trigger{h.home.st.endpoint, TriggerKind::Rederive, h.ue.st.endpoint}, h.now);
  ASSERT_EQ(out.radio.size(), 1u);
  emit_step_output(h.channel, h.now, h.home.st.endpoint, std::move(out));
  drive_until_idle(h.ue, {&h.home}, h.channel, h.now);

  const KeyHierarchy& after = h.ue.st.hierarchies.at(conn);
  EXPECT_EQ(after.context.run_counter, before.context.run_counter + 1);
  EXPECT_NE(after.nas_enc, before.nas_enc);
  EXPECT_EQ(after, *h.home.st.sessions.at(h.ue.st.endpoint).hierarchy);
}

TEST(Rederive, SkippedWithoutActiveNasConnection) {
  ActorHarness h;
  StepOutput out = h.home.on_trigger(
      Trigger{h.home.st.endpoint, TriggerKind::Rederive, h.ue.st.endpoint}, h.now);
  EXPECT_TRUE(out.radio.empty());
  bool skipped = false;
  for (const auto& n : out.notes) {
    if (n.find("no-active-nas-connection") != std::string::npos) skipped = true;
  }
  EXPECT_TRUE(skipped);
}

}  // namespace
}  // namespace fivegsim
