#include <doctest.h>

#include <vector>

#include "stratus/consensus.hpp"
#include "test_support.hpp"

using namespace stratus;
using stratus::testing::TestContext;

namespace {

struct EngineFixture {
  ProtocolParams params;
  MacScheme scheme{3, 4};
  TestContext ctx;
  std::vector<ProposalPtr> committed;
  std::vector<ProposalPtr> abandoned;
  std::vector<View> view_changes;
  ProposalVerdict verdict = ProposalVerdict::EnterCommit;
  ConsensusEngine engine;

  explicit EngineFixture(ReplicaId self)
      : params(make_params()), ctx(self, 4), engine(self, params, scheme, ctx, hooks()) {}

  static ProtocolParams make_params() {
    ProtocolParams p;
    p.n_replicas = 4;
    p.f = 1;
    p.q = 2;
    p.view_timeout = msec(1000);
    return p;
  }

  ConsensusEngine::Hooks hooks() {
    ConsensusEngine::Hooks h;
    h.build_proposal = [this](View v, const Digest& parent) {
      Proposal p;
      p.view = v;
      p.parent = parent;
      p.proposer = engine.leader_of(v);
      p.finalize();
      return p;
    };
    h.validate = [this](const ProposalPtr&) { return verdict; };
    h.schedule_vote = [this](const ProposalPtr& p) { engine.try_vote(p); };
    h.committed = [this](const ProposalPtr& p) { committed.push_back(p); };
    h.abandoned = [this](const ProposalPtr& p) { abandoned.push_back(p); };
    h.view_change = [this](View v) { view_changes.push_back(v); };
    return h;
  }

  ProposalPtr make_proposal(View v, const Digest& parent) {
    Proposal p;
    p.view = v;
    p.parent = parent;
    p.proposer = engine.leader_of(v);
    p.finalize();
    return std::make_shared<const Proposal>(std::move(p));
  }

  QuorumCert qc_for(View v, const Digest& block) {
    QuorumCert qc;
    qc.view = v;
    qc.block = block;
    const Digest d = vote_digest(v, block);
    for (ReplicaId r = 0; r < 3; ++r) qc.shares.push_back(scheme.sign(r, d));  // 2f+1
    return qc;
  }
};

}  // namespace

TEST_CASE("leader rotation is view mod N") {
  EngineFixture f(0);
  CHECK(f.engine.leader_of(5) == 1);  // view 5, N=4
  CHECK(f.engine.leader_of(4) == 0);
  CHECK(f.engine.leader_of(1) == 1);
}

TEST_CASE("a replica votes once for a valid current-view proposal") {
  EngineFixture f(3);
  f.engine.start();
  auto p1 = f.make_proposal(1, kZeroDigest);
  f.engine.on_propose(CeProposeBody{p1, genesis_qc()}, PeerId::replica_id(1));
  CHECK(f.ctx.count_kind(MsgKind::CeVote) == 3);  // votes broadcast to all peers
  CHECK(f.engine.current_view() == 2);

  SUBCASE("never votes twice for the same view") {
    f.ctx.take();
    f.engine.try_vote(p1);
    CHECK(f.ctx.count_kind(MsgKind::CeVote) == 0);
  }
}

TEST_CASE("a ViewChange verdict suppresses the vote and the pacemaker replaces the leader") {
  EngineFixture f(3);
  f.engine.start();
  f.verdict = ProposalVerdict::ViewChange;
  auto p1 = f.make_proposal(1, kZeroDigest);
  f.engine.on_propose(CeProposeBody{p1, genesis_qc()}, PeerId::replica_id(1));
  CHECK(f.ctx.count_kind(MsgKind::CeVote) == 0);  // refuses to vote
  CHECK(f.engine.current_view() == 1);

  f.ctx.take();
  f.ctx.advance(msec(1000));
  CHECK(f.view_changes.size() == 1);
  CHECK(f.engine.current_view() == 2);
  CHECK(f.ctx.count_kind(MsgKind::CeNewView) == 3);  // broadcast with high QC
}

TEST_CASE("stale and malformed proposals are ignored") {
  EngineFixture f(3);
  f.engine.start();
  auto p1 = f.make_proposal(1, kZeroDigest);

  SUBCASE("wrong proposer for the view") {
    f.engine.on_propose(CeProposeBody{p1, genesis_qc()}, PeerId::replica_id(2));
    CHECK(f.ctx.count_kind(MsgKind::CeVote) == 0);
  }
  SUBCASE("justify that does not certify the parent") {
    auto other = f.make_proposal(1, sha256("elsewhere"));
    f.engine.on_propose(CeProposeBody{other, genesis_qc()}, PeerId::replica_id(1));
    CHECK(f.ctx.count_kind(MsgKind::CeVote) == 0);
  }
  SUBCASE("stale view after progress") {
    f.engine.on_propose(CeProposeBody{p1, genesis_qc()}, PeerId::replica_id(1));
    f.ctx.take();
    // view is now 2; replay of the view-1 proposal draws no second vote
    f.engine.on_propose(CeProposeBody{p1, genesis_qc()}, PeerId::replica_id(1));
    CHECK(f.ctx.count_kind(MsgKind::CeVote) == 0);
  }
}

TEST_CASE("three consecutive-view QCs commit the tail block") {
  // Self is replica 0 = leader of view 4: processing the chain v1 <- v2 <- v3
  // plus 2f+1 votes for v3 forms QC(v3) and must commit exactly v1.
  EngineFixture f(0);
  f.engine.start();

  auto p1 = f.make_proposal(1, kZeroDigest);
  f.engine.on_propose(CeProposeBody{p1, genesis_qc()}, PeerId::replica_id(1));
  auto p2 = f.make_proposal(2, p1->id);
  f.engine.on_propose(CeProposeBody{p2, f.qc_for(1, p1->id)}, PeerId::replica_id(2));
  auto p3 = f.make_proposal(3, p2->id);
  f.engine.on_propose(CeProposeBody{p3, f.qc_for(2, p2->id)}, PeerId::replica_id(3));
  CHECK(f.committed.empty());  // two-chain only
  CHECK(f.engine.locked_qc().view == 2);

  const Digest vd = vote_digest(3, p3->id);
  for (ReplicaId r : {1, 2, 3}) {
    f.engine.on_vote(CeVoteBody{3, p3->id, f.scheme.sign(r, vd)}, PeerId::replica_id(r));
  }
  REQUIRE(f.committed.size() == 1);
  CHECK(f.committed[0]->id == p1->id);
  CHECK(f.engine.committed_sequence() == std::vector<Digest>{p1->id});
  // and as leader of view 4 the engine proposed on the fresh QC
  CHECK(f.ctx.count_kind(MsgKind::CePropose) == 3);
}

TEST_CASE("non-consecutive views do not commit") {
  EngineFixture f(0);
  f.engine.start();
  auto p1 = f.make_proposal(1, kZeroDigest);
  f.engine.on_propose(CeProposeBody{p1, genesis_qc()}, PeerId::replica_id(1));
  // view 2 timed out: view 3's proposal chains directly on v1
  auto p3 = f.make_proposal(3, p1->id);
  f.engine.on_propose(CeProposeBody{p3, f.qc_for(1, p1->id)}, PeerId::replica_id(3));
  auto p4 = f.make_proposal(4, p3->id);
  f.engine.on_propose(CeProposeBody{p4, f.qc_for(3, p3->id)}, PeerId::replica_id(0));
  // QC(4) via votes would give chain v1 <- v3 <- v4: views not consecutive
  const Digest vd = vote_digest(4, p4->id);
  EngineFixture g(1);  // leader of view 5 collects the votes
  g.engine.start();
  g.engine.on_propose(CeProposeBody{p1, genesis_qc()}, PeerId::replica_id(1));
  g.engine.on_propose(CeProposeBody{p3, f.qc_for(1, p1->id)}, PeerId::replica_id(3));
  g.engine.on_propose(CeProposeBody{p4, f.qc_for(3, p3->id)}, PeerId::replica_id(0));
  for (ReplicaId r : {0, 2, 3}) {
    g.engine.on_vote(CeVoteBody{4, p4->id, g.scheme.sign(r, vd)}, PeerId::replica_id(r));
  }
  CHECK(g.committed.empty());
}

TEST_CASE("pacemaker timeout advances the view and rearms; progress rearms too") {
  EngineFixture f(3);
  f.engine.start();
  f.ctx.advance(msec(999));
  CHECK(f.view_changes.empty());
  f.ctx.advance(msec(2));
  CHECK(f.view_changes.size() == 1);
  CHECK(f.engine.current_view() == 2);
  // progress in view 2 before its deadline: no second view change
  auto p2 = f.make_proposal(2, kZeroDigest);
  f.engine.on_propose(CeProposeBody{p2, genesis_qc()}, PeerId::replica_id(2));
  CHECK(f.engine.current_view() == 3);
  f.ctx.advance(msec(900));
  CHECK(f.view_changes.size() == 1);
}

TEST_CASE("pending ancestor ids cover the uncommitted chain only") {
  EngineFixture f(0);
  f.engine.start();
  auto mb_digest = sha256("payload-id");
  Proposal raw;
  raw.view = 1;
  raw.parent = kZeroDigest;
  raw.proposer = 1;
  raw.payload.emplace_back(mb_digest, AvailabilityProof{mb_digest, {}});
  raw.finalize();
  auto p1 = std::make_shared<const Proposal>(std::move(raw));
  f.engine.on_propose(CeProposeBody{p1, genesis_qc()}, PeerId::replica_id(1));
  auto pending = f.engine.pending_ancestor_ids(p1->id);
  CHECK(pending.count(mb_digest) == 1);
  CHECK(f.engine.pending_ancestor_ids(kZeroDigest).empty());
}
