#include <doctest.h>

#include <map>
#include <vector>

#include "stratus/mempool.hpp"
#include "test_support.hpp"

using namespace stratus;
using stratus::testing::TestContext;

namespace {

struct PoolFixture {
  ProtocolParams params;
  MacScheme scheme{5, 4};
  TestContext ctx{0, 4};
  std::vector<MicroblockPtr> sealed;
  std::vector<Digest> fetches;
  std::vector<ProposalPtr> filled;
  std::vector<std::string> executed_txs;
  Mempool pool;

  explicit PoolFixture(MempoolMode mode = MempoolMode::Stratus)
      : params(make_params()), pool(0, mode, params, scheme, ctx, hooks()) {}

  static ProtocolParams make_params() {
    ProtocolParams p;
    p.n_replicas = 4;
    p.f = 1;
    p.q = 2;
    p.batch_size_bytes = 256'000;
    p.batch_timeout = msec(200);
    return p;
  }

  Mempool::Hooks hooks() {
    Mempool::Hooks h;
    h.new_microblock = [this](const MicroblockPtr& mb) { sealed.push_back(mb); };
    h.fetch_missing = [this](const Digest& id, ReplicaId) { fetches.push_back(id); };
    h.fill_complete = [this](const ProposalPtr& p) { filled.push_back(p); };
    h.tx_executed = [this](const Transaction& tx, SimTime) { executed_txs.push_back(tx.id); };
    return h;
  }

  Transaction tx(const std::string& id, std::uint32_t bytes = 128) {
    Transaction t;
    t.id = id;
    t.payload_bytes = bytes;
    t.arrival_time = ctx.now();
    t.origin = 0;
    return t;
  }

  MicroblockPtr make_mb(const std::string& tag) {
    return make_microblock({tx(tag)}, 1, ctx.now());
  }

  AvailabilityProof proof_for(const Digest& id) {
    return AvailabilityProof{id, {scheme.sign(0, id), scheme.sign(1, id)}};
  }

  ProposalPtr proposal_with(std::initializer_list<MicroblockPtr> mbs, View v = 1) {
    Proposal p;
    p.view = v;
    p.proposer = 1;
    for (const auto& mb : mbs) p.payload.emplace_back(mb->id, proof_for(mb->id));
    p.finalize();
    return std::make_shared<const Proposal>(std::move(p));
  }
};

}  // namespace

TEST_CASE("a 256 KB batch of 128-byte txs seals at exactly 2000 txs") {
  PoolFixture f;
  for (int i = 0; i < 1999; ++i) f.pool.receive_tx(f.tx("t" + std::to_string(i)));
  CHECK(f.sealed.empty());
  f.pool.receive_tx(f.tx("t1999"));
  REQUIRE(f.sealed.size() == 1);
  CHECK(f.sealed[0]->txs.size() == 2000);
  CHECK(f.sealed[0]->payload_bytes() == 256'000);
}

TEST_CASE("a lone tx seals on the 200ms batch timeout") {
  PoolFixture f;
  f.pool.receive_tx(f.tx("only"));
  CHECK(f.sealed.empty());
  f.ctx.advance(msec(199));
  CHECK(f.sealed.empty());
  f.ctx.advance(msec(2));
  REQUIRE(f.sealed.size() == 1);
  CHECK(f.sealed[0]->txs.size() == 1);
}

TEST_CASE("duplicate tx ids are dropped and counted") {
  PoolFixture f;
  f.pool.receive_tx(f.tx("dup"));
  f.pool.receive_tx(f.tx("dup"));
  CHECK(f.pool.duplicate_txs_dropped == 1);
  f.ctx.advance(msec(250));
  REQUIRE(f.sealed.size() == 1);
  CHECK(f.sealed[0]->txs.size() == 1);
}

TEST_CASE("proofs enter pMap/avaQue once; re-proofs leave the queue unchanged") {
  PoolFixture f;
  auto a = f.make_mb("a");
  f.pool.on_proven(a->id, f.proof_for(a->id));
  CHECK(f.pool.ava_queue_size() == 1);
  f.pool.on_proven(a->id, f.proof_for(a->id));
  CHECK(f.pool.ava_queue_size() == 1);
  CHECK(f.pool.has_proof(a->id));
}

TEST_CASE("avaQue pops FIFO into proposals, bounded by block_size") {
  PoolFixture f;
  f.params.block_size = 2;
  auto a = f.make_mb("a");
  auto b = f.make_mb("b");
  auto c = f.make_mb("c");
  for (const auto& mb : {a, b, c}) f.pool.on_proven(mb->id, f.proof_for(mb->id));

  Proposal p = f.pool.make_proposal(1, kZeroDigest, {}, {});
  REQUIRE(p.payload.size() == 2);
  CHECK(p.payload[0].first == a->id);
  CHECK(p.payload[1].first == b->id);
  CHECK(f.pool.ava_queue_size() == 1);
  CHECK(f.pool.in_ava_queue(c->id));

  SUBCASE("queue exhaustion returns a short payload") {
    Proposal p2 = f.pool.make_proposal(2, kZeroDigest, {}, {});
    CHECK(p2.payload.size() == 1);
    CHECK(p2.payload[0].first == c->id);
  }
  SUBCASE("empty queue gives an empty proposal") {
    (void)f.pool.make_proposal(2, kZeroDigest, {}, {});
    Proposal p3 = f.pool.make_proposal(3, kZeroDigest, {}, {});
    CHECK(p3.payload.empty());
  }
}

TEST_CASE("ids pending in uncommitted ancestors are deferred, not lost") {
  PoolFixture f;
  auto a = f.make_mb("a");
  auto b = f.make_mb("b");
  f.pool.on_proven(a->id, f.proof_for(a->id));
  f.pool.on_proven(b->id, f.proof_for(b->id));
  Proposal p = f.pool.make_proposal(1, kZeroDigest, {a->id}, {});
  REQUIRE(p.payload.size() == 1);
  CHECK(p.payload[0].first == b->id);
  CHECK(f.pool.in_ava_queue(a->id));  // still queued for a later view
}

TEST_CASE("proposal verification gates on proof quorums") {
  PoolFixture f;
  auto a = f.make_mb("a");

  SUBCASE("valid proofs, missing content: EnterCommit now, fetch in background") {
    auto p = f.proposal_with({a});
    CHECK(f.pool.on_proposal(p) == ProposalVerdict::EnterCommit);
    CHECK(f.fetches.size() == 1);
    CHECK_FALSE(f.pool.is_filled(p->id));
    // content arrives later -> fill completes
    f.pool.on_deliver(a);
    CHECK(f.pool.is_filled(p->id));
    REQUIRE(f.filled.size() == 1);
  }
  SUBCASE("a q-1 signer proof forces ViewChange") {
    Proposal p;
    p.view = 1;
    p.proposer = 1;
    p.payload.emplace_back(a->id, AvailabilityProof{a->id, {f.scheme.sign(1, a->id)}});
    p.finalize();
    CHECK(f.pool.on_proposal(std::make_shared<const Proposal>(std::move(p))) ==
          ProposalVerdict::ViewChange);
  }
  SUBCASE("empty payload enters commit vacuously") {
    auto p = f.proposal_with({});
    CHECK(f.pool.on_proposal(p) == ProposalVerdict::EnterCommit);
    CHECK(f.pool.is_filled(p->id));
  }
  SUBCASE("all content local completes the fill in the same step") {
    f.pool.on_deliver(a);
    auto p = f.proposal_with({a});
    CHECK(f.pool.on_proposal(p) == ProposalVerdict::EnterCommit);
    CHECK(f.pool.is_filled(p->id));
    CHECK(f.fetches.empty());
  }
}

TEST_CASE("fill removes payload ids from the queue so followers do not re-propose them") {
  PoolFixture f;
  auto a = f.make_mb("a");
  f.pool.on_deliver(a);
  f.pool.on_proven(a->id, f.proof_for(a->id));
  CHECK(f.pool.in_ava_queue(a->id));
  auto p = f.proposal_with({a});
  f.pool.on_proposal(p);
  CHECK_FALSE(f.pool.in_ava_queue(a->id));
}

TEST_CASE("commit prunes maps, records executions in payload order, ignores replays") {
  PoolFixture f;
  auto a = f.make_mb("a");
  auto b = f.make_mb("b");
  f.pool.on_deliver(a);
  f.pool.on_deliver(b);
  f.pool.on_proven(a->id, f.proof_for(a->id));
  f.pool.on_proven(b->id, f.proof_for(b->id));
  auto p = f.proposal_with({a, b});
  f.pool.on_proposal(p);
  f.pool.execute(p);

  CHECK(f.executed_txs == std::vector<std::string>{"a", "b"});
  CHECK(f.pool.mb_map_size() == 0);
  CHECK_FALSE(f.pool.has_proof(a->id));
  CHECK(f.pool.executed(a->id));

  // replayed content and proofs for a GC'd id are ignored
  f.pool.on_deliver(a);
  CHECK(f.pool.mb_map_size() == 0);
  f.pool.on_proven(a->id, f.proof_for(a->id));
  CHECK(f.pool.ava_queue_size() == 0);
}

TEST_CASE("recycling a dead fork re-queues only uncommitted ids") {
  PoolFixture f;
  auto a = f.make_mb("a");
  auto b = f.make_mb("b");
  for (const auto& mb : {a, b}) {
    f.pool.on_deliver(mb);
    f.pool.on_proven(mb->id, f.proof_for(mb->id));
  }
  Proposal built = f.pool.make_proposal(1, kZeroDigest, {}, {});
  REQUIRE(built.payload.size() == 2);
  auto p = std::make_shared<const Proposal>(std::move(built));
  CHECK(f.pool.ava_queue_size() == 0);

  f.pool.recycle(p, {b->id});  // b committed elsewhere meanwhile
  CHECK(f.pool.in_ava_queue(a->id));
  CHECK_FALSE(f.pool.in_ava_queue(b->id));
}

TEST_CASE("native mode buffers raw txs and proposes them directly") {
  PoolFixture f(MempoolMode::Native);
  for (int i = 0; i < 10; ++i) f.pool.receive_tx(f.tx("n" + std::to_string(i)));
  CHECK(f.sealed.empty());  // native never seals microblocks
  Proposal p = f.pool.make_proposal(1, kZeroDigest, {}, {});
  CHECK(p.full_txs.size() == 10);
  CHECK(p.payload.empty());
  auto sp = std::make_shared<const Proposal>(std::move(p));
  CHECK(f.pool.on_proposal(sp) == ProposalVerdict::EnterCommit);
  CHECK(f.pool.is_filled(sp->id));
  f.pool.execute(sp);
  CHECK(f.executed_txs.size() == 10);
}
