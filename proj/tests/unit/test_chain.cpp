#include <filesystem>

#include "doctest.h"
#include "fake_chain.hpp"
#include "sentinel/chain/client.hpp"
#include "sentinel/common/keccak.hpp"
#include "sentinel/common/text.hpp"

using namespace sentinel;
using namespace sentinel::chain;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "sentinel-tests";
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::filesystem::remove(p);
  return p.string();
}

class DeadTransport : public Transport {
 public:
  int calls = 0;
  TransportResponse call(const std::string&, const Json&) override {
    ++calls;
    throw TransportError("connection refused");
  }
};

Address creator(std::uint8_t n) {
  Address a;
  a.bytes[19] = n;
  return a;
}

}  // namespace

TEST_CASE("snapshot store persists and replays") {
  const auto path = temp_path("store.jsonl");
  auto fake = std::make_shared<testing::FakeChain>();
  fake->add_block(5, 1000);
  {
    auto store = std::make_shared<SnapshotStore>(path);
    SnapshotTransport rec(Mode::Record, store, fake);
    ChainClient c(rec);
    CHECK(c.block_number() == 5);
    CHECK(c.block_number() == 5);
    CHECK(rec.upstream_calls() == 1);
  }
  auto store = std::make_shared<SnapshotStore>(path);
  CHECK(store->size() == 1);
  SnapshotTransport replay(Mode::Replay, store);
  ChainClient c(replay);
  CHECK(c.block_number() == 5);
  CHECK_THROWS_AS(c.get_block(5), ReplayMiss);
}

TEST_CASE("request keys are canonical") {
  const auto a = Json::parse(R"({"b":1,"a":[1,2]})");
  const auto b = Json::parse(R"({"a":[1,2],"b":1})");
  CHECK(request_key("rpc", a) == request_key("rpc", b));
  CHECK(request_key("rpc", a) != request_key("explorer", a));
}

TEST_CASE("monitor emits creations in block and index order") {
  testing::FakeChain fake;
  fake.add_block(10, 100);
  fake.add_block(11, 112);
  Transaction plain;
  plain.from = creator(1);
  plain.to = creator(2);
  fake.add_transaction(10, plain, 21000);  // normal transfer: no event
  Transaction c1;
  c1.from = creator(3);
  c1.input = Bytes{0x60, 0x00};
  Transaction c2 = c1;
  c2.from = creator(4);
  c2.nonce = 7;
  fake.add_transaction(11, c1, 50000, Bytes{0x00});
  fake.add_transaction(11, c2, 60000, Bytes{0x00});
  ChainClient client(fake);
  std::vector<MonitorItem> items;
  BlockMonitor mon(client, {.from_block = 10});
  mon.run([&](const MonitorItem& it) {
    items.push_back(it);
    return true;
  });
  REQUIRE(items.size() == 2);
  CHECK(items[0].event->creator == creator(3));
  CHECK(items[0].event->tx_index == 0);
  CHECK(items[1].event->tx_index == 1);
  CHECK(items[1].event->contract_address == create_address(creator(4), 7));
  CHECK(items[1].event->gas_used == 60000);
  CHECK(items[1].event->block_timestamp == 112);
}

TEST_CASE("monitor retries, then reports a missing block and continues") {
  testing::FakeChain fake;
  for (std::uint64_t n = 1; n <= 3; ++n) fake.add_block(n, 100 + n);
  Transaction c;
  c.from = creator(9);
  fake.add_transaction(3, c, 1, Bytes{0x00});
  fake.fail_block(1, 2);
  fake.drop_block(2);
  ChainClient client(fake);
  std::vector<std::chrono::milliseconds> sleeps;
  MonitorOptions opts;
  opts.from_block = 1;
  opts.to_block = 3;
  opts.max_retries = 3;
  opts.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  std::vector<MonitorItem> items;
  BlockMonitor(client, opts).run([&](const MonitorItem& it) {
    items.push_back(it);
    return true;
  });
  REQUIRE(items.size() == 2);
  CHECK(items[0].error.has_value());
  CHECK(items[0].block_number == 2);
  CHECK(items[1].event.has_value());
  // Block 1: two failures then success. Block 2: three retries, then give up.
  CHECK(sleeps.size() == 5);
  CHECK(sleeps[0] == std::chrono::milliseconds(200));
  CHECK(sleeps[1] == std::chrono::milliseconds(400));
  CHECK(sleeps[4] == std::chrono::milliseconds(800));
}

TEST_CASE("empty block yields no events") {
  testing::FakeChain fake;
  fake.add_block(1, 1);
  ChainClient client(fake);
  std::size_t n = BlockMonitor(client, {.from_block = 1}).run([](const MonitorItem&) { return true; });
  CHECK(n == 0);
}

TEST_CASE("verification status") {
  testing::FakeChain fake;
  fake.set_verified(creator(1), "Vault");
  const auto yes = get_verification_status(fake, creator(1));
  CHECK(yes.verified);
  CHECK(yes.contract_name == "Vault");
  CHECK_FALSE(get_verification_status(fake, creator(2)).verified);

  DeadTransport dead;
  const auto down = get_verification_status(dead, creator(1));
  CHECK_FALSE(down.verified);
  CHECK(down.diagnostic.has_value());

  SnapshotTransport replay(Mode::Replay, std::make_shared<SnapshotStore>());
  CHECK_THROWS_AS(get_verification_status(replay, creator(1)), ReplayMiss);
}

TEST_CASE("selector resolver") {
  testing::FakeChain fake;
  fake.add_signature("many_msg_babbage(bytes1)");  // same selector as transfer
  fake.add_signature("transfer(address,uint256)");
  fake.add_signature("deposit()");
  pscft::LocalSignatureDB local;
  local.add("approve(address,uint256)");
  SelectorResolver r(local, &fake);
  CHECK(r.resolve(selector_of("approve(address,uint256)")) == "approve(address,uint256)");
  CHECK(r.remote_queries() == 0);
  CHECK(r.resolve(selector_of("deposit()")) == "deposit()");
  CHECK(r.resolve(selector_of("deposit()")) == "deposit()");
  CHECK(r.remote_queries() == 1);
  CHECK(r.resolve(Selector::from_hex("0x01020304")) == std::nullopt);
  CHECK(r.resolve(Selector::from_hex("0x01020304")) == std::nullopt);
  CHECK(r.remote_queries() == 2);
  // Oldest matching submission wins.
  CHECK(r.resolve(Selector::from_hex("0xa9059cbb")) == "many_msg_babbage(bytes1)");

  DeadTransport dead;
  SelectorResolver offline(pscft::LocalSignatureDB{}, &dead);
  CHECK(offline.resolve(Selector::from_hex("0xa9059cbb")) == std::nullopt);
  CHECK(offline.diagnostics().size() == 1);

  SelectorResolver empty(pscft::LocalSignatureDB{}, nullptr);
  CHECK(empty.resolve(Selector::from_hex("0xa9059cbb")) == std::nullopt);
}

TEST_CASE("asset-transfer funding provider") {
  testing::FakeChain fake;
  fake.add_funding(creator(2), creator(1), 50);
  fake.add_funding(creator(3), creator(1), 40);
  AssetTransferFunding p(fake);
  CHECK(p.earliest_incoming_funder(creator(1)) == creator(3));
  CHECK(p.earliest_incoming_funder(creator(9)) == std::nullopt);
  DeadTransport dead;
  AssetTransferFunding broken(dead);
  CHECK_THROWS_AS(broken.earliest_incoming_funder(creator(1)), fundsource::ProviderError);
}

TEST_CASE("benign candidate filter") {
  std::vector<DeploymentEvent> events(3);
  for (std::uint8_t i = 0; i < 3; ++i) {
    events[i].contract_address = creator(100 + i);
    events[i].block_timestamp = 1000;
  }
  FixtureCallerHistory history;
  history.add(creator(100), creator(1), 1001);  // one caller
  for (std::uint8_t c = 0; c < 10; ++c) history.add(creator(101), creator(c), 1100);
  for (int c = 0; c < 500; ++c) history.add(creator(102), creator(static_cast<std::uint8_t>(c % 250)), 1100 + c);
  history.add(creator(101), creator(50), 999999999);  // outside the window
  const auto is_token = [](const DeploymentEvent& e) { return e.contract_address == creator(102); };
  const auto kept = build_benign_candidates(events, history, is_token);
  CHECK(kept == std::vector<Address>{creator(101)});

  BenignCandidateOptions strict;
  strict.min_unique_callers = 11;
  CHECK(build_benign_candidates(events, history, is_token, strict).empty());
}

TEST_CASE("scenario replay is identical to the live run") {
  const auto path = temp_path("scenario.jsonl");
  auto fake = std::make_shared<testing::FakeChain>();
  const auto sc = testing::populate_scenario(*fake, 3);
  auto collect = [&](Transport& t) {
    ChainClient client(t);
    std::vector<std::string> lines;
    BlockMonitor(client, {.from_block = sc.first_block}).run([&](const MonitorItem& it) {
      lines.push_back(it.event ? it.event->contract_address.hex() + "@" + std::to_string(it.event->tx_index) : *it.error);
      return true;
    });
    return lines;
  };
  auto store = std::make_shared<SnapshotStore>(path);
  SnapshotTransport rec(Mode::Record, store, fake);
  const auto live = collect(rec);
  CHECK(live.size() == sc.creation_txs.size());
  SnapshotTransport replay(Mode::Replay, std::make_shared<SnapshotStore>(path));
  CHECK(collect(replay) == live);
}
