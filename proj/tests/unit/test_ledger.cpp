#include "doctest.h"

#include <random>

#include "ilpsim/ledger/ledger.hpp"
#include "ilpsim/ledger/service.hpp"

using namespace ilp;
using namespace ilp::ledger;

namespace {

const Timestamp kStart = Timestamp{Duration{1'560'937'381'509}};

struct Fixture {
    std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(kStart);
    std::shared_ptr<Ledger> ledger =
        std::make_shared<Ledger>(LedgerConfig{"XRP", 6, "rGenesis", 100'000'000'000ULL}, clock);
    SigningKey alice = key_from_secret("alice");
    SigningKey bob = key_from_secret("bob");

    Fixture()
    {
        ledger->create_and_fund("rAlice", alice.public_key(), 1'000'000);
        ledger->create_and_fund("rBob", bob.public_key(), 1'000'000);
    }
};

}  // namespace

TEST_SUITE("ledger")
{
TEST_CASE("accounts derived from a bare secret")
{
    // Independently computed: last 20 bytes of SHA-256 over the Ed25519
    // public key whose seed is SHA-256 of the secret.
    CHECK(account_from_secret("bob-eth-secret") == "0x6e5f5a34ed85a598c9c220314f2a4d303246ff96");
    CHECK(account_from_secret("owner-eth-secret") == "0xc4ec71da3fc36eada0bae660ad52a86b97c2d1ce");
}

TEST_CASE("channel lifecycle")
{
    Fixture f;
    auto ch = f.ledger->open_channel("rAlice", "rBob", 300'000, 3600, f.alice.public_key());
    CHECK(f.ledger->account("rAlice")->balance == 700'000);
    CHECK(ch.escrow() == 300'000);

    auto c1 = Claim::sign(ch.id, 100'000, f.alice);
    CHECK(f.ledger->verify_claim(c1));
    CHECK(f.ledger->redeem_claim(c1).credited == 100'000);
    CHECK(f.ledger->redeem_claim(c1).stale);
    CHECK(f.ledger->account("rBob")->balance == 1'100'000);

    // A claim above the channel size is never valid.
    CHECK_FALSE(f.ledger->verify_claim(Claim::sign(ch.id, 300'001, f.alice)));
    // Signed by the wrong key.
    CHECK_FALSE(f.ledger->verify_claim(Claim::sign(ch.id, 200'000, f.bob)));

    auto r = f.ledger->close_channel(ch.id, "rAlice");
    CHECK(r.state == ChannelState::Closing);
    CHECK(f.ledger->conserved());
    f.clock->advance(Duration{3'599'000});
    CHECK(f.ledger->channel(ch.id)->state == ChannelState::Closing);
    // The payee can still redeem while the channel is closing.
    CHECK(f.ledger->redeem_claim(Claim::sign(ch.id, 150'000, f.alice)).credited == 50'000);
    f.clock->advance(Duration{1000});
    CHECK(f.ledger->finalize_expired() == 1);
    CHECK(f.ledger->channel(ch.id)->state == ChannelState::Closed);
    CHECK(f.ledger->account("rAlice")->balance == 850'000);
    CHECK(f.ledger->conserved());
    CHECK_THROWS_AS(f.ledger->redeem_claim(c1), LedgerError);
}

TEST_CASE("payee close is immediate")
{
    Fixture f;
    auto ch = f.ledger->open_channel("rAlice", "rBob", 10, 3600, f.alice.public_key());
    f.ledger->redeem_claim(Claim::sign(ch.id, 4, f.alice));
    auto r = f.ledger->close_channel(ch.id, "rBob");
    CHECK(r.state == ChannelState::Closed);
    CHECK(r.payer_refunded == 6);
    CHECK_THROWS_AS(f.ledger->close_channel(ch.id, "rBob"), LedgerError);
}

TEST_CASE("errors")
{
    Fixture f;
    auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const LedgerError& e) {
            return std::optional(e.code());
        }
        return std::optional<LedgerErrc>();
    };
    CHECK(code([&] { f.ledger->create_and_fund("rAlice", f.alice.public_key(), 1); }) == LedgerErrc::DuplicateAccount);
    CHECK(code([&] { f.ledger->transfer("rAlice", "rBob", 2'000'000); }) == LedgerErrc::InsufficientFunds);
    CHECK(code([&] { f.ledger->transfer("rAlice", "rNobody", 1); }) == LedgerErrc::UnknownAccount);
    CHECK(code([&] { f.ledger->create_and_fund("rRich", f.alice.public_key(), 200'000'000'000ULL); }) ==
          LedgerErrc::InsufficientGenesis);
    CHECK(code([&] { f.ledger->close_channel(ChannelId{}, "rAlice"); }) == LedgerErrc::UnknownChannel);
    auto ch = f.ledger->open_channel("rAlice", "rBob", 10, 0, f.alice.public_key());
    CHECK(code([&] { f.ledger->close_channel(ch.id, "rGenesis"); }) == LedgerErrc::NotPermitted);
    CHECK(code([&] { f.ledger->redeem_claim(Claim::sign(ch.id, 5, f.bob)); }) == LedgerErrc::InvalidClaim);
    CHECK_THROWS_AS(Ledger(LedgerConfig{"XRP", 20, "g", 1}, f.clock), LedgerError);
    CHECK_THROWS_AS(Ledger(LedgerConfig{"XRP", 6, "g", 0}, f.clock), LedgerError);
}

TEST_CASE("conservation holds across random operation sequences")
{
    std::mt19937_64 g(99);
    for (int run = 0; run < 20; ++run) {
        Fixture f;
        std::vector<std::pair<ChannelId, const SigningKey*>> chans;
        std::map<ChannelId, std::uint64_t> last_balance;
        const std::uint64_t genesis = f.ledger->config().genesis_balance;
        for (int step = 0; step < 300; ++step) {
            const bool from_alice = g() % 2;
            const AccountId src = from_alice ? "rAlice" : "rBob";
            const AccountId dst = from_alice ? "rBob" : "rAlice";
            try {
                switch (g() % 6) {
                case 0: f.ledger->transfer(src, dst, g() % 50'000); break;
                case 1: {
                    auto ch = f.ledger->open_channel(src, dst, g() % 100'000, static_cast<std::uint32_t>(g() % 3),
                                                     from_alice ? f.alice.public_key() : f.bob.public_key());
                    chans.emplace_back(ch.id, from_alice ? &f.alice : &f.bob);
                    break;
                }
                case 2:
                    if (!chans.empty()) {
                        auto& [id, key] = chans[g() % chans.size()];
                        auto ch = *f.ledger->channel(id);
                        f.ledger->redeem_claim(Claim::sign(id, g() % (ch.amount + 1), *key));
                    }
                    break;
                case 3:
                    if (!chans.empty()) {
                        auto& [id, key] = chans[g() % chans.size()];
                        f.ledger->close_channel(id, g() % 2 ? f.ledger->channel(id)->account
                                                            : f.ledger->channel(id)->destination);
                    }
                    break;
                case 4:
                    if (!chans.empty()) f.ledger->fund_channel(chans[g() % chans.size()].first, g() % 10'000);
                    break;
                default: f.clock->advance(Duration{static_cast<std::int64_t>(g() % 2000)}); break;
                }
            } catch (const LedgerError&) {
            }
            REQUIRE(f.ledger->total_supply() == genesis);
            for (const auto& ch : f.ledger->channels()) {
                REQUIRE(ch.balance <= ch.amount);
                REQUIRE(ch.balance >= last_balance[ch.id]);
                last_balance[ch.id] = ch.balance;
            }
        }
    }
}

TEST_CASE("claim verification rejects any single bit flip")
{
    Fixture f;
    auto ch = f.ledger->open_channel("rAlice", "rBob", 500'000, 3600, f.alice.public_key());
    const auto claim = Claim::sign(ch.id, 123'456, f.alice);
    const Bytes wire = claim.encode();
    REQUIRE(wire.size() == 104);
    CHECK(Claim::decode(wire) == claim);
    std::mt19937_64 g(1);
    int rejected = 0;
    for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
        Bytes t = wire;
        t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        // A flipped channel id names no channel at all.
        try {
            if (!f.ledger->verify_claim(Claim::decode(t))) ++rejected;
        } catch (const LedgerError& e) {
            if (e.code() == LedgerErrc::UnknownChannel) ++rejected;
        }
    }
    CHECK(rejected == static_cast<int>(wire.size() * 8));
    CHECK_THROWS_AS(Claim::decode(ByteView(wire).first(103)), std::invalid_argument);
}

TEST_CASE("corrupting a balance breaks conservation")
{
    Fixture f;
    CHECK(f.ledger->conserved());
    f.ledger->corrupt_balance_for_testing("rBob", 1);
    CHECK_FALSE(f.ledger->conserved());
}

TEST_CASE("http service mirrors the in-process ledger")
{
    auto clock = std::make_shared<ManualClock>(kStart);
    auto boot = LedgerBootstrap::from_json(nlohmann::json{{"name", "xrp"},
                                                          {"asset_code", "XRP"},
                                                          {"asset_scale", 6},
                                                          {"genesis_account", "rGenesis"},
                                                          {"genesis_balance", 1'000'000},
                                                          {"accounts",
                                                           {{{"account_id", "rAlice"},
                                                             {"secret", "alice"},
                                                             {"balance", 1000}},
                                                            {{"account_id", "rBob"}, {"secret", "bob"}, {"balance", 10}}}}});
    auto ledger = boot.instantiate(clock);
    LedgerServer server(ledger, "127.0.0.1", 0);
    const auto port = server.start();
    RemoteLedger remote("http://127.0.0.1:" + std::to_string(port));

    CHECK(remote.config().asset_code == "XRP");
    CHECK(remote.account("rAlice")->balance == 1000);
    auto key = key_from_secret("alice");
    auto ch = remote.open_channel("rAlice", "rBob", 400, 60, key.public_key());
    CHECK(ledger->channel(ch.id)->amount == 400);
    CHECK(remote.redeem_claim(Claim::sign(ch.id, 150, key)).credited == 150);
    CHECK(ledger->account("rBob")->balance == 160);
    CHECK(remote.channels().size() == 1);
    CHECK(remote.channels()[0].balance == 150);
    CHECK(remote.accounts().size() == ledger->accounts().size());
    try {
        remote.transfer("rBob", "rAlice", 5000);
        FAIL("expected LedgerError");
    } catch (const LedgerError& e) {
        CHECK(e.code() == LedgerErrc::InsufficientFunds);
    }
    CHECK(ledger->conserved());
    server.stop();

    RemoteLedger dead("http://127.0.0.1:" + std::to_string(port));
    try {
        dead.config();
        FAIL("expected LedgerError");
    } catch (const LedgerError& e) {
        CHECK(e.code() == LedgerErrc::Unavailable);
    }
}
}
