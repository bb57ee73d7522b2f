#include <doctest.h>

#include <filesystem>

#include "editimpact/errors.hpp"
#include "editimpact/mining.hpp"
#include "editimpact/rng.hpp"
#include "support/oracles.hpp"

using namespace editimpact;

namespace {

Transaction tx(std::initializer_list<std::string> items) { return Transaction(items); }

std::vector<Transaction> random_transactions(Rng& rng, std::size_t max_tx, std::size_t max_items) {
  const std::size_t n_tx = 1 + rng.next_below(max_tx);
  const std::size_t n_items = 1 + rng.next_below(max_items);
  std::vector<Transaction> ts(n_tx);
  for (auto& t : ts) {
    const std::size_t size = rng.next_below(n_items + 1);
    for (std::size_t k = 0; k < size; ++k)
      t.insert("~it" + std::to_string(rng.next_below(n_items)));
  }
  return ts;
}

MiningConfig loose_config() {
  MiningConfig config;
  config.min_item_freq = 1;
  config.min_cooccurrence = 1;
  config.min_confidence = 0.0;
  config.min_lift = 0.0;
  config.min_pair_jaccard = 0.0;
  config.word_jaccard_filter = 1.1;  // effectively off
  return config;
}

}  // namespace

TEST_CASE("item keys carry the operation marker and normalized text") {
  Edit sub;
  sub.op = EditOp::Substitute;
  sub.src_text = "Finish";
  sub.tgt_text = "Finished";
  CHECK(item_key(sub, Language::En) == "~finished");

  Edit ins;
  ins.op = EditOp::Insert;
  ins.tgt_text = "For";
  CHECK(item_key(ins, Language::En) == "+for");

  Edit del;
  del.op = EditOp::Delete;
  del.src_text = "The";
  CHECK(item_key(del, Language::En) == "-the");

  // Normalization is idempotent and skips Chinese.
  CHECK(normalize_item_text(normalize_item_text("ABC", Language::En), Language::En) == "abc");
  CHECK(normalize_item_text("喜欢", Language::Zh) == "喜欢");
}

TEST_CASE("build_transactions keys one transaction per pair") {
  Corpus corpus;
  SentencePair worked;
  worked.id = "x1";
  worked.language = Language::En;
  worked.source = tokenize("I have finish my task .", Language::En);
  worked.target = tokenize("I have finished my homework .", Language::En);
  corpus.push_back(worked);

  SentencePair identical;
  identical.id = "x2";
  identical.language = Language::En;
  identical.source = tokenize("all good .", Language::En);
  identical.target = identical.source;
  corpus.push_back(identical);

  // Two edits that normalize to the same key collapse to one item.
  SentencePair same_key;
  same_key.id = "x3";
  same_key.language = Language::En;
  same_key.source = tokenize("x c x c", Language::En);
  same_key.target = tokenize("y c y c", Language::En);
  corpus.push_back(same_key);

  const auto ts = build_transactions(corpus);
  REQUIRE(ts.size() == 3);
  CHECK(ts[0] == tx({"~finished", "~homework"}));
  CHECK(ts[1].empty());
  CHECK(ts[2] == tx({"~y"}));
}

TEST_CASE("mine_pairs rejects the hand-counted low-lift pair") {
  // T = [{a,b},{a,b},{a},{b,c}]: J=0.5, Conf=2/3, Lift=8/9 < 1.1.
  const std::vector<Transaction> ts = {tx({"~a", "~b"}), tx({"~a", "~b"}), tx({"~a"}),
                                       tx({"~b", "~c"})};
  MiningConfig config;
  config.min_item_freq = 2;
  const MinedAssociations mined = mine_pairs(ts, config);
  CHECK(mined.rules.empty());

  // The stats themselves are still computed as hand-counted.
  MiningConfig loose = loose_config();
  loose.min_item_freq = 2;
  const MinedAssociations all = mine_pairs(ts, loose);
  REQUIRE(all.rules.size() == 1);
  CHECK(all.rules[0].item_a == "~a");
  CHECK(all.rules[0].item_b == "~b");
  CHECK(all.rules[0].stats.jaccard == doctest::Approx(0.5));
  CHECK(all.rules[0].stats.confidence == doctest::Approx(2.0 / 3.0));
  CHECK(all.rules[0].stats.lift == doctest::Approx(8.0 / 9.0));
}

TEST_CASE("mine_pairs accepts the hand-counted high-lift pair") {
  // T = [{a,b},{a,b},{c}]: J=1, Conf=1, Lift=1.5.
  const std::vector<Transaction> ts = {tx({"~a", "~b"}), tx({"~a", "~b"}), tx({"~c"})};
  MiningConfig config;
  config.min_item_freq = 2;
  config.min_cooccurrence = 2;
  const MinedAssociations mined = mine_pairs(ts, config);
  REQUIRE(mined.rules.size() == 1);
  CHECK(mined.rules[0].stats.jaccard == doctest::Approx(1.0));
  CHECK(mined.rules[0].stats.confidence == doctest::Approx(1.0));
  CHECK(mined.rules[0].stats.lift == doctest::Approx(1.5));
  CHECK(mined.rules[0].stats.co_count == 2);
}

TEST_CASE("items below the frequency threshold generate no candidates") {
  const std::vector<Transaction> ts = {tx({"~a", "~b"})};
  MiningConfig config;
  config.min_item_freq = 2;
  CHECK(mine_pairs(ts, config).rules.empty());
}

TEST_CASE("mine_pairs rejects an empty transaction list") {
  CHECK_THROWS_AS(mine_pairs({}, MiningConfig{}), DataError);
}

TEST_CASE("lift is exactly 1 under independence") {
  // a in {t1,t2}, b in {t1,t3}: co=1, ca=cb=2, |T|=4 -> lift = 4/4 = 1.
  const std::vector<Transaction> ts = {tx({"~a", "~b"}), tx({"~a"}), tx({"~b"}), tx({})};
  MiningConfig loose = loose_config();
  const MinedAssociations mined = mine_pairs(ts, loose);
  REQUIRE(mined.rules.size() == 1);
  CHECK(mined.rules[0].stats.lift == 1.0);
}

TEST_CASE("near-duplicate key texts are filtered by bigram similarity") {
  CHECK(text_similarity("look", "look") == 1.0);
  CHECK(text_similarity("look", "looks") >= 0.6);
  CHECK(text_similarity("a", "b") == 0.0);
  CHECK(text_similarity("look", "for") < 0.6);

  const std::vector<Transaction> ts = {tx({"~look", "~looks"}), tx({"~look", "~looks"}),
                                       tx({"~look", "~looks"})};
  MiningConfig loose = loose_config();
  loose.word_jaccard_filter = 0.6;
  CHECK(mine_pairs(ts, loose).rules.empty());
}

TEST_CASE("mined statistics match the exhaustive counting oracle") {
  Rng rng(1234);
  for (int corpus_idx = 0; corpus_idx < 40; ++corpus_idx) {
    const auto ts = random_transactions(rng, 50, 10);
    MiningConfig config;
    config.min_item_freq = 1 + rng.next_below(4);
    config.min_cooccurrence = 1 + rng.next_below(3);
    config.min_pair_jaccard = rng.next_double() * 0.3;
    config.min_confidence = rng.next_double() * 0.4;
    config.min_lift = 0.5 + rng.next_double();
    const auto expected = oracles::mine_brute(ts, config);
    const auto got = mine_pairs(ts, config).rules;
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].item_a == expected[i].a);
      CHECK(got[i].item_b == expected[i].b);
      CHECK(got[i].stats.co_count == expected[i].co);
      CHECK(got[i].stats.count_a == expected[i].ca);
      CHECK(got[i].stats.count_b == expected[i].cb);
      CHECK(got[i].stats.jaccard == expected[i].jaccard);
      CHECK(got[i].stats.confidence == expected[i].confidence);
      CHECK(got[i].stats.lift == expected[i].lift);
    }
  }
}

TEST_CASE("raising any threshold never adds accepted pairs") {
  Rng rng(555);
  for (int corpus_idx = 0; corpus_idx < 20; ++corpus_idx) {
    const auto ts = random_transactions(rng, 30, 8);
    MiningConfig base = loose_config();
    base.min_item_freq = 2;
    base.min_cooccurrence = 1;
    const auto base_rules = mine_pairs(ts, base).rules;
    auto key_set = [](const std::vector<AssociationRule>& rules) {
      std::set<std::pair<std::string, std::string>> keys;
      for (const auto& r : rules) keys.insert({r.item_a, r.item_b});
      return keys;
    };
    const auto base_keys = key_set(base_rules);

    for (int variant = 0; variant < 5; ++variant) {
      MiningConfig stricter = base;
      switch (variant) {
        case 0: stricter.min_item_freq += 1 + rng.next_below(2); break;
        case 1: stricter.min_cooccurrence += 1; break;
        case 2: stricter.min_pair_jaccard += 0.2; break;
        case 3: stricter.min_confidence += 0.2; break;
        default: stricter.min_lift += 0.5; break;
      }
      const auto strict_keys = key_set(mine_pairs(ts, stricter).rules);
      for (const auto& key : strict_keys) CHECK(base_keys.count(key) == 1);
    }
  }
}

TEST_CASE("jaccard stays within [0,1] and output ordering is deterministic") {
  Rng rng(9);
  for (int corpus_idx = 0; corpus_idx < 20; ++corpus_idx) {
    const auto ts = random_transactions(rng, 40, 9);
    const auto mined = mine_pairs(ts, loose_config());
    double prev = 2.0;
    for (const auto& r : mined.rules) {
      CHECK(r.stats.jaccard >= 0.0);
      CHECK(r.stats.jaccard <= 1.0);
      CHECK(r.stats.jaccard <= prev);
      prev = r.stats.jaccard;
      CHECK(r.item_a < r.item_b);
    }
  }
}

TEST_CASE("association files round trip") {
  const std::vector<Transaction> ts = {tx({"~a", "~b"}), tx({"~a", "~b"}), tx({"~c"})};
  MiningConfig config;
  config.min_item_freq = 2;
  const MinedAssociations mined = mine_pairs(ts, config);
  const auto path = std::filesystem::temp_directory_path() / "ei_mined.jsonl";
  write_mined(path.string(), mined);
  const auto loaded = load_mined(path.string());
  REQUIRE(loaded.size() == mined.rules.size());
  CHECK(loaded[0].item_a == mined.rules[0].item_a);
  CHECK(loaded[0].stats.lift == mined.rules[0].stats.lift);
}
