#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "editimpact/corpus.hpp"
#include "editimpact/errors.hpp"
#include "editimpact/rng.hpp"
#include "support/oracles.hpp"

using namespace editimpact;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("tokenize splits Latin scripts on whitespace and punctuation") {
  const Sentence de = tokenize("Er fang die Arbeit am .", Language::De);
  CHECK(de.tokens.size() == 6);
  CHECK(de.tokens[1] == "fang");

  CHECK(tokenize("", Language::En).tokens.empty());

  const Sentence punct = tokenize("I have finished my homework.", Language::En);
  CHECK(punct.tokens == std::vector<std::string>{"I", "have", "finished", "my", "homework", "."});
}

TEST_CASE("tokenize is character-level for Chinese") {
  const Sentence zh = tokenize("我喜欢", Language::Zh);  // three codepoints, no spaces
  CHECK(zh.tokens.size() == 3);
  const Sentence spaced = tokenize("我 喜欢", Language::Zh);
  CHECK(spaced.tokens.size() == 3);
}

TEST_CASE("tokenize round trips through joining") {
  Rng rng(11);
  const std::vector<std::string> words = {"alpha", "beta", "gämma", "d,e", ".", "zz9"};
  for (int trial = 0; trial < 50; ++trial) {
    Sentence s;
    s.language = Language::En;
    const std::size_t n = 1 + rng.next_below(8);
    for (std::size_t i = 0; i < n; ++i) {
      std::string w = words[rng.next_below(words.size())];
      s.tokens.push_back(w);
    }
    const Sentence again = tokenize(s.joined(), Language::En);
    CHECK(tokenize(again.joined(), Language::En).tokens == again.tokens);
  }
}

TEST_CASE("load_pairs parses records and preserves order") {
  const std::string path = temp_file(
      "ei_pairs.jsonl",
      R"({"id":"x1","source":"I have finish my task .","target":"I have finished my homework .","lang":"en"})"
      "\n");
  const LoadResult result = load_pairs(path);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].source.tokens.size() == 6);
  CHECK(result.pairs[0].id == "x1");
  CHECK(result.warnings.empty());
}

TEST_CASE("load_pairs on an empty file yields an empty corpus") {
  const std::string path = temp_file("ei_empty.jsonl", "");
  CHECK(load_pairs(path).pairs.empty());
}

TEST_CASE("load_pairs rejects duplicate ids naming the id") {
  const std::string path = temp_file(
      "ei_dup.jsonl",
      R"({"id":"a","source":"x","target":"y","lang":"en"})" "\n"
      R"({"id":"a","source":"p","target":"q","lang":"en"})" "\n");
  CHECK_THROWS_WITH_AS(load_pairs(path), doctest::Contains("\"a\""), DataError);
}

TEST_CASE("load_pairs reports the line number of malformed input") {
  const std::string path = temp_file(
      "ei_bad.jsonl",
      R"({"id":"a","source":"x","target":"y","lang":"en"})" "\n"
      "{not json\n");
  CHECK_THROWS_WITH_AS(load_pairs(path), doctest::Contains(":2"), DataError);
}

TEST_CASE("load_pairs accepts unknown language tags with a warning") {
  const std::string path = temp_file(
      "ei_lang.jsonl", R"({"id":"a","source":"x","target":"y","lang":"fr"})" "\n");
  const LoadResult result = load_pairs(path);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].language == Language::Other);
  REQUIRE(result.warnings.size() == 1);
  CHECK(result.warnings[0].find("fr") != std::string::npos);
}

TEST_CASE("pair files round trip") {
  Corpus corpus;
  for (int i = 0; i < 5; ++i) {
    SentencePair pair;
    pair.id = "p" + std::to_string(i);
    pair.language = i % 2 == 0 ? Language::En : Language::De;
    pair.source = tokenize("a b c " + std::to_string(i), pair.language);
    pair.target = tokenize("a b d " + std::to_string(i), pair.language);
    corpus.push_back(pair);
  }
  const auto path = std::filesystem::temp_directory_path() / "ei_roundtrip.jsonl";
  write_pairs(path.string(), corpus);
  const LoadResult result = load_pairs(path.string());
  REQUIRE(result.pairs.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(result.pairs[i].id == corpus[i].id);
    CHECK(result.pairs[i].language == corpus[i].language);
    CHECK(result.pairs[i].source.tokens == corpus[i].source.tokens);
    CHECK(result.pairs[i].target.tokens == corpus[i].target.tokens);
    CHECK(result.pairs[i].source.raw == corpus[i].source.raw);
  }
}

TEST_CASE("load_conllu reads sent_id keyed blocks and skips ranged lines") {
  const std::string content =
      "# sent_id = s1\n"
      "1\tthe\t_\t_\t_\t_\t2\tdet\t_\t_\n"
      "2\tcat\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "3\tsat\t_\t_\t_\t_\t2\tdep\t_\t_\n"
      "\n"
      "# sent_id = s2\n"
      "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "1.1\tempty\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n";
  const std::string path = temp_file("ei_parse.conllu", content);
  const ParseMap parses = load_conllu(path);
  REQUIRE(parses.size() == 2);
  CHECK(parses.at("s1").head == std::vector<int>{2, 0, 2});
  CHECK(parses.at("s2").head == std::vector<int>{0, 1});
  CHECK(parses.at("s1").relation[1] == "root");
}

TEST_CASE("load_conllu rejects invalid trees naming the sentence") {
  const std::string cycle =
      "# sent_id = bad\n"
      "1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n"
      "2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n";
  CHECK_THROWS_WITH_AS(load_conllu(temp_file("ei_cycle.conllu", cycle)),
                       doctest::Contains("bad"), DataError);

  const std::string two_roots =
      "# sent_id = roots\n"
      "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "2\tb\t_\t_\t_\t_\t0\troot\t_\t_\n";
  CHECK_THROWS_WITH_AS(load_conllu(temp_file("ei_roots.conllu", two_roots)),
                       doctest::Contains("root"), DataError);

  const std::string range =
      "# sent_id = range\n"
      "1\ta\t_\t_\t_\t_\t9\tdep\t_\t_\n";
  CHECK_THROWS_AS(load_conllu(temp_file("ei_range.conllu", range)), DataError);
}

TEST_CASE("validate_tree agrees with a reachability oracle on random heads") {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.next_below(7);
    DependencyTree tree;
    for (std::size_t i = 0; i < n; ++i) {
      tree.head.push_back(static_cast<int>(rng.next_below(n + 1)));
      tree.relation.push_back("dep");
    }
    const bool expected = oracles::tree_valid_brute(tree.head);
    bool accepted = true;
    try {
      validate_tree(tree, "t");
    } catch (const DataError&) {
      accepted = false;
    }
    CHECK(accepted == expected);
  }
}

TEST_CASE("filter_min_edits keeps pairs at or above the threshold") {
  Corpus corpus;
  const std::vector<std::size_t> edit_counts = {1, 3, 3, 4, 0};
  for (std::size_t i = 0; i < edit_counts.size(); ++i) {
    SentencePair pair;
    pair.id = "p" + std::to_string(i);
    corpus.push_back(pair);
  }
  auto counter = [&](const SentencePair& p) {
    return edit_counts[static_cast<std::size_t>(p.id[1] - '0')];
  };
  const Corpus kept = filter_min_edits(corpus, counter, 3);
  CHECK(kept.size() == 3);

  // Idempotence and monotonicity in n.
  CHECK(filter_min_edits(kept, counter, 3).size() == kept.size());
  std::size_t prev = corpus.size();
  for (std::size_t n = 1; n <= 5; ++n) {
    const std::size_t now = filter_min_edits(corpus, counter, n).size();
    CHECK(now <= prev);
    prev = now;
  }
}

TEST_CASE("corpus_stats averages target lengths and edit counts") {
  SentencePair one;
  one.id = "a";
  one.target = tokenize("t0 t1 t2 t3 t4 t5 t6 t7 t8 t9", Language::En);
  auto fixed_counter = [](const SentencePair&) { return std::size_t{4}; };
  const CorpusStats single = corpus_stats({one}, fixed_counter);
  CHECK(single.sentence_count == 1);
  CHECK(single.avg_len == doctest::Approx(10.0));
  CHECK(single.avg_edits == doctest::Approx(4.0));

  SentencePair two = one;
  two.id = "b";
  two.target = tokenize(
      "t0 t1 t2 t3 t4 t5 t6 t7 t8 t9 t10 t11 t12 t13 t14 t15 t16 t17 t18 t19", Language::En);
  const CorpusStats both = corpus_stats({one, two}, fixed_counter);
  CHECK(both.avg_len == doctest::Approx(15.0));

  // An identity pair has zero edits and contributes zero to the numerator.
  SentencePair same;
  same.id = "c";
  same.source = tokenize("x y", Language::En);
  same.target = same.source;
  auto extract_counter = [](const SentencePair& p) {
    return p.source.tokens == p.target.tokens ? std::size_t{0} : std::size_t{2};
  };
  const CorpusStats with_identity = corpus_stats({one, same}, extract_counter);
  CHECK(with_identity.avg_edits == doctest::Approx(1.0));

  CHECK_THROWS_AS(corpus_stats({}, fixed_counter), DataError);
}
