#include <doctest.h>

#include "annotis/align.hpp"
#include "annotis/text.hpp"
#include "test_support.hpp"

using namespace annotis;
using namespace annotis::testing;

TEST_CASE("align_span finds exact token-bounded occurrences") {
  std::string sentence = "Advocates were centered at MIT , under Marvin Minsky .";
  auto hit = align_span(sentence, "MIT");
  REQUIRE(hit.has_value());
  CHECK(sentence.substr(hit->first, hit->second - hit->first) == "MIT");

  auto two_tokens = align_span(sentence, "Marvin Minsky");
  REQUIRE(two_tokens.has_value());
  CHECK(sentence.substr(two_tokens->first, two_tokens->second - two_tokens->first) ==
        "Marvin Minsky");
}

TEST_CASE("align_span falls back to case-insensitive matching") {
  std::string sentence = "the programming language Python is popular";
  auto hit = align_span(sentence, "python");
  REQUIRE(hit.has_value());
  CHECK(sentence.substr(hit->first, hit->second - hit->first) == "Python");
}

TEST_CASE("align_span strips surrounding punctuation on retry") {
  std::string sentence = "Advocates at MIT , and elsewhere";
  auto hit = align_span(sentence, "MIT,");
  REQUIRE(hit.has_value());
  CHECK(sentence.substr(hit->first, hit->second - hit->first) == "MIT");
}

TEST_CASE("align_span rejects matches off token boundaries") {
  // "learning model" occurs inside "learning models" but does not end on a
  // token boundary; the token-boundary oracle over the tokenization agrees.
  std::string sentence = "deep learning models";
  auto tokens = tokenize(sentence);
  bool oracle_boundary = false;
  std::string needle = "learning model";
  auto pos = sentence.find(needle);
  REQUIRE(pos != std::string::npos);
  for (const auto& a : tokens) {
    for (const auto& b : tokens) {
      if (a.start == pos && b.end == pos + needle.size()) oracle_boundary = true;
    }
  }
  CHECK_FALSE(oracle_boundary);
  CHECK_FALSE(align_span(sentence, needle).has_value());
}

TEST_CASE("align_span picks the leftmost valid occurrence") {
  std::string sentence = "alpha beta alpha beta";
  auto hit = align_span(sentence, "beta");
  REQUIRE(hit.has_value());
  CHECK(hit->first == 6);

  CHECK_FALSE(align_span(sentence, "gamma").has_value());
  CHECK_FALSE(align_span(sentence, "").has_value());
}

TEST_CASE("align_span agrees with a substring oracle on random token data") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> tokens;
    std::size_t n = 3 + rng.below(8);
    for (std::size_t k = 0; k < n; ++k) tokens.push_back(random_word(rng, k));
    std::string sentence;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) sentence += " ";
      sentence += tokens[k];
    }
    std::size_t pick = rng.below(n);
    std::size_t len = 1 + rng.below(std::min<std::size_t>(2, n - pick));
    std::string surface = tokens[pick];
    for (std::size_t k = 1; k < len; ++k) surface += " " + tokens[pick + k];

    auto hit = align_span(sentence, surface);
    REQUIRE(hit.has_value());
    CHECK(sentence.substr(hit->first, hit->second - hit->first) == surface);
    CHECK(hit->first == sentence.find(surface));  // leftmost
  }
}

TEST_CASE("align_token_sequence maps surfaces to contiguous indices") {
  auto tokens = tokenize("The biggest problem is that the box had no instructions in it .");
  auto idx = align_token_sequence(tokens, "instructions");
  REQUIRE(idx.has_value());
  CHECK(*idx == std::vector<std::size_t>{9});

  auto multi = align_token_sequence(tokens, "biggest problem");
  REQUIRE(multi.has_value());
  CHECK(*multi == std::vector<std::size_t>{1, 2});

  auto folded = align_token_sequence(tokens, "BOX");
  REQUIRE(folded.has_value());
  CHECK(*folded == std::vector<std::size_t>{6});

  CHECK_FALSE(align_token_sequence(tokens, "absent thing").has_value());
  CHECK_FALSE(align_token_sequence(tokens, "").has_value());
}
