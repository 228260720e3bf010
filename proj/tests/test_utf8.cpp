#include "doctest.h"
#include "morphtok/rng.hpp"
#include "morphtok/utf8.hpp"

using namespace morphtok;

TEST_CASE("utf8 round trip") {
  const std::string s = "kitêb سڵاو ‌ end";
  CHECK(encode_utf8(decode_utf8(s)) == s);
  CHECK(codepoint_length("سڵاو") == 4);
  CHECK(split_chars("aێb") == std::vector<std::string>{"a", "ێ", "b"});
}

TEST_CASE("malformed bytes become replacement characters") {
  const std::string bad = std::string("a") + char(0xC3) + "b";
  const auto cps = decode_utf8(bad);
  REQUIRE(cps.size() == 3);
  CHECK(cps[1] == 0xFFFD);
}

TEST_CASE("whitespace and delimiter splitting") {
  CHECK(split_whitespace("  a \t b\nc  ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_on("a--b", '-') == std::vector<std::string>{"a", "", "b"});
  CHECK(trim("  x y ") == "x y");
  CHECK(join({"a", "b"}, "-") == "a-b");
}

TEST_CASE("rng is reproducible and below() stays in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(1);
  for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
  CHECK(derive_seed(42, "a") != derive_seed(42, "b"));
  CHECK(derive_seed(42, "a") == derive_seed(42, "a"));
}
