#include <set>

#include "doctest.h"
#include "mcembed/error.hpp"
#include "mcembed/synthetic.hpp"

using namespace mcembed;

namespace {

SynthConfig small() {
  SynthConfig c;
  c.sentences = 5000;
  c.markables = 2000;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(SynthConfig{}.validate());
  auto c = small();
  c.noise = 0.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small();
  c.test_mcs_per_class = 40;
  CHECK_THROWS_WITH_AS(gen_synthetic(c), doctest::Contains("infeasible split"), Error);
  c = small();
  c.markables = 3;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("generated corpus and markables have the expected shape") {
  const auto d = gen_synthetic(small());
  CHECK(d.corpus.size() == 5000);
  for (const auto& s : d.corpus) {
    const auto toks = tokenize_line(s);
    REQUIRE(toks.size() == 3);
    CHECK(toks[0][0] == 'L');
    CHECK(toks[2][0] == 'R');
    CHECK(toks[0].substr(1) == toks[2].substr(1));
    CHECK(toks[1].rfind("noun_", 0) == 0);
  }
  CHECK(d.train_mcs.size() == 60);
  CHECK(d.test_mcs.size() == 20);
  const std::set<std::string> train_mcs(d.train_mcs.begin(), d.train_mcs.end());
  const std::set<std::string> test_mcs(d.test_mcs.begin(), d.test_mcs.end());
  for (const auto& m : test_mcs) CHECK(train_mcs.count(m) == 0);
  for (const auto& ex : d.train) CHECK(train_mcs.count(encode_mc(ex.mc())) == 1);
  std::size_t animate = 0;
  for (const auto& ex : d.test) {
    CHECK(test_mcs.count(encode_mc(ex.mc())) == 1);
    animate += ex.label == AnimacyLabel::Animate;
  }
  CHECK(2 * animate == d.test.size());
  CHECK(d.train.size() + d.test.size() <= 2000);
}

TEST_CASE("labels follow the MC type, and neutral types are not markables") {
  auto c = small();
  c.noise = 0.0;
  const auto d = gen_synthetic(c);
  for (const auto& ex : d.train) {
    const auto t = std::stoul(ex.left.substr(1));
    CHECK(t < 80);
    CHECK((t < 40) == (ex.label == AnimacyLabel::Animate));
    CHECK(ex.surface.substr(0, 6) == (t < 40 ? "noun_a" : "noun_i"));
  }
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = gen_synthetic(small());
  const auto b = gen_synthetic(small());
  CHECK(a.corpus == b.corpus);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  auto c = small();
  c.seed = 43;
  CHECK(gen_synthetic(c).corpus != a.corpus);
}
