#include <algorithm>

#include "cli_runner.hpp"
#include "doctest.h"

namespace {

const std::string kFixtures = MCEMBED_FIXTURES;

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

void check_single_line_error(const cli::Result& r) {
  CHECK(r.status != 0);
  CHECK(count_lines(r.err) == 1);
  CHECK(r.err.rfind("mcembed: ", 0) == 0);
}

}  // namespace

TEST_CASE("reformat") {
  cli::TempDir dir("mcembed_cli_reformat");
  cli::write_file(dir / "c.txt", "a b c\nd e f\ng h i\n");
  auto r = cli::run(dir.path(), "reformat --input c.txt --output p.txt");
  REQUIRE(r.status == 0);
  CHECK(r.out == "pairs 3\n");
  CHECK(cli::slurp(dir / "p.txt") == "a*c b\nd*f e\ng*i h\n");

  cli::write_file(dir / "four.txt", "a b c d\n");
  r = cli::run(dir.path(), "reformat --input four.txt --output p4.txt --k-min 2 --k-max 3");
  REQUIRE(r.status == 0);
  CHECK(cli::slurp(dir / "p4.txt") == "a*c b\na*d b\na*d c\nb*d c\n");

  cli::write_file(dir / "empty.txt", "");
  r = cli::run(dir.path(), "reformat --input empty.txt --output p0.txt");
  CHECK(r.out == "pairs 0\n");
  CHECK(cli::slurp(dir / "p0.txt").empty());

  check_single_line_error(cli::run(dir.path(), "reformat --input missing.txt --output x.txt"));
  check_single_line_error(cli::run(dir.path(), "reformat --input c.txt --output x.txt --k-min 1"));
}

TEST_CASE("config file values, overridden by flags") {
  cli::TempDir dir("mcembed_cli_config");
  cli::write_file(dir / "four.txt", "a b c d\n");
  cli::write_file(dir / "run.cfg",
                  "# pipeline settings\nk_max = 3\ninput = four.txt\n"
                  "dim = 10   # used by train-mc only\n");
  auto r = cli::run(dir.path(), "reformat --config run.cfg --output p.txt");
  REQUIRE(r.status == 0);
  CHECK(r.out == "pairs 4\n");
  r = cli::run(dir.path(), "reformat --config run.cfg --output p.txt --k-max 2");
  CHECK(r.out == "pairs 2\n");

  cli::write_file(dir / "bad.cfg", "no_such_flag = 1\n");
  check_single_line_error(cli::run(dir.path(), "reformat --config bad.cfg --output p.txt"));
  cli::write_file(dir / "bad2.cfg", "just words\n");
  check_single_line_error(cli::run(dir.path(), "reformat --config bad2.cfg --output p.txt"));
}

TEST_CASE("train-mc is deterministic and defaults to 200 dimensions") {
  cli::TempDir dir("mcembed_cli_train");
  std::string corpus;
  for (int i = 0; i < 300; ++i) {
    corpus += "L" + std::to_string(i % 6) + " n" + std::to_string(i % 4) + " R" +
              std::to_string(i % 6) + "\n";
  }
  cli::write_file(dir / "c.txt", corpus);
  REQUIRE(cli::run(dir.path(), "reformat --input c.txt --output p.txt").status == 0);
  const std::string flags = " --workers 1 --seed 7 --table-size 10000";
  REQUIRE(cli::run(dir.path(), "train-mc --input p.txt --output a.txt" + flags).status == 0);
  REQUIRE(cli::run(dir.path(), "train-mc --input p.txt --output b.txt" + flags).status == 0);
  const auto a = cli::slurp(dir / "a.txt");
  CHECK(a == cli::slurp(dir / "b.txt"));
  CHECK(a.rfind("6 200\n", 0) == 0);

  auto r = cli::run(dir.path(), "train-words --input c.txt --output w.txt --dim 8" + flags);
  REQUIRE(r.status == 0);
  CHECK(cli::slurp(dir / "w.txt").rfind("16 8\n", 0) == 0);

  check_single_line_error(cli::run(dir.path(), "train-mc --input nope.txt --output x.txt"));
  // A plain corpus is not a pair corpus.
  check_single_line_error(cli::run(dir.path(), "train-mc --input c.txt --output x.txt"));
}

TEST_CASE("extract on the fixtures") {
  cli::TempDir dir("mcembed_cli_extract");
  auto r = cli::run(dir.path(), "extract --input " + kFixtures + "/toy.conll --output m.tsv");
  REQUIRE(r.status == 0);
  CHECK(cli::slurp(dir / "m.tsv") ==
        "animate\thelped\tto\thelped*to\tXiulan\n"
        "animate\tsaid\thelped\tsaid*helped\the\n"
        "inanimate\tfind\t.\tfind*.\ta_flat\n"
        "inanimate\tliked\tbecause\tliked*because\tit\n"
        "inanimate\tbecause\twas\tbecause*was\tthe_flat\n"
        "inanimate\twagged\ttail\twagged*tail\tits\n"
        "inanimate\twagged\ttail\twagged*tail\tits\n"
        "animate\tand\towner\tand*owner\this\n");

  r = cli::run(dir.path(), "extract --input " + kFixtures + "/conflicted.conll --output c.tsv");
  REQUIRE(r.status == 0);
  CHECK(cli::slurp(dir / "c.tsv").empty());
  CHECK(r.out.find("conflicted chains 1\n") != std::string::npos);

  r = cli::run(dir.path(), "extract --input " + kFixtures + "/boundary.conll --output b.tsv");
  REQUIRE(r.status == 0);
  CHECK(cli::slurp(dir / "b.tsv").empty());

  // A directory is read in sorted file order.
  r = cli::run(dir.path(), "extract --input " + kFixtures + " --output all.tsv");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("documents 4\n") != std::string::npos);
  CHECK(count_lines(cli::slurp(dir / "all.tsv")) == 8);

  cli::write_file(dir / "bad.conll", "d 0 0 w X (1\n");
  check_single_line_error(cli::run(dir.path(), "extract --input bad.conll --output x.tsv"));
}

TEST_CASE("fit and eval usage errors") {
  cli::TempDir dir("mcembed_cli_usage");
  cli::write_file(dir / "t.tsv", "animate\ta\tb\ta*b\tx\ninanimate\tc\td\tc*d\ty\n");
  auto r = cli::run(dir.path(), "fit --train t.tsv --repr glove --model m");
  check_single_line_error(r);
  CHECK(r.status == 2);
  CHECK(r.err.find("usage error") != std::string::npos);
  check_single_line_error(cli::run(dir.path(), "fit --train t.tsv --repr mc --model m"));
  check_single_line_error(cli::run(dir.path(), "frobnicate"));
  check_single_line_error(cli::run(dir.path(), "eval --test t.tsv --system a,b"));

  REQUIRE(cli::run(dir.path(), "fit --train t.tsv --repr bow --model m").status == 0);
  CHECK(std::filesystem::exists(dir / "m.bowvocab"));
  r = cli::run(dir.path(), "eval --test t.tsv --system bow,bow,m --compare bow --tsv r.tsv");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("bow            | 1.000\n") != std::string::npos);
  CHECK(cli::slurp(dir / "r.tsv").find("bow\t2\t2\t1.000000") != std::string::npos);
  check_single_line_error(cli::run(dir.path(), "eval --test t.tsv --system bow,bow,m --compare x"));
}

TEST_CASE("synth") {
  cli::TempDir dir("mcembed_cli_synth");
  const std::string small = " --sentences 2000 --markables 1000";
  REQUIRE(cli::run(dir.path(), "synth --out-dir a" + small).status == 0);
  REQUIRE(cli::run(dir.path(), "synth --out-dir b" + small).status == 0);
  for (const char* f : {"corpus.txt", "train.tsv", "test.tsv"}) {
    CHECK(cli::slurp(dir / "a" / f) == cli::slurp(dir / "b" / f));
    CHECK_FALSE(cli::slurp(dir / "a" / f).empty());
  }
  REQUIRE(cli::run(dir.path(), "synth --out-dir c --seed 5" + small).status == 0);
  CHECK(cli::slurp(dir / "c" / "corpus.txt") != cli::slurp(dir / "a" / "corpus.txt"));
  check_single_line_error(cli::run(dir.path(), "synth --out-dir d --test-mcs-per-class 40"));
  check_single_line_error(cli::run(dir.path(), "synth --out-dir d --noise 0.7"));
}
