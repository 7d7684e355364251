#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bregtree/agglomerate.hpp"
#include "bregtree/expfam.hpp"
#include "bregtree/io.hpp"

using namespace bregtree;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("bregtree_test_" + name);
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BREGTREE_CLI_PATH) + " " + args +
                          " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_cli_stdout(const std::string& args) {
  const fs::path out = temp_file("stdout.txt");
  const std::string cmd = std::string(BREGTREE_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> /dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  return slurp(out);
}

Dendrogram toy_tree() {
  auto model = squared_euclidean(1);
  auto map = identity_map(1);
  const std::vector<Datum> pts{{0.0}, {1.0}, {10.0}};
  return agglomerate(pts, *model, *map, Smoother::none(), Strategy::Heap);
}

}  // namespace

TEST_CASE("csv ingestion") {
  const fs::path p = temp_file("data.csv");

  write(p, "1,2\n3,4\n5,6\n");
  auto data = ingest_csv(p.string());
  REQUIRE(data.size() == 3);
  CHECK(data[0] == Datum{1.0, 2.0});
  CHECK(data[2] == Datum{5.0, 6.0});

  write(p, "x,y\n1,2\n3,4\n");
  data = ingest_csv(p.string());
  REQUIRE(data.size() == 2);  // header skipped
  CHECK(data[0] == Datum{1.0, 2.0});

  write(p, "");
  CHECK_THROWS_AS(ingest_csv(p.string()), ParseError);

  write(p, "1,2\n3\n");
  CHECK_THROWS_WITH_AS(ingest_csv(p.string()),
                       doctest::Contains("line 2"), ParseError);

  write(p, "1,2\n3,oops\n");
  CHECK_THROWS_WITH_AS(ingest_csv(p.string()),
                       doctest::Contains("line 2"), ParseError);

  CHECK_THROWS_AS(ingest_csv("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("bag-of-words ingestion") {
  const fs::path p = temp_file("docs.bow");

  write(p, "a:2 b:1\nc:4\n");
  BowCorpus corpus = ingest_bow(p.string());
  CHECK(corpus.vocabulary == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(corpus.documents.size() == 2);
  CHECK(corpus.documents[0] == Datum{2.0, 1.0, 0.0});
  CHECK(corpus.documents[1] == Datum{0.0, 0.0, 4.0});

  write(p, "a:1 a:2 b:3\n");
  corpus = ingest_bow(p.string());
  CHECK(corpus.documents[0] == Datum{3.0, 3.0});  // duplicates summed

  write(p, "a:1 broken\n");
  CHECK_THROWS_WITH_AS(ingest_bow(p.string()), doctest::Contains("line 1"),
                       ParseError);
  write(p, "a:0\n");
  CHECK_THROWS_AS(ingest_bow(p.string()), ParseError);
  write(p, "a:-3\n");
  CHECK_THROWS_AS(ingest_bow(p.string()), ParseError);
  write(p, "a:two\n");
  CHECK_THROWS_AS(ingest_bow(p.string()), ParseError);
}

TEST_CASE("dendrogram json round trip is byte identical") {
  const Dendrogram tree = toy_tree();
  TreeMetadata meta;
  meta.model = "kmeans";
  meta.smoothing = "none";
  meta.data_dim = 1;
  const std::string text = dendrogram_to_json(tree, meta);

  TreeMetadata back;
  const Dendrogram parsed = dendrogram_from_json(text, &back);
  CHECK(back.model == "kmeans");
  CHECK(back.data_dim == 1);
  CHECK(parsed.leaf_count() == 3);
  CHECK(parsed.node(3).merge_cost == tree.node(3).merge_cost);
  CHECK(dendrogram_to_json(parsed, back) == text);

  CHECK_THROWS_AS(dendrogram_from_json("{not json"), ParseError);
  CHECK_THROWS_AS(dendrogram_from_json("{\"format\": \"other\"}"), ParseError);
}

TEST_CASE("infinite merge costs survive the json round trip") {
  auto model = divergence_model_of(Family::GaussianFull, 1);
  auto map = gaussian_moment_map(1, false);
  const std::vector<Datum> pts{{0.0}, {1.0}};
  const Dendrogram tree =
      agglomerate(pts, *model, *map, Smoother::none(), Strategy::Heap);
  REQUIRE(std::isinf(tree.node(2).merge_cost));
  TreeMetadata meta;
  meta.model = "gaussian-full";
  meta.smoothing = "none";
  meta.data_dim = 1;
  const std::string text = dendrogram_to_json(tree, meta);
  CHECK(text.find("\"cost\": null") != std::string::npos);
  const Dendrogram parsed = dendrogram_from_json(text);
  CHECK(std::isinf(parsed.node(2).merge_cost));
}

TEST_CASE("newick export") {
  const std::string nwk = dendrogram_to_newick(toy_tree());
  CHECK(nwk ==
        "(2:60.166666666666671,(0:0.5,1:0.5):60.166666666666671);\n");
}

TEST_CASE("smoother state replays from metadata") {
  const Smoother sm = multinomial_smoother(123, 4);
  TreeMetadata meta;
  record_smoother(sm, &meta);
  CHECK(meta.smoother_mode == "convex");
  CHECK(meta.smoother_m == 123);
  const Smoother back = smoother_from_metadata(meta);
  const StatVec probe{0.7, 0.1, 0.1, 0.1};
  CHECK(back.apply(probe) == sm.apply(probe));
}

TEST_CASE("cli exit codes and artifacts") {
  const fs::path csv = temp_file("cli_data.csv");
  write(csv, "0\n1\n10\n");
  const fs::path labels = temp_file("cli_labels.txt");
  write(labels, "a\na\nb\n");
  const fs::path json = temp_file("cli_tree.json");
  const fs::path json2 = temp_file("cli_tree2.json");
  const fs::path nwk = temp_file("cli_tree.nwk");

  SUBCASE("successful clustering writes artifacts") {
    const std::string out = run_cli_stdout(
        "cluster --input " + csv.string() + " --model kmeans --labels " +
        labels.string() + " --out-json " + json.string() + " --out-newick " +
        nwk.string());
    CHECK(out.find("purity\t1\n") != std::string::npos);
    CHECK(out.find("points\t3") != std::string::npos);
    CHECK(out.find("infinite_costs\t0") != std::string::npos);
    const Dendrogram tree = dendrogram_from_json(slurp(json));
    CHECK(tree.leaf_count() == 3);
    CHECK(slurp(nwk) ==
          "(2:60.166666666666671,(0:0.5,1:0.5):60.166666666666671);\n");
  }

  SUBCASE("identical runs produce identical bytes") {
    REQUIRE(run_cli("cluster --input " + csv.string() +
                    " --model kmeans --out-json " + json.string()) == 0);
    REQUIRE(run_cli("cluster --input " + csv.string() +
                    " --model kmeans --out-json " + json2.string()) == 0);
    CHECK(slurp(json) == slurp(json2));

    // parallel cost evaluation commits in deterministic order
    const std::string threaded =
        "BREGTREE_THREADS=4 " + std::string(BREGTREE_CLI_PATH) +
        " cluster --input " + csv.string() + " --model kmeans --out-json " +
        json2.string() + " > /dev/null 2> /dev/null";
    REQUIRE(std::system(threaded.c_str()) == 0);
    CHECK(slurp(json) == slurp(json2));
  }

  SUBCASE("model/format mismatches are config errors") {
    const fs::path bow = temp_file("cli_docs.bow");
    write(bow, "a:1 b:2\nb:1\n");
    CHECK(run_cli("cluster --input " + bow.string() +
                  " --format bow --model kmeans") == 2);
    CHECK(run_cli("cluster --input " + csv.string() +
                  " --format csv --model multinomial") == 2);
    CHECK(run_cli("cluster --input " + csv.string() + " --model nonsense") == 2);
    CHECK(run_cli("cluster") == 2);  // missing required --input
    CHECK(run_cli("cluster --input " + csv.string() +
                  " --model kmeans --k 2") == 2);  // --k without --out-features
    CHECK(run_cli("cluster --input " + csv.string() +
                  " --model kmeans --k -1 --out-features /tmp/f.csv") == 2);
  }

  SUBCASE("io failures exit 3") {
    CHECK(run_cli("cluster --input /does/not/exist.csv --model kmeans") == 3);
    write(csv, "1,2\n3,nope\n");
    CHECK(run_cli("cluster --input " + csv.string() + " --model kmeans") == 3);
  }

  SUBCASE("purity and features subcommands replay exported trees") {
    write(csv, "0\n1\n10\n");
    REQUIRE(run_cli("cluster --input " + csv.string() +
                    " --model kmeans --out-json " + json.string()) == 0);
    const std::string purity_out = run_cli_stdout(
        "purity --tree " + json.string() + " --labels " + labels.string());
    CHECK(purity_out == "purity\t1\n");

    const std::string features_out = run_cli_stdout(
        "features --tree " + json.string() + " --input " + csv.string() +
        " --k 2");
    CHECK(features_out.substr(0, 6) == "f1,f2\n");
    // three data rows follow the header
    CHECK(std::count(features_out.begin(), features_out.end(), '\n') == 4);
  }

  SUBCASE("gaussian model with labels prints the purity contract line") {
    const fs::path wide = temp_file("cli_wide.csv");
    write(wide, "0,0\n0.1,0\n5,5\n5.2,5\n");
    const fs::path wlabels = temp_file("cli_wide.labels");
    write(wlabels, "a\na\nb\nb\n");
    const std::string out = run_cli_stdout(
        "cluster --input " + wide.string() + " --model gaussian-full --labels " +
        wlabels.string());
    CHECK(out.find("purity\t1\n") != std::string::npos);
  }

  SUBCASE("multinomial pipeline runs end to end") {
    const fs::path bow = temp_file("cli_corpus.bow");
    write(bow, "a:3 b:1\na:2 b:2\nc:5\nc:4 b:1\n");
    const fs::path blabels = temp_file("cli_corpus.labels");
    write(blabels, "x\nx\ny\ny\n");
    const std::string out = run_cli_stdout(
        "cluster --input " + bow.string() +
        " --format bow --model multinomial --labels " + blabels.string() +
        " --out-json " + json.string());
    CHECK(out.find("purity\t1\n") != std::string::npos);
    CHECK(out.find("infinite_costs\t0") != std::string::npos);
  }
}
