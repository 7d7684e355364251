#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "bregtree/agglomerate.hpp"
#include "bregtree/eval.hpp"
#include "bregtree/expfam.hpp"
#include "bregtree/io.hpp"

namespace {

using namespace bregtree;

int env_threads() {
  const char* v = std::getenv("BREGTREE_THREADS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

struct ModelBundle {
  std::shared_ptr<const DivergenceModel> model;
  std::shared_ptr<const StatisticMap> map;
  Smoother smoother = Smoother::none();
};

bool is_euclidean_model(const std::string& tag) {
  return tag == "kmeans" || tag == "l1" || tag == "gaussian-full" ||
         tag == "gaussian-diag";
}

std::vector<double> column_deviations(const std::vector<Datum>& data) {
  const std::size_t d = data.front().size();
  const double m = static_cast<double>(data.size());
  std::vector<double> mean(d, 0.0);
  for (const Datum& x : data) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += x[i];
  }
  for (double& v : mean) v /= m;
  std::vector<double> var(d, 0.0);
  for (const Datum& x : data) {
    for (std::size_t i = 0; i < d; ++i) {
      const double c = x[i] - mean[i];
      var[i] += c * c;
    }
  }
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = std::sqrt(var[i] / m);
  return out;
}

// Model, statistic map, and dataset-fitted smoother for a model tag.
ModelBundle make_bundle(const std::string& tag, const std::string& smoothing,
                        double bandwidth_scale, const std::vector<Datum>& data,
                        std::size_t data_dim) {
  ModelBundle b;
  const bool smooth = smoothing == "auto";
  if (tag == "kmeans") {
    b.model = squared_euclidean(data_dim);
    b.map = identity_map(data_dim);
  } else if (tag == "l1") {
    b.model = l1_model(data_dim);
    b.map = identity_map(data_dim);
  } else if (tag == "gaussian-full" || tag == "gaussian-diag") {
    const bool diag = tag == "gaussian-diag";
    b.model = divergence_model_of(
        diag ? Family::GaussianDiag : Family::GaussianFull, data_dim);
    b.map = gaussian_moment_map(data_dim, diag);
    if (smooth) {
      const std::vector<double> sig = column_deviations(data);
      const std::int64_t m = static_cast<std::int64_t>(data.size());
      b.smoother = diag ? gaussian_smoother_diag(sig, m, bandwidth_scale)
                        : gaussian_smoother_full(sig, m, bandwidth_scale);
    }
  } else if (tag == "multinomial") {
    b.model = divergence_model_of(Family::Multinomial, data_dim);
    b.map = multinomial_frequency_map(data_dim);
    if (smooth) {
      double words = 0.0;
      for (const Datum& doc : data) {
        words += std::accumulate(doc.begin(), doc.end(), 0.0);
      }
      b.smoother = multinomial_smoother(
          static_cast<std::int64_t>(std::llround(words)), data_dim);
    }
  } else {
    throw UsageError("unknown model '" + tag + "'");
  }
  return b;
}

// Bundle for an exported tree: same model and map, smoother replayed from
// the recorded state.
ModelBundle bundle_from_metadata(const TreeMetadata& meta) {
  ModelBundle b;
  const std::size_t d = meta.data_dim;
  if (meta.model == "kmeans") {
    b.model = squared_euclidean(d);
    b.map = identity_map(d);
  } else if (meta.model == "l1") {
    b.model = l1_model(d);
    b.map = identity_map(d);
  } else if (meta.model == "gaussian-full" || meta.model == "gaussian-diag") {
    const bool diag = meta.model == "gaussian-diag";
    b.model = divergence_model_of(
        diag ? Family::GaussianDiag : Family::GaussianFull, d);
    b.map = gaussian_moment_map(d, diag);
  } else if (meta.model == "multinomial") {
    b.model = divergence_model_of(Family::Multinomial, d);
    b.map = multinomial_frequency_map(d);
  } else {
    throw UsageError("tree built with unknown model '" + meta.model + "'");
  }
  b.smoother = smoother_from_metadata(meta);
  return b;
}

void check_model_format(const std::string& model, const std::string& format) {
  if (model == "multinomial" && format != "bow") {
    throw UsageError("model 'multinomial' requires --format bow");
  }
  if (is_euclidean_model(model) && format != "csv") {
    throw UsageError("model '" + model + "' requires --format csv");
  }
}

// Re-express bow documents over a stored vocabulary; unknown tokens are
// dropped.
std::vector<Datum> remap_bow(const BowCorpus& corpus,
                             const std::vector<std::string>& vocab) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], i);
  std::vector<Datum> out;
  out.reserve(corpus.documents.size());
  for (const Datum& doc : corpus.documents) {
    Datum mapped(vocab.size(), 0.0);
    for (std::size_t t = 0; t < corpus.vocabulary.size(); ++t) {
      if (doc[t] == 0.0) continue;
      auto it = index.find(corpus.vocabulary[t]);
      if (it != index.end()) mapped[it->second] = doc[t];
    }
    out.push_back(std::move(mapped));
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out.good()) {
    throw std::runtime_error("cannot write output file: " + path);
  }
}

struct ClusterArgs {
  std::string input;
  std::string format = "csv";
  std::string model = "kmeans";
  std::string smoothing = "auto";
  std::string strategy = "heap";
  double bandwidth_scale = 1.0;
  std::string labels_path;
  int k = 0;
  std::string out_json;
  std::string out_newick;
  std::string out_features;
};

int run_cluster(const ClusterArgs& args) {
  check_model_format(args.model, args.format);
  if (args.k > 0 && args.out_features.empty()) {
    throw UsageError("--k requires --out-features");
  }

  std::vector<Datum> data;
  TreeMetadata meta;
  meta.model = args.model;
  meta.smoothing = args.smoothing;
  meta.bandwidth_scale = args.bandwidth_scale;
  if (args.format == "csv") {
    data = ingest_csv(args.input);
    meta.data_dim = data.front().size();
  } else if (args.format == "bow") {
    BowCorpus corpus = ingest_bow(args.input);
    data = std::move(corpus.documents);
    meta.vocabulary = std::move(corpus.vocabulary);
    meta.data_dim = meta.vocabulary.size();
  } else {
    throw UsageError("unknown format '" + args.format + "'");
  }

  const ModelBundle bundle = make_bundle(args.model, args.smoothing,
                                         args.bandwidth_scale, data,
                                         meta.data_dim);
  record_smoother(bundle.smoother, &meta);

  RunStats stats;
  const auto t0 = std::chrono::steady_clock::now();
  const Dendrogram tree = agglomerate(
      data, *bundle.model, *bundle.map, bundle.smoother,
      args.strategy == "brute" ? Strategy::Brute : Strategy::Heap,
      env_threads(), &stats);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (!args.out_json.empty()) {
    write_file(args.out_json, dendrogram_to_json(tree, meta));
  }
  if (!args.out_newick.empty()) {
    write_file(args.out_newick, dendrogram_to_newick(tree));
  }

  if (!args.labels_path.empty()) {
    LabeledDataset labels{read_labels(args.labels_path)};
    std::printf("purity\t%.17g\n", dendrogram_purity(tree, labels));
  }

  if (args.k > 0) {
    std::vector<std::vector<double>> rows;
    rows.reserve(data.size());
    for (const Datum& x : data) {
      rows.push_back(tree_features(tree, static_cast<std::size_t>(args.k), x,
                                   *bundle.model, *bundle.map, bundle.smoother));
    }
    std::ofstream out(args.out_features, std::ios::binary);
    write_features_csv(out, rows);
    if (!out.good()) {
      throw std::runtime_error("cannot write output file: " + args.out_features);
    }
  }

  std::printf("points\t%zu\n", data.size());
  std::printf("merges\t%zu\n", data.size() - 1);
  std::printf("cost_evaluations\t%lld\n",
              static_cast<long long>(stats.cost_evaluations));
  std::printf("infinite_costs\t%lld\n",
              static_cast<long long>(stats.infinite_costs));
  std::printf("elapsed_seconds\t%.3f\n", seconds);
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_purity(const std::string& tree_path, const std::string& labels_path) {
  const Dendrogram tree = dendrogram_from_json(read_file(tree_path));
  LabeledDataset labels{read_labels(labels_path)};
  std::printf("purity\t%.17g\n", dendrogram_purity(tree, labels));
  return 0;
}

int run_features(const std::string& tree_path, const std::string& input,
                 int k, const std::string& out_path) {
  TreeMetadata meta;
  const Dendrogram tree = dendrogram_from_json(read_file(tree_path), &meta);
  const ModelBundle bundle = bundle_from_metadata(meta);

  std::vector<Datum> data;
  if (meta.model == "multinomial") {
    data = remap_bow(ingest_bow(input), meta.vocabulary);
  } else {
    data = ingest_csv(input);
    if (data.front().size() != meta.data_dim) {
      throw UsageError("input dimension " + std::to_string(data.front().size()) +
                       " does not match the tree's data_dim " +
                       std::to_string(meta.data_dim));
    }
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(data.size());
  for (const Datum& x : data) {
    rows.push_back(tree_features(tree, static_cast<std::size_t>(k), x,
                                 *bundle.model, *bundle.map, bundle.smoother));
  }
  if (out_path.empty()) {
    write_features_csv(std::cout, rows);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    write_features_csv(out, rows);
    if (!out.good()) {
      throw std::runtime_error("cannot write output file: " + out_path);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agglomerative hierarchical clustering under Bregman divergences"};
  app.require_subcommand(1);

  ClusterArgs cargs;
  CLI::App* cluster = app.add_subcommand("cluster", "Build a dendrogram");
  cluster->add_option("--input", cargs.input, "Input data file")->required();
  cluster->add_option("--format", cargs.format, "csv | bow")
      ->check(CLI::IsMember({"csv", "bow"}));
  cluster->add_option("--model", cargs.model,
                      "kmeans | l1 | gaussian-full | gaussian-diag | multinomial")
      ->check(CLI::IsMember({"kmeans", "l1", "gaussian-full", "gaussian-diag",
                             "multinomial"}));
  cluster->add_option("--smoothing", cargs.smoothing, "auto | none")
      ->check(CLI::IsMember({"auto", "none"}));
  cluster->add_option("--bandwidth-scale", cargs.bandwidth_scale,
                      "Multiplier on the smoothing bandwidth")
      ->check(CLI::PositiveNumber);
  cluster->add_option("--strategy", cargs.strategy, "heap | brute")
      ->check(CLI::IsMember({"heap", "brute"}));
  cluster->add_option("--labels", cargs.labels_path,
                      "Label file; prints dendrogram purity");
  cluster->add_option("--k", cargs.k, "Cut size for feature extraction")
      ->check(CLI::PositiveNumber);
  cluster->add_option("--out-json", cargs.out_json, "Dendrogram JSON path");
  cluster->add_option("--out-newick", cargs.out_newick, "Newick path");
  cluster->add_option("--out-features", cargs.out_features,
                      "Features CSV path (with --k)");

  std::string tree_path;
  std::string labels_path;
  CLI::App* purity = app.add_subcommand("purity", "Dendrogram purity of a tree");
  purity->add_option("--tree", tree_path, "Dendrogram JSON")->required();
  purity->add_option("--labels", labels_path, "Label file")->required();

  std::string f_tree;
  std::string f_input;
  std::string f_out;
  int f_k = 1;
  CLI::App* features =
      app.add_subcommand("features", "Merge-cost features against a tree");
  features->add_option("--tree", f_tree, "Dendrogram JSON")->required();
  features->add_option("--input", f_input, "Data to featurize")->required();
  features->add_option("--k", f_k, "Number of clusters / features")
      ->required()
      ->check(CLI::PositiveNumber);
  features->add_option("--out-features", f_out,
                       "Features CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cluster->parsed()) return run_cluster(cargs);
    if (purity->parsed()) return run_purity(tree_path, labels_path);
    if (features->parsed()) return run_features(f_tree, f_input, f_k, f_out);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
