#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bregtree/agglomerate.hpp"

namespace bregtree {

// Rectangular numeric CSV (optional header, auto-detected) -> one datum per
// row, row order preserved. Throws ParseError with the offending line.
std::vector<Datum> ingest_csv(const std::string& path);

struct BowCorpus {
  std::vector<Datum> documents;        // dense count vectors over vocabulary
  std::vector<std::string> vocabulary; // sorted distinct tokens
};

// One document per line as whitespace-separated token:count pairs with
// positive integer counts; duplicate tokens on a line are summed.
BowCorpus ingest_bow(const std::string& path);

// One label per line, aligned with the data rows.
std::vector<std::string> read_labels(const std::string& path);

// Run configuration recorded alongside an exported tree so that purity and
// feature queries can be replayed from the artifact alone. The smoother
// state is stored verbatim: it is fixed at ingestion time and must not be
// re-estimated from other data.
struct TreeMetadata {
  std::string model;      // kmeans | l1 | gaussian-full | gaussian-diag | multinomial
  std::string smoothing = "auto";  // auto | none
  double bandwidth_scale = 1.0;
  std::size_t data_dim = 0;
  std::vector<std::string> vocabulary;  // bow runs only
  std::string smoother_mode = "none";   // none | convex | cone
  double smoother_alpha = 0.0;
  std::vector<double> smoother_anchor;
  std::int64_t smoother_m = 1;
};

void record_smoother(const Smoother& smoother, TreeMetadata* meta);
Smoother smoother_from_metadata(const TreeMetadata& meta);

// Deterministic JSON: fixed key order, floats printed with 17 significant
// digits, +infinity encoded as null. Identical trees serialize to identical
// bytes.
std::string dendrogram_to_json(const Dendrogram& tree, const TreeMetadata& meta);
Dendrogram dendrogram_from_json(const std::string& text, TreeMetadata* meta = nullptr);

// Newick with branch length = the parent's merge cost.
std::string dendrogram_to_newick(const Dendrogram& tree);

// Header f1..fk, one row per datum, 17 significant digits.
void write_features_csv(std::ostream& out,
                        const std::vector<std::vector<double>>& rows);

}  // namespace bregtree
