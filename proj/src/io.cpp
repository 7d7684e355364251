#include "bregtree/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace bregtree {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& cell, double* out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  *out = v;
  return true;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<Datum> ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, 0);
  std::vector<Datum> data;
  std::string line;
  long line_no = 0;
  std::size_t width = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ParseError("blank row", line_no);
    }
    const std::vector<std::string> cells = split_csv(line);
    Datum row(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!parse_double(cells[i], &row[i]) || !std::isfinite(row[i])) {
        numeric = false;
        if (!first_row) {
          throw ParseError("non-numeric cell '" + trim(cells[i]) + "'", line_no);
        }
        break;
      }
    }
    if (first_row) {
      first_row = false;
      if (!numeric) continue;  // header row
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw ParseError("ragged row: " + std::to_string(row.size()) +
                           " cells, expected " + std::to_string(width),
                       line_no);
    }
    data.push_back(std::move(row));
  }
  if (data.empty()) throw ParseError("no data rows in " + path, line_no);
  return data;
}

BowCorpus ingest_bow(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, 0);
  std::vector<std::map<std::string, double>> docs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ParseError("empty document", line_no);
    }
    std::map<std::string, double> counts;
    std::istringstream ss(line);
    std::string pair;
    while (ss >> pair) {
      const std::size_t colon = pair.rfind(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size()) {
        throw ParseError("malformed token:count pair '" + pair + "'", line_no);
      }
      const std::string token = pair.substr(0, colon);
      const std::string count_str = pair.substr(colon + 1);
      char* end = nullptr;
      const long count = std::strtol(count_str.c_str(), &end, 10);
      if (end != count_str.c_str() + count_str.size() || count <= 0) {
        throw ParseError("count must be a positive integer in '" + pair + "'",
                         line_no);
      }
      counts[token] += static_cast<double>(count);  // duplicates sum
    }
    if (counts.empty()) throw ParseError("empty document", line_no);
    docs.push_back(std::move(counts));
  }
  if (docs.empty()) throw ParseError("no documents in " + path, line_no);

  BowCorpus corpus;
  std::map<std::string, std::size_t> vocab_index;
  for (const auto& doc : docs) {
    for (const auto& [token, _] : doc) vocab_index.emplace(token, 0);
  }
  corpus.vocabulary.reserve(vocab_index.size());
  for (auto& [token, idx] : vocab_index) {
    idx = corpus.vocabulary.size();
    corpus.vocabulary.push_back(token);
  }
  corpus.documents.reserve(docs.size());
  for (const auto& doc : docs) {
    Datum dense(corpus.vocabulary.size(), 0.0);
    for (const auto& [token, count] : doc) dense[vocab_index[token]] = count;
    corpus.documents.push_back(std::move(dense));
  }
  return corpus;
}

std::vector<std::string> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, 0);
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() && in.peek() == std::char_traits<char>::eof()) break;
    labels.push_back(t);
  }
  return labels;
}

void record_smoother(const Smoother& smoother, TreeMetadata* meta) {
  switch (smoother.mode()) {
    case Smoother::Mode::None:
      meta->smoother_mode = "none";
      break;
    case Smoother::Mode::Convex:
      meta->smoother_mode = "convex";
      break;
    case Smoother::Mode::Cone:
      meta->smoother_mode = "cone";
      break;
  }
  meta->smoother_alpha = smoother.alpha();
  meta->smoother_anchor = smoother.anchor().coords();
  meta->smoother_m = smoother.data_size();
}

Smoother smoother_from_metadata(const TreeMetadata& meta) {
  if (meta.smoother_mode == "none") return Smoother::none();
  StatVec anchor{std::vector<double>(meta.smoother_anchor)};
  if (meta.smoother_mode == "convex") {
    return Smoother::convex(std::move(anchor), meta.smoother_alpha,
                            meta.smoother_m);
  }
  if (meta.smoother_mode == "cone") {
    return Smoother::cone(std::move(anchor), meta.smoother_alpha,
                          meta.smoother_m);
  }
  throw ParseError("unknown smoother mode '" + meta.smoother_mode + "'", 0);
}

std::string dendrogram_to_json(const Dendrogram& tree, const TreeMetadata& meta) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"format\": \"bregtree-dendrogram\",\n";
  out << "  \"version\": 1,\n";
  out << "  \"model\": \"" << meta.model << "\",\n";
  out << "  \"smoothing\": \"" << meta.smoothing << "\",\n";
  out << "  \"bandwidth_scale\": " << format_double(meta.bandwidth_scale)
      << ",\n";
  out << "  \"data_dim\": " << meta.data_dim << ",\n";
  out << "  \"leaf_count\": " << tree.leaf_count() << ",\n";
  out << "  \"smoother\": {\"mode\": \"" << meta.smoother_mode
      << "\", \"alpha\": " << format_double(meta.smoother_alpha)
      << ", \"m\": " << meta.smoother_m << ", \"anchor\": [";
  for (std::size_t i = 0; i < meta.smoother_anchor.size(); ++i) {
    if (i) out << ", ";
    out << format_double(meta.smoother_anchor[i]);
  }
  out << "]},\n";
  if (!meta.vocabulary.empty()) {
    out << "  \"vocabulary\": [";
    for (std::size_t i = 0; i < meta.vocabulary.size(); ++i) {
      if (i) out << ", ";
      out << nlohmann::json(meta.vocabulary[i]).dump();
    }
    out << "],\n";
  }
  out << "  \"nodes\": [\n";
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const DendrogramNode& n = tree.nodes()[i];
    out << "    {\"id\": " << n.id;
    if (n.left >= 0) {
      out << ", \"left\": " << n.left << ", \"right\": " << n.right
          << ", \"order\": " << n.merge_order << ", \"cost\": "
          << (std::isinf(n.merge_cost) ? "null" : format_double(n.merge_cost));
    }
    out << ", \"size\": " << n.summary.size << ", \"stat\": [";
    for (std::size_t k = 0; k < n.summary.stat.dim(); ++k) {
      if (k) out << ", ";
      out << format_double(n.summary.stat[k]);
    }
    out << "]}" << (i + 1 < tree.nodes().size() ? "," : "") << "\n";
  }
  out << "  ]\n";
  out << "}\n";
  return out.str();
}

Dendrogram dendrogram_from_json(const std::string& text, TreeMetadata* meta) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid dendrogram JSON: ") + e.what(), 0);
  }
  try {
    if (j.at("format") != "bregtree-dendrogram") {
      throw ParseError("not a bregtree dendrogram file", 0);
    }
    if (meta) {
      meta->model = j.at("model").get<std::string>();
      meta->smoothing = j.at("smoothing").get<std::string>();
      meta->bandwidth_scale = j.at("bandwidth_scale").get<double>();
      meta->data_dim = j.at("data_dim").get<std::size_t>();
      meta->vocabulary.clear();
      if (j.contains("vocabulary")) {
        meta->vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
      }
      if (j.contains("smoother")) {
        const auto& js = j.at("smoother");
        meta->smoother_mode = js.at("mode").get<std::string>();
        meta->smoother_alpha = js.at("alpha").get<double>();
        meta->smoother_m = js.at("m").get<std::int64_t>();
        meta->smoother_anchor = js.at("anchor").get<std::vector<double>>();
      }
    }
    std::vector<DendrogramNode> nodes;
    nodes.resize(j.at("nodes").size());
    for (const auto& jn : j.at("nodes")) {
      DendrogramNode n;
      n.id = jn.at("id").get<int>();
      if (jn.contains("left")) {
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.merge_order = jn.at("order").get<int>();
        n.merge_cost = jn.at("cost").is_null()
                           ? kInfiniteDivergence
                           : jn.at("cost").get<double>();
      }
      n.summary.id = n.id;
      n.summary.size = jn.at("size").get<std::int64_t>();
      n.summary.stat = StatVec(jn.at("stat").get<std::vector<double>>());
      if (n.id < 0 || static_cast<std::size_t>(n.id) >= nodes.size()) {
        throw ParseError("node id out of range", 0);
      }
      nodes[n.id] = std::move(n);
    }
    // restore parent links before structural validation
    for (const DendrogramNode& n : nodes) {
      if (n.left >= 0) {
        nodes.at(n.left).parent = n.id;
        nodes.at(n.right).parent = n.id;
      }
    }
    return Dendrogram(std::move(nodes));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid dendrogram JSON: ") + e.what(), 0);
  }
}

namespace {

void newick_rec(const Dendrogram& tree, int id, std::string& out) {
  const DendrogramNode& n = tree.node(id);
  if (n.left < 0) {
    out += std::to_string(n.id);
    return;
  }
  const std::string len = format_double(n.merge_cost);
  out += '(';
  newick_rec(tree, n.left, out);
  out += ':';
  out += len;
  out += ',';
  newick_rec(tree, n.right, out);
  out += ':';
  out += len;
  out += ')';
}

}  // namespace

std::string dendrogram_to_newick(const Dendrogram& tree) {
  std::string out;
  newick_rec(tree, tree.root(), out);
  out += ";\n";
  return out;
}

void write_features_csv(std::ostream& out,
                        const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return;
  const std::size_t k = rows.front().size();
  for (std::size_t i = 0; i < k; ++i) out << (i ? ",f" : "f") << (i + 1);
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < k; ++i) {
      if (i) out << ",";
      out << format_double(row[i]);
    }
    out << "\n";
  }
}

}  // namespace bregtree
