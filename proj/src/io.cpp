#include "milu/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "milu/error.hpp"

namespace milu {

namespace {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void malformed(const std::string& what, std::size_t line) {
  throw Error(ErrorCode::MalformedFile, what, "line " + std::to_string(line));
}

}  // namespace

void write_matrix_market(std::ostream& out, const SpdMSystem& a) {
  const Index n = a.size();
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  for (Index k = 0; k < n; ++k) out << "% slack " << k << ' ' << format_g17(a.slack(k)) << '\n';
  const auto edges = a.edges();
  out << n << ' ' << n << ' ' << (static_cast<std::size_t>(n) + edges.size()) << '\n';
  // Column-major lower triangle: for column j, the diagonal then rows i > j.
  for (Index j = 0; j < n; ++j) {
    out << (j + 1) << ' ' << (j + 1) << ' ' << format_g17(a.diagonal(j)) << '\n';
    const auto nb = a.neighbors(j);
    const auto w = a.weights(j);
    for (std::size_t p = 0; p < nb.size(); ++p) {
      if (nb[p] > j) out << (nb[p] + 1) << ' ' << (j + 1) << ' ' << format_g17(-w[p]) << '\n';
    }
  }
}

SpdMSystem read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) malformed("empty file", 0);
  ++lineno;
  {
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate") {
      malformed("expected a coordinate MatrixMarket header", lineno);
    }
    if (field != "real" && field != "integer") malformed("only real matrices supported", lineno);
    if (symmetry != "symmetric" && symmetry != "general") {
      malformed("unsupported symmetry '" + symmetry + "'", lineno);
    }
  }

  std::map<Index, double> slack_comments;
  long long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '%') {
      std::istringstream cs(line.substr(1));
      std::string tag;
      Index k;
      std::string value;
      if (cs >> tag && tag == "slack" && cs >> k >> value) {
        double b = 0.0;
        const auto res = std::from_chars(value.data(), value.data() + value.size(), b);
        if (res.ec != std::errc{}) malformed("bad slack comment", lineno);
        slack_comments[k] = b;
      }
      continue;
    }
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz)) malformed("bad size line", lineno);
    break;
  }
  if (rows < 0 || rows != cols) malformed("missing or non-square size line", lineno);
  const auto n = static_cast<Index>(rows);

  std::vector<double> diag(n, 0.0);
  std::vector<bool> has_diag(n, false);
  std::vector<WeightedEdge> edges;
  long long seen = 0;
  while (seen < nnz && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream es(line);
    long long i, j;
    std::string value;
    if (!(es >> i >> j >> value)) malformed("bad entry line", lineno);
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{}) malformed("bad numeric value '" + value + "'", lineno);
    if (i < 1 || j < 1 || i > rows || j > cols) malformed("entry index out of range", lineno);
    ++seen;
    const auto r = static_cast<Index>(i - 1);
    const auto c = static_cast<Index>(j - 1);
    if (r == c) {
      diag[r] += v;
      has_diag[r] = true;
    } else {
      if (v > 0.0) {
        throw Error(ErrorCode::NotAnMMatrix, "positive off-diagonal entry",
                    "line " + std::to_string(lineno));
      }
      edges.push_back({r, c, -v});
    }
  }
  if (seen != nnz) malformed("fewer entries than announced", lineno);

  std::vector<double> zero_slack(n, 0.0);
  SpdMSystem structure = SpdMSystem::assemble(n, edges, zero_slack);
  std::vector<double> slack(n, 0.0);
  for (Index k = 0; k < n; ++k) {
    if (auto it = slack_comments.find(k); it != slack_comments.end()) {
      slack[k] = it->second;
    } else {
      double b = diag[k] - structure.diagonal(k);
      // rounding can push a zero row sum slightly negative
      if (b < 0.0 && b > -1e-12 * std::max(1.0, diag[k])) b = 0.0;
      slack[k] = b;
    }
  }
  return SpdMSystem::assemble(n, edges, slack);
}

nlohmann::json system_to_json(const SpdMSystem& a) {
  nlohmann::json j;
  j["n"] = a.size();
  auto edges = nlohmann::json::array();
  for (const auto& e : a.edges()) edges.push_back({e.a, e.b, e.weight});
  j["edges"] = std::move(edges);
  j["slack"] = std::vector<double>(a.slack().begin(), a.slack().end());
  return j;
}

SpdMSystem system_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<Index>();
    std::vector<WeightedEdge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) {
        throw Error(ErrorCode::MalformedFile, "edge entries must be [K, K', c] triples");
      }
      edges.push_back({e[0].get<Index>(), e[1].get<Index>(), e[2].get<double>()});
    }
    const auto slack = j.at("slack").get<std::vector<double>>();
    return SpdMSystem::assemble(n, edges, slack);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MalformedFile, std::string("system JSON: ") + ex.what());
  }
}

void write_matrix_market_file(const std::string& path, const SpdMSystem& a) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open output file", path);
  write_matrix_market(out, a);
}

SpdMSystem read_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedFile, "cannot open input file", path);
  return read_matrix_market(in);
}

}  // namespace milu
