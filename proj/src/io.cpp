#include "amm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace amm::io {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_distribution(const AtomicDistribution& dist,
                        const std::string& path) {
  dist.validate();
  json j;
  j["dim"] = dist.dim;
  json atoms = json::array();
  for (int i = 0; i < dist.k(); ++i) {
    json row = json::array();
    for (int c = 0; c < dist.dim; ++c) row.push_back(dist.atoms(i, c));
    atoms.push_back(row);
  }
  j["atoms"] = atoms;
  json weights = json::array();
  for (int i = 0; i < dist.k(); ++i) weights.push_back(dist.weights(i));
  j["weights"] = weights;
  spit(path, j.dump(2) + "\n");
}

AtomicDistribution parse_distribution(const std::string& json_text) {
  const json j = json::parse(json_text);
  AtomicDistribution d;
  d.dim = j.at("dim").get<int>();
  const auto& atoms = j.at("atoms");
  const auto& weights = j.at("weights");
  const int k = static_cast<int>(atoms.size());
  if (k < 1 || static_cast<int>(weights.size()) != k)
    throw InvalidArgument("distribution JSON: bad atoms/weights");
  d.atoms.resize(k, d.dim);
  d.weights.resize(k);
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(atoms[i].size()) != d.dim)
      throw InvalidArgument("distribution JSON: atom dimension mismatch");
    for (int c = 0; c < d.dim; ++c) d.atoms(i, c) = atoms[i][c].get<double>();
    d.weights(i) = weights[i].get<double>();
  }
  d.validate();
  return d;
}

AtomicDistribution read_distribution(const std::string& path) {
  return parse_distribution(slurp(path));
}

void write_dataset(const HeteroDataset& data, const std::string& path) {
  data.validate();
  std::ostringstream out;
  out << "sigma";
  for (int c = 0; c < data.dim(); ++c) out << ",x" << c;
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    out << format_double(data.sigmas(i));
    for (int c = 0; c < data.dim(); ++c)
      out << "," << format_double(data.points(i, c));
    out << "\n";
  }
  spit(path, out.str());
}

HeteroDataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty dataset file: " + path);
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "sigma")
    throw Error("dataset CSV must start with a sigma column");
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim < 1) throw Error("dataset CSV has no coordinate columns");

  std::vector<double> sig;
  std::vector<double> coords;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != dim + 1)
      throw Error("dataset CSV: ragged row");
    sig.push_back(std::stod(fields[0]));
    for (int c = 0; c < dim; ++c) coords.push_back(std::stod(fields[c + 1]));
  }
  HeteroDataset d;
  const int n = static_cast<int>(sig.size());
  d.points.resize(n, dim);
  d.sigmas.resize(n);
  for (int i = 0; i < n; ++i) {
    d.sigmas(i) = sig[i];
    for (int c = 0; c < dim; ++c) d.points(i, c) = coords[i * dim + c];
  }
  d.validate();
  return d;
}

void write_samples(const RowMat& points, const std::string& path) {
  std::ostringstream out;
  for (int c = 0; c < points.cols(); ++c) out << (c ? "," : "") << "x" << c;
  out << "\n";
  for (int i = 0; i < points.rows(); ++i) {
    for (int c = 0; c < points.cols(); ++c)
      out << (c ? "," : "") << format_double(points(i, c));
    out << "\n";
  }
  spit(path, out.str());
}

std::vector<PricingTable> read_pricing_tables(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty pricing table: " + path);
  const auto header = split_csv_line(line);
  if (header.size() != 4 || header[0] != "dataset" || header[1] != "p_clean" ||
      header[2] != "sigma" || header[3] != "score")
    throw Error("pricing CSV must have header dataset,p_clean,sigma,score");

  std::vector<PricingTable> tables;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw Error("pricing CSV: ragged row");
    PricingRow row;
    row.p_clean = std::stod(f[1]);
    if (!f[2].empty()) row.sigma = std::stod(f[2]);
    row.score = std::stod(f[3]);
    PricingTable* table = nullptr;
    for (auto& t : tables)
      if (t.dataset == f[0]) table = &t;
    if (!table) {
      tables.push_back({f[0], {}});
      table = &tables.back();
    }
    table->rows.push_back(row);
  }
  return tables;
}

void write_bounds(
    const std::vector<std::pair<std::string, PricingBound>>& bounds,
    const std::string& path) {
  json arr = json::array();
  for (const auto& [dataset, b] : bounds) {
    json j;
    j["dataset"] = dataset;
    j["sigma"] = b.sigma;
    j["inv_c_lower"] = b.inv_c_lower;
    if (std::isfinite(b.inv_c_upper))
      j["inv_c_upper"] = b.inv_c_upper;
    else
      j["inv_c_upper"] = nullptr;
    j["valid"] = b.valid;
    j["witness_lower"] = b.witness_lower;
    j["witness_upper"] = b.witness_upper;
    arr.push_back(j);
  }
  spit(path, arr.dump(2) + "\n");
}

void write_report(const EstimateReport& report, const std::string& path) {
  json j;
  json res;
  for (std::size_t v = 0; v < report.w1_residuals.size(); ++v)
    res["dir_" + std::to_string(v)] = report.w1_residuals[v];
  j["w1_residuals"] = res;
  j["n_d"] = report.n_d;
  j["n_l"] = report.n_l;
  json sub = json::array();
  for (int i = 0; i < report.subspace.rows(); ++i) {
    json row = json::array();
    for (int c = 0; c < report.subspace.cols(); ++c)
      row.push_back(report.subspace(i, c));
    sub.push_back(row);
  }
  j["subspace"] = sub;
  json mres = json::array();
  for (double r : report.moment_residuals) mres.push_back(r);
  j["moment_residuals"] = mres;
  j["precondition_ratio"] = report.precondition_ratio;
  j["buckets"] = report.buckets;
  j["bucket_fallback"] = report.bucket_fallback;
  j["interval"] = {report.interval_lo, report.interval_hi};
  spit(path, j.dump(2) + "\n");
}

void write_loss_trace(const std::vector<double>& losses,
                      const std::string& path) {
  std::ostringstream out;
  out << "iter,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i)
    out << i << "," << format_double(losses[i]) << "\n";
  spit(path, out.str());
}

}  // namespace amm::io
