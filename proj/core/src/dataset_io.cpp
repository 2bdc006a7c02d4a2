#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hte/dataset_io.hpp"

namespace hte {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

TrialDataset CsvDataset::trial(const std::string& id, std::uint64_t seed) const {
  TrialDataset t{covariates, a, y, id, seed};
  validate(t);
  return t;
}

EvaluationSet CsvDataset::evaluation() const {
  if (!tau) throw std::invalid_argument("CsvDataset: tau column required for evaluation view");
  EvaluationSet eval{covariates, *tau, mu0, mu1};
  validate(eval);
  return eval;
}

CsvDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty dataset file: " + path);
  auto cols = split_csv_line(header);
  for (auto& c : cols) c = trim(c);

  std::size_t p = 0;
  while (p < cols.size() && cols[p] == "x" + std::to_string(p + 1)) ++p;
  if (p == 0) throw std::runtime_error(path + ": expected covariate columns x1..xp");
  std::size_t pos = p;
  auto expect = [&](const std::string& name) {
    if (pos >= cols.size() || cols[pos] != name)
      throw std::runtime_error(path + ": expected column '" + name + "'");
    ++pos;
  };
  expect("a");
  expect("y");
  bool has_tau = pos < cols.size() && cols[pos] == "tau";
  if (has_tau) ++pos;
  bool has_mu = pos + 1 < cols.size() + 1 && pos < cols.size() && cols[pos] == "mu0";
  if (has_mu) {
    ++pos;
    expect("mu1");
  }
  if (pos != cols.size()) throw std::runtime_error(path + ": unexpected trailing columns");

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != cols.size())
      throw std::runtime_error(path + ": row with wrong field count");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      try {
        row.push_back(std::stod(f));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": non-numeric field '" + f + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  CsvDataset out;
  Matrix X(n, static_cast<Eigen::Index>(p));
  out.a.resize(n);
  out.y.resize(n);
  if (has_tau) out.tau = Vector(n);
  if (has_mu) {
    out.mu0 = Vector(n);
    out.mu1 = Vector(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    std::size_t j = 0;
    for (; j < p; ++j) X(i, static_cast<Eigen::Index>(j)) = row[j];
    out.a[i] = row[j++];
    out.y[i] = row[j++];
    if (has_tau) (*out.tau)[i] = row[j++];
    if (has_mu) {
      (*out.mu0)[i] = row[j++];
      (*out.mu1)[i] = row[j++];
    }
  }
  out.covariates = DesignMatrix(std::move(X));
  return out;
}

void write_dataset_csv(const std::string& path, const CsvDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);

  const Eigen::Index n = data.covariates.rows();
  const Eigen::Index p = data.covariates.cols();
  for (Eigen::Index j = 0; j < p; ++j) out << "x" << (j + 1) << ",";
  out << "a,y";
  if (data.tau) out << ",tau";
  if (data.mu0) out << ",mu0,mu1";
  out << "\n";

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) out << format_double(data.covariates.values(i, j)) << ",";
    out << format_double(data.a[i]) << "," << format_double(data.y[i]);
    if (data.tau) out << "," << format_double((*data.tau)[i]);
    if (data.mu0) out << "," << format_double((*data.mu0)[i]) << "," << format_double((*data.mu1)[i]);
    out << "\n";
  }
}

CsvDataset to_csv_dataset(const TrialDataset& trial, const EvaluationSet* eval) {
  CsvDataset out;
  out.covariates = trial.covariates;
  out.a = trial.treatment;
  out.y = trial.outcome;
  if (eval) {
    out.tau = eval->true_cate;
    out.mu0 = eval->mu0;
    out.mu1 = eval->mu1;
  }
  return out;
}

}  // namespace hte
