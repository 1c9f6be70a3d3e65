#ifndef CCSICA_IO_HPP
#define CCSICA_IO_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccsica/signals.hpp"
#include "ccsica/types.hpp"

namespace ccsica {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace detail {

inline std::string csv_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

/// Dataset layout: header channel_0..channel_{M-1}, one row per time sample.
inline std::string dataset_to_csv(const SignalMatrix& x) {
  std::string out;
  for (Eigen::Index c = 0; c < x.rows(); ++c) {
    if (c > 0) out += ',';
    out += "channel_" + std::to_string(c);
  }
  out += "\r\n";
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    for (Eigen::Index c = 0; c < x.rows(); ++c) {
      if (c > 0) out += ',';
      out += detail::csv_double(x(c, t));
    }
    out += "\r\n";
  }
  return out;
}

inline SignalMatrix dataset_from_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset CSV: missing header");
  const auto header = detail::split_csv_line(line);
  const Eigen::Index m = static_cast<Eigen::Index>(header.size());
  if (m < 1 || header[0].rfind("channel_", 0) != 0) {
    throw std::runtime_error("dataset CSV: expected channel_* header");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != m) {
      throw std::runtime_error("dataset CSV: ragged row");
    }
    std::vector<double> vals(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) vals[k] = std::stod(fields[k]);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("dataset CSV: no samples");
  SignalMatrix x(m, static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    for (Eigen::Index c = 0; c < m; ++c) {
      x(c, t) = rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
    }
  }
  return x;
}

/// Plain numeric matrix CSV (no header), used for demixing matrices.
inline std::string matrix_to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += detail::csv_double(m(i, j));
    }
    out += "\r\n";
  }
  return out;
}

inline Eigen::MatrixXd matrix_from_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    std::vector<double> vals(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) vals[k] = std::stod(fields[k]);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("matrix CSV: empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != m.cols()) {
      throw std::runtime_error("matrix CSV: ragged row");
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

/// Sidecar metadata written next to a generated dataset; carries everything
/// needed to score a separation against the ground truth.
struct DatasetSidecar {
  Eigen::MatrixXd mixing;
  std::uint64_t seed = 0;
  std::vector<std::string> specs;
  double noise_std = 0.0;
};

inline std::string sidecar_path(const std::string& dataset_path) {
  return dataset_path + ".json";
}

inline std::string sidecar_to_json(const DatasetSidecar& sc) {
  nlohmann::json j;
  std::vector<std::vector<double>> mixing(static_cast<std::size_t>(sc.mixing.rows()));
  for (Eigen::Index i = 0; i < sc.mixing.rows(); ++i) {
    mixing[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(sc.mixing.cols()));
    for (Eigen::Index k = 0; k < sc.mixing.cols(); ++k) {
      mixing[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = sc.mixing(i, k);
    }
  }
  j["mixing"] = mixing;
  j["seed"] = sc.seed;
  j["specs"] = sc.specs;
  j["noise_std"] = sc.noise_std;
  return j.dump(2) + "\n";
}

inline DatasetSidecar sidecar_from_json(const std::string& content) {
  const nlohmann::json j = nlohmann::json::parse(content);
  DatasetSidecar sc;
  const auto rows = j.at("mixing").get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw std::runtime_error("sidecar: empty mixing matrix");
  sc.mixing.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw std::runtime_error("sidecar: ragged mixing");
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      sc.mixing(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  sc.seed = j.value("seed", std::uint64_t{0});
  sc.specs = j.value("specs", std::vector<std::string>{});
  sc.noise_std = j.value("noise_std", 0.0);
  return sc;
}

}  // namespace ccsica

#endif  // CCSICA_IO_HPP
