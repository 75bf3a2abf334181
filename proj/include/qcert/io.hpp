#pragma once

// Text formats:
//
//   POVM file      '#' comments; first data line "m d"; then m blocks of d
//                  lines, each line holding d entries "re,im" (row-major).
//                  An objective matrix is a POVM file with m = 1.
//   region file    "key = value" lines: povm_id, povm_file (relative to the
//                  region file), frequencies, eps1, eps2, delta.
//   CSV rows       measurement records and certified bounds.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "certifier.hpp"

namespace qcert::io {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& token, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(context + ": cannot parse number '" + token + "'");
  }
}

inline std::vector<std::string> data_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

inline std::vector<ComplexMatrix> read_matrix_blocks(std::istream& in, const std::string& context) {
  const auto lines = data_lines(in);
  if (lines.empty()) throw ValidationError(context + ": empty file");
  std::istringstream head(lines[0]);
  long long m = 0, d = 0;
  if (!(head >> m >> d) || m < 1 || d < 1)
    throw ValidationError(context + ": first line must be 'm d' with positive integers");
  if (static_cast<long long>(lines.size()) != 1 + m * d)
    throw ValidationError(context + ": expected " + std::to_string(m * d) + " matrix rows, found " +
                          std::to_string(lines.size() - 1));
  std::vector<ComplexMatrix> blocks;
  std::size_t row_line = 1;
  for (long long k = 0; k < m; ++k) {
    ComplexMatrix a(d, d);
    for (long long i = 0; i < d; ++i, ++row_line) {
      std::istringstream row(lines[row_line]);
      std::string tok;
      long long j = 0;
      while (row >> tok) {
        if (j >= d) throw ValidationError(context + ": too many entries on line " + std::to_string(row_line + 1));
        const auto comma = tok.find(',');
        if (comma == std::string::npos)
          throw ValidationError(context + ": entry '" + tok + "' is not a 're,im' pair");
        a(i, j) = Complex(parse_double(tok.substr(0, comma), context),
                          parse_double(tok.substr(comma + 1), context));
        ++j;
      }
      if (j != d) throw ValidationError(context + ": row has " + std::to_string(j) + " entries, expected " + std::to_string(d));
    }
    blocks.push_back(std::move(a));
  }
  return blocks;
}

inline void write_matrix_blocks(std::ostream& out, const std::vector<ComplexMatrix>& blocks,
                                const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << "\n";
  const Eigen::Index d = blocks.empty() ? 0 : blocks.front().rows();
  out << blocks.size() << " " << d << "\n";
  for (const auto& a : blocks) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        if (j > 0) out << ' ';
        out << format_double(a(i, j).real()) << ',' << format_double(a(i, j).imag());
      }
      out << '\n';
    }
  }
}

inline Povm read_povm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open POVM file " + path.string());
  return Povm(read_matrix_blocks(in, path.string()), path.stem().string());
}

inline void write_povm(const std::filesystem::path& path, const Povm& povm) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_matrix_blocks(out, povm.effects(), "povm " + povm.id());
}

inline Observable read_observable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open matrix file " + path.string());
  auto blocks = read_matrix_blocks(in, path.string());
  if (blocks.size() != 1) throw ValidationError(path.string() + ": an objective file holds exactly one matrix");
  return Observable(blocks.front());
}

inline void write_observable(const std::filesystem::path& path, const Observable& c) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_matrix_blocks(out, {c.matrix()}, "objective");
}

// "key = value" pairs; duplicate keys are rejected.
inline std::map<std::string, std::string> read_key_values(std::istream& in, const std::string& context) {
  std::map<std::string, std::string> kv;
  for (const auto& line : data_lines(in)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(context + ": line '" + line + "' is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError(context + ": empty key");
    if (!kv.emplace(key, value).second) throw ValidationError(context + ": duplicate key '" + key + "'");
  }
  return kv;
}

inline std::vector<double> parse_list(const std::string& value, const std::string& context) {
  std::string s = value;
  for (char& ch : s)
    if (ch == ',') ch = ' ';
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, context));
  return out;
}

inline std::string region_block(const ConfidenceRegion& r, const std::string& povm_file) {
  std::ostringstream out;
  out << "povm_id = " << r.target.id() << "\n";
  if (!povm_file.empty()) out << "povm_file = " << povm_file << "\n";
  out << "frequencies =";
  for (Eigen::Index k = 0; k < r.frequencies.size(); ++k) out << ' ' << format_double(r.frequencies(k));
  out << "\n";
  out << "eps1 = " << format_double(r.eps1) << "\n";
  out << "eps2 = " << format_double(r.eps2) << "\n";
  out << "delta = " << format_double(r.delta) << "\n";
  return out.str();
}

inline ConfidenceRegion read_region(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open region file " + path.string());
  const auto kv = read_key_values(in, path.string());
  for (const auto& [k, v] : kv)
    if (k != "povm_id" && k != "povm_file" && k != "frequencies" && k != "eps1" && k != "eps2" && k != "delta")
      throw ValidationError(path.string() + ": unknown key '" + k + "'");
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(path.string() + ": missing key '" + key + "'");
    return it->second;
  };
  const std::filesystem::path povm_path = path.parent_path() / need("povm_file");
  Povm povm = read_povm(povm_path);
  if (auto it = kv.find("povm_id"); it != kv.end()) {
    std::vector<ComplexMatrix> effects = povm.effects();
    povm = Povm(std::move(effects), it->second);
  }
  const auto f = parse_list(need("frequencies"), path.string());
  RealVector freq(static_cast<Eigen::Index>(f.size()));
  for (std::size_t k = 0; k < f.size(); ++k) freq(static_cast<Eigen::Index>(k)) = f[k];
  ConfidenceRegion r{povm, freq, parse_double(need("eps1"), path.string()),
                     parse_double(need("eps2"), path.string()), parse_double(need("delta"), path.string())};
  validate_region(r);
  return r;
}

inline std::string record_csv_row(const MeasurementRecord& rec) {
  std::string row = rec.povm_id + "," + std::to_string(rec.shots);
  for (auto c : rec.counts) row += "," + std::to_string(c);
  return row;
}

inline MeasurementRecord parse_record_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (cells.size() < 3) throw ValidationError("measurement record row needs povm_id, N and counts");
  MeasurementRecord rec;
  rec.povm_id = cells[0];
  rec.shots = std::stoull(cells[1]);
  std::uint64_t total = 0;
  for (std::size_t i = 2; i < cells.size(); ++i) {
    rec.counts.push_back(std::stoull(cells[i]));
    total += rec.counts.back();
  }
  if (total != rec.shots) throw ValidationError("measurement record: counts do not sum to N");
  return rec;
}

inline const char* bound_csv_header() { return "direction,dual_bound,primal_value,residual,status,iterations"; }

inline std::string bound_csv_row(const CertifiedBound& b) {
  return std::string(to_string(b.direction)) + "," + format_double(b.dual_bound) + "," +
         format_double(b.primal_value) + "," + format_double(b.primal_residual) + "," +
         std::string(to_string(b.status)) + "," + std::to_string(b.iterations);
}

} // namespace qcert::io
