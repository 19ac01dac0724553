#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "vgc/training.hpp"

namespace vgc {

inline constexpr std::string_view kEmptyCell = "—";

/// "0.75 ± 0.01"; "—" when the record has fewer than 3 accuracies.
inline std::string format_accuracy(const ExperimentRecord& r) {
  if (r.accuracies.size() < 3) return std::string(kEmptyCell);
  const auto s = r.summary();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", s.mean, s.std);
  return buf;
}

/// 2356807 -> "2,356,807".
inline std::string format_count(std::uint64_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  const int lead = int(digits.size()) % 3;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i && int(i) % 3 == lead) out += ',';
    out += digits[i];
  }
  return out;
}

/// CNN params / GNN params, truncated to one decimal.
inline std::string format_compression(std::uint64_t cnn, std::uint64_t gnn) {
  if (gnn == 0) throw ParameterError("compression factor: GNN has no parameters");
  const std::uint64_t tenths = cnn * 10 / gnn;
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

/// First CNN record over first GNN record, if both are present.
inline std::optional<std::string> compression_factor(std::span<const ExperimentRecord> records) {
  const ExperimentRecord* cnn = nullptr;
  const ExperimentRecord* gnn = nullptr;
  for (const auto& r : records) {
    if (!cnn && r.model == "CNN") cnn = &r;
    if (!gnn && r.model == "GNN") gnn = &r;
  }
  if (!cnn || !gnn || gnn->parameters == 0) return std::nullopt;
  return format_compression(cnn->parameters, gnn->parameters);
}

namespace detail {

// Display width, counting each UTF-8 code point once.
inline std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return w;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string render_text_table(std::span<const ExperimentRecord> records) {
  std::vector<std::array<std::string, 5>> rows;
  rows.push_back({"Data", "Model", "Train-Test", "Accuracy", "Parameters"});
  for (const auto& r : records) {
    rows.push_back({r.data, r.model, r.train_test, format_accuracy(r), format_count(r.parameters)});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], detail::display_width(row[c]));
  }
  std::ostringstream out;
  auto line = [&](const std::array<std::string, 5>& row) {
    for (std::size_t c = 0; c < 5; ++c) {
      out << row[c];
      if (c + 1 < 5) out << std::string(width[c] - detail::display_width(row[c]) + 2, ' ');
    }
    out << '\n';
  };
  line(rows[0]);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out << std::string(total - 2, '-') << '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) line(rows[i]);
  if (auto f = compression_factor(records)) {
    out << "\nCompression factor (CNN/GNN parameters): " << *f << '\n';
  }
  return out.str();
}

/// One row per record; accuracies are written in full precision separated
/// by ';' so the CSV round-trips.
inline std::string render_csv(std::span<const ExperimentRecord> records) {
  std::ostringstream out;
  out << "Data,Model,Train-Test,Accuracy,Parameters,Mean,Std,Seeds\n";
  for (const auto& r : records) {
    std::string accs;
    for (std::size_t i = 0; i < r.accuracies.size(); ++i) {
      if (i) accs += ';';
      accs += detail::format_double(r.accuracies[i]);
    }
    std::string mean, sd;
    if (r.accuracies.size() >= 3) {
      const auto s = r.summary();
      mean = detail::format_double(s.mean);
      sd = detail::format_double(s.std);
    }
    out << detail::csv_field(r.data) << ',' << detail::csv_field(r.model) << ','
        << detail::csv_field(r.train_test) << ',' << detail::csv_field(format_accuracy(r)) << ','
        << r.parameters << ',' << mean << ',' << sd << ',' << accs << '\n';
  }
  if (auto f = compression_factor(records)) out << "# compression factor," << *f << '\n';
  return out.str();
}

struct CsvRow {
  std::string data, model, train_test;
  std::uint64_t parameters = 0;
  std::vector<double> accuracies;
  friend bool operator==(const CsvRow&, const CsvRow&) = default;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw FormatError("csv: unterminated quote");
  return fields;
}

inline std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<CsvRow> rows;
  if (!std::getline(in, line)) throw FormatError("csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw FormatError("csv: expected 8 fields, got " + std::to_string(f.size()));
    CsvRow r{f[0], f[1], f[2], 0, {}};
    try {
      r.parameters = std::stoull(f[4]);
      std::size_t pos = 0;
      while (pos < f[7].size()) {
        const auto next = f[7].find(';', pos);
        const auto end = next == std::string::npos ? f[7].size() : next;
        r.accuracies.push_back(std::stod(f[7].substr(pos, end - pos)));
        pos = end + 1;
      }
    } catch (const std::logic_error&) {
      throw FormatError("csv: bad number in row '" + f[0] + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline CsvRow csv_row(const ExperimentRecord& r) {
  return {r.data, r.model, r.train_test, r.parameters, r.accuracies};
}

/// Writes <prefix>.csv and <prefix>.txt.
inline void write_report(std::span<const ExperimentRecord> records,
                         const std::filesystem::path& prefix) {
  if (records.empty()) throw ParameterError("report: no records");
  auto put = [](const std::filesystem::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << s;
  };
  put(std::filesystem::path(prefix.string() + ".csv"), render_csv(records));
  put(std::filesystem::path(prefix.string() + ".txt"), render_text_table(records));
}

}  // namespace vgc
