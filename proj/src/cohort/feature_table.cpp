#include "cardio/cohort/feature_table.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "cardio/errors.hpp"

namespace cardio::cohort {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::string cell_location(std::size_t line, const std::string& column) {
  return "line " + std::to_string(line) + ", column '" + column + "'";
}

double parse_number(const std::string& text, std::size_t line, const std::string& column) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw ValidationError(cell_location(line, column) + ": '" + text + "' is not a number");
  }
  if (!std::isfinite(v)) {
    throw ValidationError(cell_location(line, column) + ": value is not finite");
  }
  return v;
}

void check_value(const FeatureDescriptor& f, double v, const std::string& where) {
  if (!std::isfinite(v)) {
    throw ValidationError(where + ": value is not finite");
  }
  if (is_fraction(f.kind) && (v < 0.0 || v > 1.0)) {
    throw ValidationError(where + ": fraction " + format_double(v) + " outside [0, 1]");
  }
  if ((f.kind == FeatureKind::Volume || f.kind == FeatureKind::Thickness) && v < 0.0) {
    throw ValidationError(where + ": negative value " + format_double(v));
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

FeatureTable::FeatureTable(std::vector<std::string> case_ids, Eigen::MatrixXd values,
                           std::array<ReferenceColumn, kReferenceCount> reference)
    : case_ids_(std::move(case_ids)), values_(std::move(values)), reference_(std::move(reference)) {
  const auto& catalog = FeatureCatalog::standard();
  if (static_cast<std::size_t>(values_.cols()) != kFeatureCount) {
    throw ValidationError("feature table needs " + std::to_string(kFeatureCount) + " feature columns");
  }
  if (static_cast<std::size_t>(values_.rows()) != case_ids_.size()) {
    throw ValidationError("feature table: case id count does not match row count");
  }
  if (case_ids_.size() < 2) {
    throw ValidationError("feature table needs at least 2 rows");
  }
  std::set<std::string> seen;
  for (std::size_t r = 0; r < case_ids_.size(); ++r) {
    if (case_ids_[r].empty()) throw ValidationError("row " + std::to_string(r) + ": empty case_id");
    if (!seen.insert(case_ids_[r]).second) {
      throw ValidationError("row " + std::to_string(r) + ": duplicate case_id '" + case_ids_[r] + "'");
    }
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      check_value(catalog[c], values_(r, c),
                  "row " + std::to_string(r) + " (case " + case_ids_[r] + "), column '" + catalog[c].name + "'");
    }
  }
  for (std::size_t m = 0; m < kReferenceCount; ++m) {
    auto& col = reference_[m];
    if (col.empty()) {
      col.assign(case_ids_.size(), std::nullopt);
    } else if (col.size() != case_ids_.size()) {
      throw ValidationError(std::string("reference column '") + std::string(kReferenceColumns[m]) +
                            "' length does not match row count");
    }
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (!col[r]) continue;
      const double v = *col[r];
      const std::string where = "row " + std::to_string(r) + ", column '" + std::string(kReferenceColumns[m]) + "'";
      if (!std::isfinite(v)) throw ValidationError(where + ": value is not finite");
      if (m == static_cast<std::size_t>(ReferenceMeasure::EfLvc) ? (v < 0.0 || v > 1.0) : v < 0.0) {
        throw ValidationError(where + ": value " + format_double(v) + " out of range");
      }
    }
  }
}

Eigen::MatrixXd FeatureTable::columns(std::span<const std::size_t> features) const {
  Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = values_.col(static_cast<Eigen::Index>(features[j]));
  }
  return out;
}

Eigen::MatrixXd FeatureTable::columns(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(FeatureCatalog::standard().require_index(n));
  return columns(idx);
}

bool FeatureTable::has_reference_column(ReferenceMeasure m) const {
  for (const auto& v : reference_[static_cast<std::size_t>(m)]) {
    if (v) return true;
  }
  return false;
}

std::optional<double> FeatureTable::reference(std::size_t row, ReferenceMeasure m) const {
  return reference_[static_cast<std::size_t>(m)][row];
}

std::vector<std::size_t> FeatureTable::complete_reference_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows(); ++r) {
    if (reference_[0][r] && reference_[1][r] && reference_[2][r]) out.push_back(r);
  }
  return out;
}

double derive_lvc_ed_volume(double v_lvc_es, double ef_lvc) {
  if (!(ef_lvc >= 0.0 && ef_lvc < 1.0)) {
    throw ValidationError("ef_lvc " + format_double(ef_lvc) + " outside [0, 1): cannot derive V_LVC,ED");
  }
  if (!(v_lvc_es >= 0.0)) {
    throw ValidationError("v_lvc_es " + format_double(v_lvc_es) + " is negative: cannot derive V_LVC,ED");
  }
  return v_lvc_es / (1.0 - ef_lvc);
}

FeatureTable load_feature_table(std::istream& in) {
  const auto& catalog = FeatureCatalog::standard();
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError("CSV input is empty: header row required");
  ++line_no;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  const auto header = split_csv_line(line);

  std::optional<std::size_t> id_col;
  std::array<std::optional<std::size_t>, kFeatureCount> feature_col;
  std::array<std::optional<std::size_t>, kReferenceCount> ref_col;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (!seen.insert(name).second) throw ValidationError("header: duplicate column '" + name + "'");
    if (name == "case_id") {
      id_col = c;
    } else if (auto f = catalog.index_of(name)) {
      feature_col[*f] = c;
    } else {
      bool matched = false;
      for (std::size_t m = 0; m < kReferenceCount; ++m) {
        if (name == kReferenceColumns[m]) {
          ref_col[m] = c;
          matched = true;
        }
      }
      if (!matched) throw ValidationError("header: unknown column '" + name + "'");
    }
  }
  if (!id_col) throw ValidationError("header: missing required column 'case_id'");
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!feature_col[f]) throw ValidationError("header: missing required column '" + catalog[f].name + "'");
  }

  std::vector<std::string> ids;
  std::vector<std::array<double, kFeatureCount>> rows;
  std::array<ReferenceColumn, kReferenceCount> reference;
  std::map<std::string, std::size_t> id_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
    }
    const std::string& id = fields[*id_col];
    if (id.empty()) throw ValidationError(cell_location(line_no, "case_id") + ": empty case_id");
    if (auto [it, inserted] = id_line.emplace(id, line_no); !inserted) {
      throw ValidationError(cell_location(line_no, "case_id") + ": duplicate case_id '" + id +
                            "' (first seen on line " + std::to_string(it->second) + ")");
    }
    std::array<double, kFeatureCount> row{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto& text = fields[*feature_col[f]];
      if (text.empty()) throw ValidationError(cell_location(line_no, catalog[f].name) + ": missing value");
      row[f] = parse_number(text, line_no, catalog[f].name);
      check_value(catalog[f], row[f], cell_location(line_no, catalog[f].name));
    }
    for (std::size_t m = 0; m < kReferenceCount; ++m) {
      std::optional<double> v;
      if (ref_col[m] && !fields[*ref_col[m]].empty()) {
        const std::string col(kReferenceColumns[m]);
        v = parse_number(fields[*ref_col[m]], line_no, col);
        const bool bad = m == static_cast<std::size_t>(ReferenceMeasure::EfLvc) ? (*v < 0.0 || *v > 1.0) : *v < 0.0;
        if (bad) {
          throw ValidationError(cell_location(line_no, col) + ": value " + format_double(*v) + " out of range");
        }
      }
      reference[m].push_back(v);
    }
    ids.push_back(id);
    rows.push_back(row);
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = rows[r][f];
  }
  return FeatureTable(std::move(ids), std::move(values), std::move(reference));
}

FeatureTable load_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file '" + path.string() + "'");
  return load_feature_table(in);
}

void save_feature_table(const FeatureTable& table, std::ostream& out) {
  const auto& catalog = FeatureCatalog::standard();
  bool with_reference = false;
  for (std::size_t m = 0; m < kReferenceCount; ++m) {
    with_reference = with_reference || table.has_reference_column(static_cast<ReferenceMeasure>(m));
  }
  out << "case_id";
  for (const auto& f : catalog.entries()) out << ',' << f.name;
  if (with_reference) {
    for (auto name : kReferenceColumns) out << ',' << name;
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << table.case_ids()[r];
    for (std::size_t f = 0; f < kFeatureCount; ++f) out << ',' << format_double(table.value(r, f));
    if (with_reference) {
      for (std::size_t m = 0; m < kReferenceCount; ++m) {
        out << ',';
        if (auto v = table.reference(r, static_cast<ReferenceMeasure>(m))) out << format_double(*v);
      }
    }
    out << '\n';
  }
}

void save_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  save_feature_table(table, out);
}

}  // namespace cardio::cohort
