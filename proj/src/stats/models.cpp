#include "pairit/stats/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "pairit/core/error.hpp"

namespace pairit::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace

void DataTable::size_check(std::size_t n) {
  if (sized_ && n != rows_) throw Error(ErrorCode::InvalidSample, "column length differs from table");
  rows_ = n;
  sized_ = true;
}

bool DataTable::has(const std::string& name) const { return num_.contains(name); }

void DataTable::add(const std::string& name, std::vector<double> values) {
  size_check(values.size());
  num_[name] = std::move(values);
}

void DataTable::add_text(const std::string& name, std::vector<std::string> values) {
  size_check(values.size());
  text_[name] = std::move(values);
}

const std::vector<double>& DataTable::col(const std::string& name) const {
  auto it = num_.find(name);
  if (it == num_.end()) throw Error(ErrorCode::MissingColumn, name);
  return it->second;
}

const std::vector<std::string>& DataTable::text(const std::string& name) const {
  auto it = text_.find(name);
  if (it == text_.end()) throw Error(ErrorCode::MissingColumn, name);
  return it->second;
}

std::vector<std::int64_t> DataTable::ids(const std::string& name) const {
  std::vector<std::int64_t> out(rows_);
  if (auto it = text_.find(name); it != text_.end()) {
    std::unordered_map<std::string, std::int64_t> seen;
    for (std::size_t i = 0; i < rows_; ++i) {
      out[i] = it->second[i].empty() ? -1 : seen.try_emplace(it->second[i], seen.size()).first->second;
    }
    return out;
  }
  const auto& c = col(name);
  for (std::size_t i = 0; i < rows_; ++i) {
    out[i] = std::isnan(c[i]) ? -1 : static_cast<std::int64_t>(std::llround(c[i]));
  }
  return out;
}

DataTable DataTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidSample, "empty CSV");
  const auto header = split_csv_line(line);
  std::vector<std::vector<std::string>> cells(header.size());
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto row = split_csv_line(line);
    if (row.size() != header.size()) throw Error(ErrorCode::InvalidSample, "ragged CSV row: " + line);
    for (std::size_t j = 0; j < row.size(); ++j) cells[j].push_back(std::move(row[j]));
  }
  DataTable t;
  for (std::size_t j = 0; j < header.size(); ++j) {
    std::vector<double> nums;
    bool numeric = true;
    for (const auto& c : cells[j]) {
      if (c.empty()) {
        nums.push_back(kNaN);
      } else if (auto v = parse_number(c)) {
        nums.push_back(*v);
      } else {
        numeric = false;
        break;
      }
    }
    if (numeric) {
      t.add(header[j], std::move(nums));
    } else {
      t.add_text(header[j], std::move(cells[j]));
    }
  }
  if (header.empty()) t.size_check(0);
  return t;
}

DataTable DataTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInputs, "cannot open " + path);
  return read_csv(in);
}

DesignMatrix build_design(const DataTable& t, const ModelSpec& spec) {
  const auto& y = t.col(spec.outcome);
  std::vector<const std::vector<double>*> cols;
  for (const auto& r : spec.regressors) cols.push_back(&t.col(r));
  std::vector<std::int64_t> cl, gr;
  if (spec.cluster) cl = t.ids(*spec.cluster);
  if (spec.group) gr = t.ids(*spec.group);

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    bool ok = !std::isnan(y[i]);
    for (const auto* c : cols) ok = ok && !std::isnan((*c)[i]);
    if (!cl.empty()) ok = ok && cl[i] >= 0;
    if (!gr.empty()) ok = ok && gr[i] >= 0;
    if (ok) keep.push_back(i);
  }

  DesignMatrix d;
  const auto n = static_cast<Eigen::Index>(keep.size());
  const auto k = static_cast<Eigen::Index>(cols.size() + 1);
  d.X.resize(n, k);
  d.y.resize(n);
  d.names.push_back("(Intercept)");
  for (const auto& r : spec.regressors) d.names.push_back(r);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = keep[i];
    d.y(i) = y[row];
    d.X(i, 0) = 1.0;
    for (std::size_t j = 0; j < cols.size(); ++j) d.X(i, static_cast<Eigen::Index>(j + 1)) = (*cols[j])[row];
    if (!cl.empty()) d.clusters.push_back(cl[row]);
    if (!gr.empty()) d.groups.push_back(gr[row]);
  }
  return d;
}

ModelFit fit(const DataTable& t, const ModelSpec& spec) {
  const auto d = build_design(t, spec);
  if (spec.group) return mixed_random_intercept(d);
  if (spec.cluster) return ols_cluster(d);
  return ols(d);
}

ModelFit fit_arm_effect(const DataTable& t, const std::string& outcome, bool withDemographics,
                 const std::optional<std::string>& cluster) {
  ModelSpec spec{outcome, {"hai"}, cluster, std::nullopt};
  if (withDemographics) spec.regressors.insert(spec.regressors.end(), kDemographicControls.begin(), kDemographicControls.end());
  return fit(t, spec);
}

ModelFit fit_recognition_interaction(const DataTable& t, const std::string& outcome, bool withDemographics) {
  DataTable ext = t;
  const auto& hai = t.col("hai");
  const auto& rec = t.col("recognition");
  std::vector<double> inter(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) inter[i] = hai[i] * rec[i];
  ext.add("hai:recognition", std::move(inter));
  ModelSpec spec{outcome, {"hai", "recognition", "hai:recognition"}, std::nullopt, std::nullopt};
  if (withDemographics) spec.regressors.insert(spec.regressors.end(), kDemographicControls.begin(), kDemographicControls.end());
  return fit(ext, spec);
}

ModelFit fit_field(const DataTable& t, const std::string& outcome) {
  return fit(t, ModelSpec{outcome, {"hai", "text", "image", "click", "spend"}, std::nullopt, "campaign"});
}

std::string stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

void render_table(std::ostream& out, const std::vector<TableColumn>& columns, const std::vector<std::string>& rows) {
  std::vector<std::string> names = rows;
  if (names.empty()) {
    for (const auto& c : columns) {
      for (const auto& n : c.fit.names) {
        if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
      }
    }
  }
  auto num = [](double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(3) << v;
    return ss.str();
  };
  std::size_t label_w = 12;
  for (const auto& n : names) label_w = std::max(label_w, n.size() + 2);
  constexpr int cell_w = 16;

  out << std::left << std::setw(static_cast<int>(label_w)) << "";
  for (const auto& c : columns) out << std::right << std::setw(cell_w) << c.title;
  out << '\n';
  for (const auto& n : names) {
    out << std::left << std::setw(static_cast<int>(label_w)) << n;
    for (const auto& c : columns) {
      std::string cell;
      if (std::find(c.fit.names.begin(), c.fit.names.end(), n) != c.fit.names.end()) {
        cell = num(c.fit.coef_of(n)) + stars(c.fit.p_of(n));
      }
      out << std::right << std::setw(cell_w) << cell;
    }
    out << '\n' << std::left << std::setw(static_cast<int>(label_w)) << "";
    for (const auto& c : columns) {
      std::string cell;
      if (std::find(c.fit.names.begin(), c.fit.names.end(), n) != c.fit.names.end()) {
        cell = "(" + num(c.fit.se_of(n)) + ")";
      }
      out << std::right << std::setw(cell_w) << cell;
    }
    out << '\n';
  }
  out << std::left << std::setw(static_cast<int>(label_w)) << "N";
  for (const auto& c : columns) out << std::right << std::setw(cell_w) << c.fit.n;
  out << '\n';
  out << "Notes: *p<0.05, **p<0.01, ***p<0.001.\n";
}

}  // namespace pairit::stats
