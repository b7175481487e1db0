#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pairit/stats/linear_model.hpp"

namespace pairit::stats {

// Column store for model inputs. Numeric cells that are missing hold NaN.
// Text columns (ids) are kept separately and factorized on demand.
class DataTable {
 public:
  std::size_t rows() const { return rows_; }
  bool has(const std::string& name) const;
  bool has_text(const std::string& name) const { return text_.contains(name); }

  void add(const std::string& name, std::vector<double> values);
  void add_text(const std::string& name, std::vector<std::string> values);

  const std::vector<double>& col(const std::string& name) const;  // throws MissingColumn
  const std::vector<std::string>& text(const std::string& name) const;
  // Integer ids for a text or numeric column (equal values share an id).
  std::vector<std::int64_t> ids(const std::string& name) const;

  // Header row, then one row per record. Cells that parse fully as numbers
  // become numeric columns unless any non-empty cell in the column does not.
  static DataTable read_csv(std::istream& in);
  static DataTable load_csv(const std::string& path);

 private:
  std::size_t rows_ = 0;
  bool sized_ = false;
  std::map<std::string, std::vector<double>> num_;
  std::map<std::string, std::vector<std::string>> text_;
  void size_check(std::size_t n);
};

inline const std::vector<std::string> kDemographicControls = {
    "age", "female", "openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"};

struct ModelSpec {
  std::string outcome;
  std::vector<std::string> regressors;  // intercept is added first, named "(Intercept)"
  std::optional<std::string> cluster;   // CR1 when set
  std::optional<std::string> group;     // random intercept when set
};

// Rows with a missing outcome, regressor, or id are dropped.
DesignMatrix build_design(const DataTable& t, const ModelSpec& spec);
ModelFit fit(const DataTable& t, const ModelSpec& spec);

// Y = delta HAI + beta X + e, with HC1 (or CR1 when `cluster` is given).
ModelFit fit_arm_effect(const DataTable& t, const std::string& outcome, bool withDemographics,
                 const std::optional<std::string>& cluster = std::nullopt);

// Adds Recognition and HAI x Recognition (column "hai:recognition").
ModelFit fit_recognition_interaction(const DataTable& t, const std::string& outcome, bool withDemographics);

// Field model: outcome on HAI, Text, Image, Click, Spend with a random
// intercept per campaign.
ModelFit fit_field(const DataTable& t, const std::string& outcome);

std::string stars(double p);

struct TableColumn {
  std::string title;
  ModelFit fit;
};

// Coefficient over SE in parentheses, stars at 0.05 / 0.01 / 0.001.
// `rows` picks and orders the regressors to show (all when empty).
void render_table(std::ostream& out, const std::vector<TableColumn>& columns,
                  const std::vector<std::string>& rows = {});

}  // namespace pairit::stats
