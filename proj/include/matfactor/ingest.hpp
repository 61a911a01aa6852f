#pragma once

#include <compare>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace matfactor {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Calendar month, the time index of every series in the library.
struct MonthStamp {
  int year = 2000;
  int month = 1;

  static MonthStamp from_yyyymm(int yyyymm);
  /// Accepts "YYYYMM" or "YYYY-MM".
  static MonthStamp parse(std::string_view token);

  int yyyymm() const { return year * 100 + month; }
  /// Months since year 0; consecutive months differ by one.
  int ordinal() const { return year * 12 + (month - 1); }
  MonthStamp next() const;
  std::string to_string() const;  // "YYYY-MM"

  friend auto operator<=>(const MonthStamp&, const MonthStamp&) = default;
};

/// Closed interval of months.
struct MonthRange {
  MonthStamp first;
  MonthStamp last;

  /// "YYYY-MM:YYYY-MM"
  static MonthRange parse(std::string_view text);
  bool contains(const MonthStamp& m) const { return first <= m && m <= last; }
};

/// Dated sequence of n1 x n2 return matrices. Missing entries hold NaN and are
/// flagged in the mask.
struct MatrixPanel {
  std::vector<MonthStamp> dates;
  std::vector<Eigen::MatrixXd> values;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<BoolMatrix> missing;

  std::size_t periods() const { return dates.size(); }
  Eigen::Index rows() const { return static_cast<Eigen::Index>(row_labels.size()); }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(col_labels.size()); }
  std::size_t missing_count() const;

  /// Fully observed panel with default labels.
  static MatrixPanel from_matrices(std::vector<MonthStamp> dates,
                                   std::vector<Eigen::MatrixXd> values);
};

/// Dated, named factor series; values are T x K.
struct FactorSeries {
  std::vector<MonthStamp> dates;
  std::vector<std::string> names;
  Eigen::MatrixXd values;

  std::size_t periods() const { return dates.size(); }
  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Throws a schema error when the name is absent.
  Eigen::VectorXd column(std::string_view name) const;
  /// Subset of columns, in the order given.
  FactorSeries select(const std::vector<std::string>& wanted) const;
};

/// Individual stock returns, T x n, with NaN plus mask for missing months.
struct StockPanel {
  std::vector<MonthStamp> dates;
  std::vector<std::string> stock_ids;
  Eigen::MatrixXd returns;
  BoolMatrix missing;

  std::size_t periods() const { return dates.size(); }
  std::size_t size() const { return stock_ids.size(); }
  std::size_t observation_count(std::size_t stock) const;
};

struct AlignedDataset {
  MatrixPanel panel;
  FactorSeries factors;
  std::optional<StockPanel> stocks;
  std::vector<MonthStamp> sample_dates;
};

enum class PortfolioWeighting { kValue, kEqual };

bool is_missing_sentinel(double value);

// French-data-library layout: optional preamble, a header row whose first cell
// is empty, then "YYYYMM,v1,...,vK" rows up to the first blank line. Columns
// map size-major onto the panel: portfolio k -> (k / n2, k % n2).
MatrixPanel parse_ff_portfolio_csv(std::istream& in, int n1, int n2,
                                   PortfolioWeighting weighting = PortfolioWeighting::kValue);
MatrixPanel parse_ff_portfolio_csv(std::string_view text, int n1, int n2,
                                   PortfolioWeighting weighting = PortfolioWeighting::kValue);

FactorSeries parse_ff_factors_csv(std::istream& in, const std::vector<std::string>& expected_names);
FactorSeries parse_ff_factors_csv(std::string_view text,
                                  const std::vector<std::string>& expected_names);

/// Joins two factor files on their common months. Names must not collide.
FactorSeries merge_factor_series(const FactorSeries& a, const FactorSeries& b);

/// Wide stock layout: header "date,id1,...,idn"; empty, NA and sentinel cells
/// are missing.
StockPanel parse_stock_csv(std::istream& in);
StockPanel parse_stock_csv(std::string_view text);

AlignedDataset align_and_filter(const MatrixPanel& panel, const FactorSeries& factors,
                                const std::optional<StockPanel>& stocks, MonthStamp start,
                                MonthStamp end, const std::vector<MonthRange>& exclusions);

/// Keeps stocks with strictly more than min_obs non-missing months.
StockPanel min_obs_filter(const StockPanel& stocks, int min_obs);

// Restrictions to an ordered subset of dates; every requested date must exist.
MatrixPanel restrict_dates(const MatrixPanel& panel, const std::vector<MonthStamp>& dates);
FactorSeries restrict_dates(const FactorSeries& factors, const std::vector<MonthStamp>& dates);
StockPanel restrict_dates(const StockPanel& stocks, const std::vector<MonthStamp>& dates);

/// Consecutive months starting at first.
std::vector<MonthStamp> month_sequence(MonthStamp first, std::size_t count);

}  // namespace matfactor
