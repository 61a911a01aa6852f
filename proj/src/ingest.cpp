#include "matfactor/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "matfactor/error.hpp"
#include "text.hpp"

namespace matfactor {

using detail::split_csv;
using detail::trim;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

MonthStamp checked_month(int year, int month, std::string_view token) {
  if (year < 1900 || year > 2100 || month < 1 || month > 12) {
    raise(ErrorCode::kDomain, "invalid month '" + std::string(token) + "'");
  }
  return MonthStamp{year, month};
}

// Data-row date cell. nullopt means the token does not look like a monthly
// date at all, which ends the monthly block.
std::optional<MonthStamp> monthly_token(std::string_view token, std::size_t line_no) {
  token = trim(token);
  if (token.size() != 6) return std::nullopt;
  if (!all_digits(token)) throw ParseError(line_no, "malformed date token '" + std::string(token) + "'");
  const int year = std::stoi(std::string(token.substr(0, 4)));
  const int month = std::stoi(std::string(token.substr(4, 2)));
  if (month < 1 || month > 12 || year < 1900 || year > 2100) {
    throw ParseError(line_no, "malformed date token '" + std::string(token) + "'");
  }
  return MonthStamp{year, month};
}

bool is_header(const std::vector<std::string_view>& cells) {
  return cells.size() >= 2 && cells.front().empty() && !cells[1].empty();
}

struct CsvBlock {
  std::vector<std::string> names;
  std::vector<MonthStamp> dates;
  std::vector<std::vector<double>> rows;  // NaN where the cell is missing
  std::vector<std::vector<bool>> missing;
  std::vector<std::size_t> line_numbers;
};

enum class Sentinels { kMissing, kReject };

// Reads the first header block accepted by `want(title)` where title is the
// last non-blank line preceding the header.
template <typename Predicate>
CsvBlock read_french_block(std::istream& in, Predicate want, Sentinels sentinels) {
  std::string line;
  std::size_t line_no = 0;
  std::string title;
  bool skipping = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) {
      skipping = false;
      continue;
    }
    if (skipping) continue;
    const auto cells = split_csv(line);
    if (!is_header(cells)) {
      title = std::string(trim(line));
      continue;
    }
    if (!want(detail::lower(title))) {
      skipping = true;
      continue;
    }
    CsvBlock block;
    for (std::size_t i = 1; i < cells.size(); ++i) block.names.emplace_back(cells[i]);
    while (std::getline(in, line)) {
      ++line_no;
      if (detail::is_blank(line)) break;
      const auto row = split_csv(line);
      const auto date = monthly_token(row.front(), line_no);
      if (!date) break;
      if (row.size() != block.names.size() + 1) {
        raise(ErrorCode::kStructural, "line " + std::to_string(line_no) + ": expected " +
                                          std::to_string(block.names.size()) + " values, found " +
                                          std::to_string(row.size() - 1));
      }
      if (!block.dates.empty() && *date <= block.dates.back()) {
        raise(ErrorCode::kStructural, "line " + std::to_string(line_no) + ": duplicate or out-of-order date " +
                                          date->to_string());
      }
      std::vector<double> values(block.names.size());
      std::vector<bool> miss(block.names.size(), false);
      for (std::size_t k = 0; k < values.size(); ++k) {
        const auto cell = row[k + 1];
        std::optional<double> v;
        if (!detail::is_na_token(cell)) {
          v = detail::parse_double(cell);
          if (!v) throw ParseError(line_no, "malformed number '" + std::string(cell) + "'");
        }
        if (!v || !std::isfinite(*v) || is_missing_sentinel(*v)) {
          if (sentinels == Sentinels::kReject) {
            raise(ErrorCode::kStructural, "line " + std::to_string(line_no) + ": missing value in column '" +
                                              block.names[k] + "'");
          }
          values[k] = kNaN;
          miss[k] = true;
        } else {
          values[k] = *v;
        }
      }
      block.dates.push_back(*date);
      block.rows.push_back(std::move(values));
      block.missing.push_back(std::move(miss));
      block.line_numbers.push_back(line_no);
    }
    return block;
  }
  raise(ErrorCode::kStructural, "no monthly data block found");
}

std::vector<std::string> numbered_labels(std::string_view prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(std::string(prefix) + std::to_string(i + 1));
  return out;
}

template <typename Dates>
std::vector<std::size_t> positions_of(const Dates& have, const std::vector<MonthStamp>& wanted,
                                      std::string_view what) {
  std::vector<std::size_t> out;
  out.reserve(wanted.size());
  for (const auto& m : wanted) {
    const auto it = std::lower_bound(have.begin(), have.end(), m);
    if (it == have.end() || *it != m) {
      raise(ErrorCode::kDomain, std::string(what) + " has no observation for " + m.to_string());
    }
    out.push_back(static_cast<std::size_t>(it - have.begin()));
  }
  return out;
}

}  // namespace

MonthStamp MonthStamp::from_yyyymm(int yyyymm) {
  return checked_month(yyyymm / 100, yyyymm % 100, std::to_string(yyyymm));
}

MonthStamp MonthStamp::parse(std::string_view token) {
  token = trim(token);
  if (token.size() == 6 && all_digits(token)) {
    return checked_month(std::stoi(std::string(token.substr(0, 4))),
                         std::stoi(std::string(token.substr(4, 2))), token);
  }
  if (token.size() == 7 && token[4] == '-' && all_digits(token.substr(0, 4)) &&
      all_digits(token.substr(5, 2))) {
    return checked_month(std::stoi(std::string(token.substr(0, 4))),
                         std::stoi(std::string(token.substr(5, 2))), token);
  }
  raise(ErrorCode::kParse, "malformed month '" + std::string(token) + "' (expected YYYY-MM or YYYYMM)");
}

MonthStamp MonthStamp::next() const {
  return month == 12 ? MonthStamp{year + 1, 1} : MonthStamp{year, month + 1};
}

std::string MonthStamp::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

MonthRange MonthRange::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    raise(ErrorCode::kParse, "malformed month range '" + std::string(text) + "' (expected YYYY-MM:YYYY-MM)");
  }
  MonthRange r{MonthStamp::parse(text.substr(0, colon)), MonthStamp::parse(text.substr(colon + 1))};
  require(r.first <= r.last, ErrorCode::kDomain, "month range '" + std::string(text) + "' is reversed");
  return r;
}

std::vector<MonthStamp> month_sequence(MonthStamp first, std::size_t count) {
  std::vector<MonthStamp> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(first);
    first = first.next();
  }
  return out;
}

std::size_t MatrixPanel::missing_count() const {
  std::size_t n = 0;
  for (const auto& m : missing) n += static_cast<std::size_t>(m.count());
  return n;
}

MatrixPanel MatrixPanel::from_matrices(std::vector<MonthStamp> dates, std::vector<Eigen::MatrixXd> values) {
  require(dates.size() == values.size(), ErrorCode::kStructural, "date and matrix counts differ");
  require(!values.empty(), ErrorCode::kDomain, "empty panel");
  MatrixPanel p;
  p.row_labels = numbered_labels("R", values.front().rows());
  p.col_labels = numbered_labels("C", values.front().cols());
  for (const auto& v : values) {
    require(v.rows() == p.rows() && v.cols() == p.cols(), ErrorCode::kStructural,
            "panel matrices have inconsistent shapes");
    p.missing.push_back(v.array().isNaN());
  }
  p.dates = std::move(dates);
  p.values = std::move(values);
  return p;
}

std::optional<std::size_t> FactorSeries::index_of(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

Eigen::VectorXd FactorSeries::column(std::string_view name) const {
  const auto k = index_of(name);
  if (!k) raise(ErrorCode::kSchema, "factor '" + std::string(name) + "' not present");
  return values.col(static_cast<Eigen::Index>(*k));
}

FactorSeries FactorSeries::select(const std::vector<std::string>& wanted) const {
  FactorSeries out;
  out.dates = dates;
  out.names = wanted;
  out.values.resize(static_cast<Eigen::Index>(periods()), static_cast<Eigen::Index>(wanted.size()));
  for (std::size_t j = 0; j < wanted.size(); ++j) out.values.col(static_cast<Eigen::Index>(j)) = column(wanted[j]);
  return out;
}

std::size_t StockPanel::observation_count(std::size_t stock) const {
  return static_cast<std::size_t>(returns.rows() - missing.col(static_cast<Eigen::Index>(stock)).count());
}

bool is_missing_sentinel(double value) {
  return std::abs(value + 99.99) < 1e-9 || std::abs(value + 999.0) < 1e-9;
}

MatrixPanel parse_ff_portfolio_csv(std::istream& in, int n1, int n2, PortfolioWeighting weighting) {
  require(n1 >= 1 && n2 >= 1, ErrorCode::kDomain, "panel dimensions must be positive");
  const auto want = [weighting](const std::string& title) {
    if (title.find("annual") != std::string::npos) return false;
    const bool equal = title.find("equal weighted") != std::string::npos;
    return weighting == PortfolioWeighting::kEqual ? equal : !equal;
  };
  const CsvBlock block = read_french_block(in, want, Sentinels::kMissing);
  const auto n = static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2);
  if (block.names.size() != n) {
    raise(ErrorCode::kStructural, "expected " + std::to_string(n) + " portfolio columns, header has " +
                                      std::to_string(block.names.size()));
  }
  require(!block.dates.empty(), ErrorCode::kStructural, "monthly block has no rows");
  MatrixPanel p;
  p.dates = block.dates;
  p.row_labels = numbered_labels("ME", n1);
  p.col_labels = numbered_labels("BM", n2);
  for (std::size_t t = 0; t < block.rows.size(); ++t) {
    Eigen::MatrixXd x(n1, n2);
    BoolMatrix m(n1, n2);
    for (std::size_t k = 0; k < n; ++k) {
      const auto r = static_cast<Eigen::Index>(k / static_cast<std::size_t>(n2));
      const auto c = static_cast<Eigen::Index>(k % static_cast<std::size_t>(n2));
      x(r, c) = block.rows[t][k];
      m(r, c) = block.missing[t][k];
    }
    p.values.push_back(std::move(x));
    p.missing.push_back(std::move(m));
  }
  return p;
}

MatrixPanel parse_ff_portfolio_csv(std::string_view text, int n1, int n2, PortfolioWeighting weighting) {
  std::istringstream in{std::string(text)};
  return parse_ff_portfolio_csv(in, n1, n2, weighting);
}

FactorSeries parse_ff_factors_csv(std::istream& in, const std::vector<std::string>& expected_names) {
  const auto want = [](const std::string& title) { return title.find("annual") == std::string::npos; };
  const CsvBlock block = read_french_block(in, want, Sentinels::kReject);
  FactorSeries f;
  f.dates = block.dates;
  f.names = block.names;
  std::set<std::string> seen;
  for (const auto& name : f.names) {
    require(seen.insert(name).second, ErrorCode::kSchema, "duplicate column '" + name + "'");
  }
  for (const auto& name : expected_names) {
    if (!seen.count(std::string(trim(name)))) {
      raise(ErrorCode::kSchema, "expected column '" + name + "' not found in header");
    }
  }
  f.values.resize(static_cast<Eigen::Index>(block.rows.size()), static_cast<Eigen::Index>(f.names.size()));
  for (std::size_t t = 0; t < block.rows.size(); ++t) {
    for (std::size_t k = 0; k < f.names.size(); ++k) {
      f.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = block.rows[t][k];
    }
  }
  return f;
}

FactorSeries parse_ff_factors_csv(std::string_view text, const std::vector<std::string>& expected_names) {
  std::istringstream in{std::string(text)};
  return parse_ff_factors_csv(in, expected_names);
}

FactorSeries merge_factor_series(const FactorSeries& a, const FactorSeries& b) {
  for (const auto& name : b.names) {
    require(!a.index_of(name), ErrorCode::kSchema, "factor '" + name + "' appears in both inputs");
  }
  std::vector<MonthStamp> common;
  std::set_intersection(a.dates.begin(), a.dates.end(), b.dates.begin(), b.dates.end(),
                        std::back_inserter(common));
  require(!common.empty(), ErrorCode::kDomain, "factor files share no months");
  const FactorSeries ra = restrict_dates(a, common);
  const FactorSeries rb = restrict_dates(b, common);
  FactorSeries out;
  out.dates = common;
  out.names = a.names;
  out.names.insert(out.names.end(), b.names.begin(), b.names.end());
  out.values.resize(ra.values.rows(), ra.values.cols() + rb.values.cols());
  out.values << ra.values, rb.values;
  return out;
}

StockPanel parse_stock_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  StockPanel s;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::is_blank(line)) break;
  }
  const auto header = split_csv(line);
  require(header.size() >= 2, ErrorCode::kSchema, "stock file header needs a date column and at least one stock");
  for (std::size_t i = 1; i < header.size(); ++i) s.stock_ids.emplace_back(header[i]);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      raise(ErrorCode::kStructural, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " cells, found " +
                                        std::to_string(cells.size()));
    }
    MonthStamp date;
    try {
      date = MonthStamp::parse(cells.front());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!s.dates.empty() && date <= s.dates.back()) {
      raise(ErrorCode::kStructural, "line " + std::to_string(line_no) + ": duplicate or out-of-order date " +
                                        date.to_string());
    }
    std::vector<double> values(s.stock_ids.size(), kNaN);
    for (std::size_t k = 0; k < values.size(); ++k) {
      const auto cell = cells[k + 1];
      if (detail::is_na_token(cell)) continue;
      const auto v = detail::parse_double(cell);
      if (!v) throw ParseError(line_no, "malformed number '" + std::string(cell) + "'");
      if (std::isfinite(*v) && !is_missing_sentinel(*v)) values[k] = *v;
    }
    s.dates.push_back(date);
    rows.push_back(std::move(values));
  }
  s.returns.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(s.stock_ids.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t k = 0; k < s.stock_ids.size(); ++k) {
      s.returns(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = rows[t][k];
    }
  }
  s.missing = s.returns.array().isNaN();
  return s;
}

StockPanel parse_stock_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_stock_csv(in);
}

MatrixPanel restrict_dates(const MatrixPanel& panel, const std::vector<MonthStamp>& dates) {
  const auto pos = positions_of(panel.dates, dates, "portfolio panel");
  MatrixPanel out;
  out.dates = dates;
  out.row_labels = panel.row_labels;
  out.col_labels = panel.col_labels;
  for (const auto t : pos) {
    out.values.push_back(panel.values[t]);
    out.missing.push_back(panel.missing[t]);
  }
  return out;
}

FactorSeries restrict_dates(const FactorSeries& factors, const std::vector<MonthStamp>& dates) {
  const auto pos = positions_of(factors.dates, dates, "factor series");
  FactorSeries out;
  out.dates = dates;
  out.names = factors.names;
  out.values.resize(static_cast<Eigen::Index>(dates.size()), factors.values.cols());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = factors.values.row(static_cast<Eigen::Index>(pos[i]));
  }
  return out;
}

StockPanel restrict_dates(const StockPanel& stocks, const std::vector<MonthStamp>& dates) {
  const auto pos = positions_of(stocks.dates, dates, "stock panel");
  StockPanel out;
  out.dates = dates;
  out.stock_ids = stocks.stock_ids;
  out.returns.resize(static_cast<Eigen::Index>(dates.size()), stocks.returns.cols());
  out.missing.resize(static_cast<Eigen::Index>(dates.size()), stocks.returns.cols());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(pos[i]);
    out.returns.row(static_cast<Eigen::Index>(i)) = stocks.returns.row(src);
    out.missing.row(static_cast<Eigen::Index>(i)) = stocks.missing.row(src);
  }
  return out;
}

AlignedDataset align_and_filter(const MatrixPanel& panel, const FactorSeries& factors,
                                const std::optional<StockPanel>& stocks, MonthStamp start, MonthStamp end,
                                const std::vector<MonthRange>& exclusions) {
  const auto contains = [](const std::vector<MonthStamp>& dates, const MonthStamp& m) {
    return std::binary_search(dates.begin(), dates.end(), m);
  };
  std::vector<MonthStamp> sample;
  for (MonthStamp m = start; m <= end; m = m.next()) {
    const bool excluded =
        std::any_of(exclusions.begin(), exclusions.end(), [&](const MonthRange& r) { return r.contains(m); });
    if (excluded) continue;
    if (!contains(panel.dates, m) || !contains(factors.dates, m)) continue;
    if (stocks && !contains(stocks->dates, m)) continue;
    sample.push_back(m);
  }
  if (sample.empty()) {
    raise(ErrorCode::kDomain, "no months remain in " + start.to_string() + ".." + end.to_string() +
                                  " after exclusions and alignment");
  }
  AlignedDataset out;
  out.panel = restrict_dates(panel, sample);
  out.factors = restrict_dates(factors, sample);
  if (stocks) out.stocks = restrict_dates(*stocks, sample);
  out.sample_dates = std::move(sample);
  return out;
}

StockPanel min_obs_filter(const StockPanel& stocks, int min_obs) {
  require(min_obs >= 0, ErrorCode::kDomain, "min_obs must be non-negative");
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < stocks.size(); ++j) {
    if (stocks.observation_count(j) > static_cast<std::size_t>(min_obs)) keep.push_back(static_cast<Eigen::Index>(j));
  }
  StockPanel out;
  out.dates = stocks.dates;
  out.returns.resize(stocks.returns.rows(), static_cast<Eigen::Index>(keep.size()));
  out.missing.resize(stocks.returns.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.stock_ids.push_back(stocks.stock_ids[static_cast<std::size_t>(keep[i])]);
    out.returns.col(static_cast<Eigen::Index>(i)) = stocks.returns.col(keep[i]);
    out.missing.col(static_cast<Eigen::Index>(i)) = stocks.missing.col(keep[i]);
  }
  return out;
}

}  // namespace matfactor
