#include "matfactor/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "matfactor/error.hpp"
#include "text.hpp"

namespace matfactor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string month_token(const MonthStamp& m) { return std::to_string(m.yyyymm()); }

void check_header(const std::vector<std::string_view>& header, std::size_t expected_cells,
                  std::string_view what) {
  if (header.empty() || header.front() != "date" || header.size() != expected_cells) {
    raise(ErrorCode::kSchema, std::string(what) + ": header must be 'date' followed by " +
                                  std::to_string(expected_cells - 1) + " columns");
  }
}

}  // namespace

std::string format_number(double value) { return detail::format_double(value); }

void write_panel_csv(std::ostream& out, const MatrixPanel& panel) {
  out << "date";
  for (const auto& r : panel.row_labels) {
    for (const auto& c : panel.col_labels) out << ',' << r << ':' << c;
  }
  out << '\n';
  for (std::size_t t = 0; t < panel.periods(); ++t) {
    out << month_token(panel.dates[t]);
    for (Eigen::Index i = 0; i < panel.rows(); ++i) {
      for (Eigen::Index j = 0; j < panel.cols(); ++j) {
        out << ',' << (panel.missing[t](i, j) ? std::string("NA") : format_number(panel.values[t](i, j)));
      }
    }
    out << '\n';
  }
}

MatrixPanel read_panel_csv(std::istream& in, int n1, int n2) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kSchema, "panel file is empty");
  const auto header = detail::split_csv(line);
  const auto n = static_cast<std::size_t>(n1 * n2);
  check_header(header, n + 1, "panel file");
  MatrixPanel p;
  for (std::size_t k = 0; k < n; ++k) {
    const auto label = header[k + 1];
    const auto colon = label.find(':');
    require(colon != std::string_view::npos, ErrorCode::kSchema, "panel column label lacks ':'");
    const auto r = k / static_cast<std::size_t>(n2);
    const auto c = k % static_cast<std::size_t>(n2);
    if (c == 0) p.row_labels.emplace_back(label.substr(0, colon));
    if (r == 0) p.col_labels.emplace_back(label.substr(colon + 1));
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != n + 1) {
      raise(ErrorCode::kStructural, "panel line " + std::to_string(line_no) + ": wrong cell count");
    }
    p.dates.push_back(MonthStamp::parse(cells[0]));
    Eigen::MatrixXd x(n1, n2);
    BoolMatrix m(n1, n2);
    for (std::size_t k = 0; k < n; ++k) {
      const auto r = static_cast<Eigen::Index>(k / static_cast<std::size_t>(n2));
      const auto c = static_cast<Eigen::Index>(k % static_cast<std::size_t>(n2));
      if (detail::is_na_token(cells[k + 1])) {
        x(r, c) = std::numeric_limits<double>::quiet_NaN();
        m(r, c) = true;
      } else {
        const auto v = detail::parse_double(cells[k + 1]);
        if (!v) throw ParseError(line_no, "malformed number '" + std::string(cells[k + 1]) + "'");
        x(r, c) = *v;
        m(r, c) = false;
      }
    }
    p.values.push_back(std::move(x));
    p.missing.push_back(std::move(m));
  }
  return p;
}

void write_factors_csv(std::ostream& out, const FactorSeries& factors) {
  out << "date";
  for (const auto& name : factors.names) out << ',' << name;
  out << '\n';
  for (std::size_t t = 0; t < factors.periods(); ++t) {
    out << month_token(factors.dates[t]);
    for (Eigen::Index k = 0; k < factors.values.cols(); ++k) {
      out << ',' << format_number(factors.values(static_cast<Eigen::Index>(t), k));
    }
    out << '\n';
  }
}

FactorSeries read_factors_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kSchema, "factor file is empty");
  const auto header = detail::split_csv(line);
  require(!header.empty() && header.front() == "date", ErrorCode::kSchema,
          "factor file header must start with 'date'");
  FactorSeries f;
  for (std::size_t k = 1; k < header.size(); ++k) f.names.emplace_back(header[k]);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size()) {
      raise(ErrorCode::kStructural, "factor line " + std::to_string(line_no) + ": wrong cell count");
    }
    const auto date = MonthStamp::parse(cells[0]);
    if (!f.dates.empty() && date <= f.dates.back()) {
      raise(ErrorCode::kStructural, "factor line " + std::to_string(line_no) + ": duplicate or out-of-order date");
    }
    f.dates.push_back(date);
    std::vector<double> row;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      const auto v = detail::parse_double(cells[k]);
      if (!v) throw ParseError(line_no, "malformed number '" + std::string(cells[k]) + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  f.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(f.names.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t k = 0; k < f.names.size(); ++k) {
      f.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = rows[t][k];
    }
  }
  return f;
}

void write_stocks_csv(std::ostream& out, const StockPanel& stocks) {
  out << "date";
  for (const auto& id : stocks.stock_ids) out << ',' << id;
  out << '\n';
  for (std::size_t t = 0; t < stocks.periods(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    out << month_token(stocks.dates[t]);
    for (Eigen::Index k = 0; k < stocks.returns.cols(); ++k) {
      out << ',' << (stocks.missing(row, k) ? std::string("NA") : format_number(stocks.returns(row, k)));
    }
    out << '\n';
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) raise(ErrorCode::kIo, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) raise(ErrorCode::kIo, "cannot rename into '" + path.string() + "': " + ec.message());
}

FactorSeries read_factors_csv_file(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  return read_factors_csv(in);
}

StockPanel read_stock_csv_file(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  return parse_stock_csv(in);
}

void write_dataset(const fs::path& dir, const AlignedDataset& dataset) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "matfactor-dataset";
  manifest["version"] = 1;
  manifest["n1"] = dataset.panel.rows();
  manifest["n2"] = dataset.panel.cols();
  json dates = json::array();
  for (const auto& m : dataset.sample_dates) dates.push_back(m.to_string());
  manifest["dates"] = dates;
  manifest["row_labels"] = dataset.panel.row_labels;
  manifest["col_labels"] = dataset.panel.col_labels;
  manifest["factor_names"] = dataset.factors.names;
  manifest["missing_cells"] = dataset.panel.missing_count();
  manifest["panel"] = "panel.csv";
  manifest["factors"] = "factors.csv";
  manifest["stocks"] = dataset.stocks ? json("stocks.csv") : json(nullptr);

  std::ostringstream panel;
  write_panel_csv(panel, dataset.panel);
  write_text_file_atomic(dir / "panel.csv", panel.str());
  std::ostringstream factors;
  write_factors_csv(factors, dataset.factors);
  write_text_file_atomic(dir / "factors.csv", factors.str());
  if (dataset.stocks) {
    std::ostringstream stocks;
    write_stocks_csv(stocks, *dataset.stocks);
    write_text_file_atomic(dir / "stocks.csv", stocks.str());
  }
  write_text_file_atomic(dir / "dataset.json", manifest.dump(2) + "\n");
}

AlignedDataset read_dataset(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "dataset.json"));
  } catch (const json::exception& e) {
    raise(ErrorCode::kSchema, "dataset.json: " + std::string(e.what()));
  }
  AlignedDataset ds;
  try {
    const int n1 = manifest.at("n1").get<int>();
    const int n2 = manifest.at("n2").get<int>();
    for (const auto& d : manifest.at("dates")) ds.sample_dates.push_back(MonthStamp::parse(d.get<std::string>()));
    {
      std::istringstream in(read_text_file(dir / manifest.at("panel").get<std::string>()));
      ds.panel = read_panel_csv(in, n1, n2);
    }
    ds.panel.row_labels = manifest.at("row_labels").get<std::vector<std::string>>();
    ds.panel.col_labels = manifest.at("col_labels").get<std::vector<std::string>>();
    ds.factors = read_factors_csv_file(dir / manifest.at("factors").get<std::string>());
    if (!manifest.at("stocks").is_null()) {
      ds.stocks = read_stock_csv_file(dir / manifest.at("stocks").get<std::string>());
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::kSchema, "dataset.json: " + std::string(e.what()));
  }
  require(ds.panel.dates == ds.sample_dates, ErrorCode::kStructural, "panel dates differ from manifest dates");
  require(ds.factors.dates == ds.sample_dates || ds.factors.names.empty(), ErrorCode::kStructural,
          "factor dates differ from manifest dates");
  if (ds.factors.names.empty()) ds.factors.dates = ds.sample_dates;
  require(!ds.stocks || ds.stocks->dates == ds.sample_dates, ErrorCode::kStructural,
          "stock dates differ from manifest dates");
  return ds;
}

}  // namespace matfactor
