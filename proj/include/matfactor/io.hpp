#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "matfactor/ingest.hpp"

namespace matfactor {

// Canonical flat formats. Every number is written as the shortest decimal that
// parses back to the identical double; missing cells are written as NA.
//
//   panel.csv    date,<row>:<col>,...   one row per month, size-major columns
//   factors.csv  date,<name>,...
//   stocks.csv   date,<id>,...
//   dataset.json manifest with dates, labels and the file names above

std::string format_number(double value);

void write_panel_csv(std::ostream& out, const MatrixPanel& panel);
MatrixPanel read_panel_csv(std::istream& in, int n1, int n2);

void write_factors_csv(std::ostream& out, const FactorSeries& factors);
FactorSeries read_factors_csv(std::istream& in);

void write_stocks_csv(std::ostream& out, const StockPanel& stocks);

/// Writes dataset.json, panel.csv, factors.csv and (if present) stocks.csv.
void write_dataset(const std::filesystem::path& dir, const AlignedDataset& dataset);
AlignedDataset read_dataset(const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a sibling temporary file and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

FactorSeries read_factors_csv_file(const std::filesystem::path& path);
StockPanel read_stock_csv_file(const std::filesystem::path& path);

}  // namespace matfactor
