#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "matfactor/cp.hpp"
#include "matfactor/regress.hpp"
#include "matfactor/synth.hpp"
#include "matfactor/tucker.hpp"
#include "matfactor/zoo.hpp"

namespace matfactor {

// Serialized reports. JSON output is pretty-printed with sorted keys and
// shortest round-trip numbers, so identical inputs give identical bytes.

std::string tucker_model_json(const TuckerModel& model, const MatrixPanel& panel, int suggested_r1, int suggested_r2);
std::string cp_model_json(const CPModel& model, const MatrixPanel& panel);

/// stock_id,n_obs,r2_reduced,r2_full,f_stat,p_value
std::string stock_fits_csv(const PanelSummary& summary);
std::string panel_summary_json(const PanelSummary& summary);
/// bin,lower,upper,count
std::string histogram_csv(const Histogram& histogram);

std::string zoo_result_json(const ZooResult& result, const ZooDataset& data);

std::string truth_json(const SyntheticTruth& truth);

/// Simulation configs. Absent keys keep their defaults; unknown keys are a
/// schema error.
TuckerSimConfig tucker_sim_config_from_json(std::string_view text);
CpSimConfig cp_sim_config_from_json(std::string_view text);
CrossSectionSimConfig cross_section_sim_config_from_json(std::string_view text);
std::string sim_config_json(const TuckerSimConfig& config);
std::string sim_config_json(const CpSimConfig& config);
std::string sim_config_json(const CrossSectionSimConfig& config);

/// Writes one series per row: "<id>,<date>,..." (the zoo input layout).
std::string series_by_row_csv(const std::vector<std::string>& ids, const std::vector<MonthStamp>& dates,
                              const Eigen::MatrixXd& values);

}  // namespace matfactor
