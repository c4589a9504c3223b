#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "couplesim/calibration.hpp"
#include "couplesim/counterfactual.hpp"
#include "couplesim/regional.hpp"

namespace couplesim {

// Sectioned key = value text:
//
//   # comment
//   [params]
//   theta = 2.62
//
// Section and key names are fixed; anything else is rejected with the
// offending name in the message.
struct RunConfig {
    ModelParams params;
    bool calibrate_first = false;  // [params] source = calibrate
    PopulationConfig population;
    std::vector<Scenario> scenarios{Scenario::baseline(), Scenario::flexible_regular(),
                                    Scenario::outsourcing()};
    std::optional<double> outsourcing_price;
    std::optional<std::vector<double>> sweep_grid;  // default: 11 points on [0, 1.2 delta]
    std::optional<std::vector<double>> curve_grid;  // default: 21 points on [0, 2 delta]

    CalibrationConfig calibration;
    std::optional<std::size_t> calibration_n;  // couples per objective evaluation
    CalibrationTargets targets = CalibrationTargets::defaults();

    std::optional<std::string> prefecture_data;
    GapSet national_gaps = national_data_gaps();

    GapOptions gap_options;
    std::string out_dir = "out";
    bool gnuplot = false;

    std::vector<double> sweep_grid_or_default() const;
    std::vector<double> curve_grid_or_default() const;
    CalibrationConfig calibration_config() const;  // with population settings folded in
};

// `base_dir` resolves relative paths named inside the file.
RunConfig parse_config(std::istream& is, const std::string& source, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

// Key = value parameter file as written by write_params (full precision).
ModelParams read_params(std::istream& is, const std::string& source,
                        const ModelParams& base = ModelParams::calibrated());
void write_params(std::ostream& os, const ModelParams& p);

std::vector<Scenario> parse_scenario_list(const std::string& list);

}  // namespace couplesim
