#ifndef PRECODE_IO_HPP
#define PRECODE_IO_HPP

#include <string>
#include <vector>

#include "precode/harness.hpp"

namespace precode {

/// Parse a JSON experiment config. Unknown fields and malformed values raise
/// std::invalid_argument with the offending field named.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         ExperimentConfig::Kind kind);

/// Effective-config echo (all defaults resolved) for the meta sidecar.
std::string config_to_json(const ExperimentConfig& config);

/// plain CSV: '.' decimal, '\n' line ends, one header row. Values are
/// rendered with %.12g so identical runs produce identical bytes.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_meta(const std::string& path, const ExperimentConfig& config,
                double runtime_seconds, const std::string& extra_json);

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal static line chart (log-y optional); enough for BER waterfalls
/// and PSD masks.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series, bool log_y);

} // namespace precode

#endif
