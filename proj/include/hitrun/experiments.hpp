#pragma once

#include "hitrun/io.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace hitrun {

std::string_view version();

/// One experiment run. `params` holds the subcommand's options as text,
/// keyed by option name without dashes ("cov", "kappa", ...). Keys a
/// subcommand does not know are rejected with ConfigInvalid.
struct ExperimentConfig {
  std::string kind; // sample | couple | rates | table1 | overlap | mix-bound |
                    // kaczmarz | kaczmarz-figure
  std::map<std::string, std::string> params;
  std::uint64_t seed = 1;
  int workers = 0; // 0: OpenMP default; results do not depend on it
  std::string out; // empty: standard output
  std::string format; // csv | json; empty: from the extension of `out`
};

/// Runs the experiment. The result carries the provenance block: version,
/// generator, seed, workers and every parameter.
ResultTable run(const ExperimentConfig &config);

/// "csv" or "json" as selected by the config.
std::string output_format(const ExperimentConfig &config);
std::string render(const ResultTable &table, const std::string &format);

/// Renders and writes atomically to config.out, or to standard output.
void write_result(const ResultTable &table, const ExperimentConfig &config);

} // namespace hitrun
