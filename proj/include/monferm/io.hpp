#pragma once

#include <string>

#include "monferm/ensemble.hpp"
#include "monferm/run_config.hpp"

namespace monferm {

// Serialize the aggregate to JSON. Deterministic: keys sorted, no
// timestamps, numbers printed with round-trip precision, so identical
// statistics give identical bytes.
std::string aggregate_to_json(const AggregateRecord& agg);

std::string trajectories_to_csv(const EnsembleResult& result,
                                const std::string& digest);
std::string correlations_to_csv(const AggregateRecord& agg, const std::string& digest);
// Wide per-trajectory correlator: one row per recorded snapshot, one column
// per distance r.
std::string trajectory_correlations_to_csv(const EnsembleResult& result,
                                           const std::string& digest);

// Writes trajectories.csv, correlations.csv and trajectory_correlations.csv
// (the latter two when the correlator was recorded) and aggregate.json into
// dir, creating it if needed. Stamps the config digest into result.aggregate
// first.
void write_run_outputs(const std::string& dir, const RunConfig& config,
                       EnsembleResult& result);

// Read back a correlations.csv produced by write_run_outputs. Rows with
// r = 0 (the self term) are skipped. se entries are zero when the file
// predates spread information.
struct CorrelationTable {
  std::vector<double> r;
  std::vector<double> c;
  std::vector<double> se;
};
CorrelationTable read_correlations_csv(const std::string& path);

// Human-readable summary of an aggregate.json text.
std::string report_from_aggregate_json(const std::string& json_text);

// Plot-ready tables from one or more aggregate.json files:
//   corr_<digest>.csv      (r, |C|, ci_low, ci_high) per input, L/2 rows
//   lcor_vs_gamma.csv      (gamma, lcor, ci_low, ci_high, ln_lcor), sorted,
//                          written when at least one input carries an l_cor
//                          estimate; scaling_json (may be empty) is embedded
//                          as "# " comment lines in its header.
// Inputs without an l_cor series are listed in `missing` and do not stop the
// rest of the output. Returns a short textual summary of what was written.
struct ReportTables {
  std::vector<std::string> written;  // file paths
  std::vector<std::string> missing;  // inputs lacking an l_cor series
  std::string summary;
};
ReportTables write_report_tables(const std::vector<std::string>& aggregate_paths,
                                 const std::string& scaling_json,
                                 const std::string& outdir);

}  // namespace monferm
