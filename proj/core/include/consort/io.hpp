#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "consort/domain.hpp"
#include "consort/pipeline.hpp"
#include "consort/shapley.hpp"

namespace consort {

// Flat key=value run configuration. Reserved keys configure the pipeline and
// the price window; any other key is read as a segment target share
// (lines of the form segment=share).
struct FileConfig {
  PipelineConfig pipeline;
  int entry_period = 0;
  int exit_period = 1;
  std::map<std::string, double> target_shares;
};

FileConfig parse_config_text(const std::string& text);
FileConfig parse_config_file(const std::filesystem::path& path);
std::string render_config(const FileConfig& config);
void write_config(const std::filesystem::path& path, const FileConfig& config);

// Shortest round-trip decimal form; stable across reruns.
std::string format_double(double value);

// members.csv: member_id,segment,insider,sources,fields
std::vector<MemberRecord> load_members_csv(const std::filesystem::path& path);
void save_members_csv(const std::filesystem::path& path,
                      const std::vector<MemberRecord>& members);

// signals.csv: member_id,period,amount,company (empty cell = nulled field)
std::vector<SignalRecord> load_signals_csv(const std::filesystem::path& path);
void save_signals_csv(const std::filesystem::path& path,
                      const std::vector<SignalRecord>& records);

// prices.csv: period,price
std::map<int, double> load_prices_csv(const std::filesystem::path& path);
void save_prices_csv(const std::filesystem::path& path,
                     const std::map<int, double>& prices);

// Assembles a dataset from the three CSVs in dir, recomputing per-member
// volumes from the record counts. Target shares and the price window come
// from the config.
MemberDataset load_dataset(const std::filesystem::path& dir,
                           const FileConfig& config);

// Valuation report: member_id,method,value,std_error,samples,evals
void write_report_csv(const std::filesystem::path& path,
                      const std::vector<ValuationEstimate>& estimates);
std::vector<ValuationEstimate> load_report_csv(
    const std::filesystem::path& path);

// payouts: member_id,payout
void write_payout_csv(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, double>>& payouts);

}  // namespace consort
