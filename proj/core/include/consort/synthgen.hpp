#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "consort/domain.hpp"
#include "consort/pipeline.hpp"

namespace consort {

struct SegmentShare {
  std::string label;
  double share = 0.0;
};

// Parameters for the deterministic synthetic-dataset generator. Carrier
// members get a +carrier_strength shift in period-over-period spend growth;
// everyone else draws zero-mean noise of scale noise_scale.
struct GenSpec {
  int n_members = 8;
  int n_periods = 4;
  int n_carriers = 0;
  double carrier_strength = 0.5;
  double noise_scale = 0.1;
  std::vector<SegmentShare> segments = {{"A", 0.5}, {"B", 0.5}};
  std::uint64_t seed = 0;

  // Throws InputError naming the offending field.
  void validate() const;
};

struct GenResult {
  MemberDataset dataset;
  std::vector<std::string> carriers;  // ground truth, never read by valuation
};

// Pure function of the spec (seed included). The price series rises 10%
// between entry and exit, consistent with the planted positive growth.
GenResult generate(const GenSpec& spec);

// Writes members.csv, signals.csv, prices.csv, carriers.txt and config.cfg
// under dir; returns the file paths in write order.
std::vector<std::filesystem::path> write_generated(
    const std::filesystem::path& dir, const GenResult& result,
    const PipelineConfig& config = PipelineConfig{});

}  // namespace consort
