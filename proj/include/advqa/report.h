#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "advqa/harness.h"
#include "json.hpp"

namespace advqa {

enum class ReportFormat { kJson, kCsv, kMarkdown };
ReportFormat parse_report_format(std::string_view tag);  // json | csv | md

nlohmann::json to_json(const AttackConfig& config);
AttackConfig attack_config_from_json(const nlohmann::json& j);

// Canonical JSON report. serialize -> parse -> serialize is byte-identical.
nlohmann::json to_json(const CampaignResult& result);
CampaignResult campaign_from_json(const nlohmann::json& j);
CampaignResult load_campaign(const std::string& path);

std::string render(const CampaignResult& result, ReportFormat format);

// Long-form table, one row per axis value.
nlohmann::json sweep_to_json(SweepAxis axis, const std::vector<SweepPoint>& points);
std::string render_sweep(SweepAxis axis, const std::vector<SweepPoint>& points,
                         ReportFormat format);

nlohmann::json to_json(const TransferReport& report);

// Writes `contents` to `path`, or to stdout when path is empty or "-".
void write_output(const std::string& path, const std::string& contents);

}  // namespace advqa
