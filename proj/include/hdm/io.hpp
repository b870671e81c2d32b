#pragma once

#include <string>

#include "json.hpp"

#include "hdm/decomposer.hpp"
#include "hdm/features.hpp"
#include "hdm/harness.hpp"

namespace hdm {

inline constexpr const char* kToolVersion = "hdmkit 0.1.0";

nlohmann::json decomposition_to_json(const Decomposition& d);
Decomposition decomposition_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const DecomposerConfig& c);
void config_from_json(const nlohmann::json& j, DecomposerConfig& c);

// CSV with a header row, one feature row per line, trailing label column.
void write_feature_csv(const FeatureMatrix& m, const std::string& path);
FeatureMatrix read_feature_csv(const std::string& path);

// 4x4 confusion CSV: header "actual\\predicted,rest,0-back,2-back,3-back".
void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path);
ConfusionMatrix read_confusion_csv(const std::string& path);

nlohmann::json metrics_to_json(const MetricsReport& r);
nlohmann::json scenario_report_to_json(const ScenarioReport& r);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace hdm
