#pragma once

#include <string>

#include <json.hpp>

#include "sitedelta/fusion.hpp"
#include "sitedelta/svm.hpp"

namespace sitedelta::model_io {

// Versioned JSON forms of every trained artifact ("sitedelta-model",
// version 1). The library refuses to load anything with a different
// format tag or version.

nlohmann::json to_json(const learn::LinearSvmModel& model);
learn::LinearSvmModel linear_from_json(const nlohmann::json& j);

nlohmann::json to_json(const learn::RbfCombinerModel& model);
learn::RbfCombinerModel rbf_from_json(const nlohmann::json& j);

nlohmann::json to_json(const learn::PercentileScaler& scaler);
learn::PercentileScaler scaler_from_json(const nlohmann::json& j);

nlohmann::json to_json(const learn::MinMaxNormalizer& normalizer);
learn::MinMaxNormalizer normalizer_from_json(const nlohmann::json& j);

nlohmann::json to_json(const fusion::FusionModel& model);
fusion::FusionModel fusion_from_json(const nlohmann::json& j);

void save_json(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json(const std::string& path);

}  // namespace sitedelta::model_io
