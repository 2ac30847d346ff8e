#include "sitedelta/model_io.hpp"

#include <fstream>

#include "sitedelta/error.hpp"

using nlohmann::json;

namespace sitedelta::model_io {

namespace {

constexpr const char* kFormat = "sitedelta-model";
constexpr int kVersion = 1;

json envelope(const char* kind) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["kind"] = kind;
    return j;
}

void check_envelope(const json& j, const char* kind) {
    if (!j.is_object() || j.value("format", "") != kFormat || j.value("version", 0) != kVersion)
        throw SchemaError("not a sitedelta model document");
    if (j.value("kind", "") != kind)
        throw SchemaError("model kind mismatch: expected " + std::string(kind) + ", got " +
                          j.value("kind", "?"));
}

}  // namespace

json to_json(const learn::LinearSvmModel& model) {
    json j = envelope("linear_svm");
    j["c"] = model.c_param;
    j["bias"] = model.bias;
    j["weights"] = model.weights;
    return j;
}

learn::LinearSvmModel linear_from_json(const json& j) {
    check_envelope(j, "linear_svm");
    learn::LinearSvmModel model;
    model.c_param = j.at("c").get<double>();
    model.bias = j.at("bias").get<double>();
    model.weights = j.at("weights").get<std::vector<double>>();
    return model;
}

json to_json(const learn::RbfCombinerModel& model) {
    json j = envelope("rbf_svm");
    j["c"] = model.c_param;
    j["gamma"] = model.gamma;
    j["bias"] = model.bias;
    j["n_train"] = model.n_train;
    j["dual_coefs"] = model.dual_coefs;
    json points = json::array();
    for (const auto& s : model.support_scores) points.push_back({s[0], s[1]});
    j["support_scores"] = points;
    return j;
}

learn::RbfCombinerModel rbf_from_json(const json& j) {
    check_envelope(j, "rbf_svm");
    learn::RbfCombinerModel model;
    model.c_param = j.at("c").get<double>();
    model.gamma = j.at("gamma").get<double>();
    model.bias = j.at("bias").get<double>();
    model.n_train = j.value("n_train", static_cast<std::size_t>(0));
    model.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
    for (const auto& p : j.at("support_scores"))
        model.support_scores.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (model.support_scores.size() != model.dual_coefs.size())
        throw SchemaError("support point and coefficient counts differ");
    return model;
}

json to_json(const learn::PercentileScaler& scaler) {
    json j = envelope("percentile_scaler");
    j["low"] = scaler.low();
    j["high"] = scaler.high();
    return j;
}

learn::PercentileScaler scaler_from_json(const json& j) {
    check_envelope(j, "percentile_scaler");
    return learn::PercentileScaler::from_state(j.at("low").get<std::vector<double>>(),
                                               j.at("high").get<std::vector<double>>());
}

json to_json(const learn::MinMaxNormalizer& normalizer) {
    json j = envelope("minmax_normalizer");
    j["low"] = normalizer.low();
    j["high"] = normalizer.high();
    return j;
}

learn::MinMaxNormalizer normalizer_from_json(const json& j) {
    check_envelope(j, "minmax_normalizer");
    return learn::MinMaxNormalizer::from_state(j.at("low").get<double>(),
                                               j.at("high").get<double>());
}

json to_json(const fusion::FusionModel& model) {
    json j = envelope("fusion");
    j["scheme"] = fusion::scheme_name(model.scheme);
    j["trained_on"] = model.trained_on;
    j["selected_c"] = model.selected.c;
    j["selected_gamma"] = model.selected.gamma;
    if (model.scheme != fusion::Scheme::Max) j["combiner"] = to_json(model.combiner);
    return j;
}

fusion::FusionModel fusion_from_json(const json& j) {
    check_envelope(j, "fusion");
    fusion::FusionModel model;
    model.scheme = fusion::scheme_from_name(j.at("scheme").get<std::string>());
    model.trained_on = j.value("trained_on", static_cast<std::size_t>(0));
    model.selected.c = j.value("selected_c", 1.0);
    model.selected.gamma = j.value("selected_gamma", 0.0);
    if (model.scheme != fusion::Scheme::Max) model.combiner = rbf_from_json(j.at("combiner"));
    return model;
}

void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw LoadError("short write: " + path);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace sitedelta::model_io
