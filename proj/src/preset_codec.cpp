#include <regex>
#include <set>
#include <string>

#include "json.hpp"
#include "pif/error.hpp"
#include "pif/pcturb.hpp"

namespace pif {
namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::Schema, "preset schema: " + what);
}

void expect_keys(const ojson& obj, const std::string& where,
                 std::initializer_list<const char*> required,
                 std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) schema_error(where + " must be an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!obj.contains(k)) schema_error(where + " missing \"" + k + "\"");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) schema_error(where + " has unknown field \"" + key + "\"");
  }
}

double number(const ojson& obj, const char* key, const std::string& where) {
  const ojson& v = obj.at(key);
  if (!v.is_number()) schema_error(where + "." + key + " must be a number");
  return v.get<double>();
}

StrengthHue strength_hue(const ojson& obj, const char* key) {
  const std::string where = std::string("params.") + key;
  const ojson& v = obj.at(key);
  expect_keys(v, where, {"strength", "hue"});
  return {number(v, "strength", where), number(v, "hue", where)};
}

ojson encode_strength_hue(const StrengthHue& v) {
  ojson out = ojson::object();
  out["strength"] = v.strength;
  out["hue"] = v.hue;
  return out;
}

ojson params_json(const ConceptParams& p) {
  ojson params = ojson::object();
  params["sharpness"] = p.sharpness;
  params["vignetting"] = p.vignetting;
  params["saturation"] = p.saturation;
  params["exposure"] = p.exposure;
  params["contrast"] = p.contrast;
  params["tint"] = encode_strength_hue(p.tint);
  params["highlight"] = encode_strength_hue(p.highlight);
  params["shadow"] = encode_strength_hue(p.shadow);
  return params;
}

ConceptParams params_from_json(const ojson& params) {
  expect_keys(params, "params",
              {"sharpness", "vignetting", "saturation", "exposure", "contrast", "tint",
               "highlight", "shadow"});
  ConceptParams p;
  p.sharpness = number(params, "sharpness", "params");
  p.vignetting = number(params, "vignetting", "params");
  p.saturation = number(params, "saturation", "params");
  p.exposure = number(params, "exposure", "params");
  p.contrast = number(params, "contrast", "params");
  p.tint = strength_hue(params, "tint");
  p.highlight = strength_hue(params, "highlight");
  p.shadow = strength_hue(params, "shadow");
  p.validate();
  return p;
}

ojson parse_document(std::string_view json) {
  try {
    return ojson::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    schema_error(std::string("invalid JSON: ") + e.what());
  }
}

const std::regex& rfc3339() {
  static const std::regex re(
      R"(^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})$)");
  return re;
}

}  // namespace

std::string encode_preset(const StylePreset& preset) {
  ojson doc = ojson::object();
  doc["version"] = kPresetVersion;
  doc["name"] = preset.name;
  doc["created_at"] = preset.created_at;

  doc["params"] = params_json(preset.params);

  ojson thresholds = ojson::object();
  thresholds["tau_highlight"] = preset.thresholds.tau_highlight;
  thresholds["tau_shadow"] = preset.thresholds.tau_shadow;
  thresholds["sharpness_kernel"] = preset.thresholds.sharpness_kernel;
  doc["thresholds"] = std::move(thresholds);

  if (preset.fit_meta) {
    const FitMeta& m = *preset.fit_meta;
    ojson meta = ojson::object();
    meta["reference_digests"] = m.reference_digests;
    meta["final_loss"] = m.final_loss;
    meta["seed"] = m.seed;
    meta["iterations"] = m.iterations;
    doc["fit_meta"] = std::move(meta);
  } else {
    doc["fit_meta"] = nullptr;
  }
  return doc.dump();
}

StylePreset decode_preset(std::string_view json) {
  const ojson doc = parse_document(json);
  if (!doc.is_object()) schema_error("document must be an object");
  if (!doc.contains("version")) schema_error("missing \"version\"");
  if (!doc["version"].is_number_integer()) schema_error("version must be an integer");
  if (doc["version"].get<long long>() != kPresetVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "unsupported preset version " + doc["version"].dump());
  }
  expect_keys(doc, "preset", {"version", "name", "created_at", "params", "thresholds", "fit_meta"});

  StylePreset preset;
  if (!doc["name"].is_string()) schema_error("name must be a string");
  preset.name = doc["name"].get<std::string>();
  if (!doc["created_at"].is_string()) schema_error("created_at must be a string");
  preset.created_at = doc["created_at"].get<std::string>();
  if (!std::regex_match(preset.created_at, rfc3339())) {
    schema_error("created_at is not an RFC 3339 timestamp");
  }

  preset.params = params_from_json(doc["params"]);

  const ojson& th = doc["thresholds"];
  expect_keys(th, "thresholds", {"tau_highlight", "tau_shadow", "sharpness_kernel"});
  preset.thresholds.tau_highlight = number(th, "tau_highlight", "thresholds");
  preset.thresholds.tau_shadow = number(th, "tau_shadow", "thresholds");
  if (!th["sharpness_kernel"].is_number_integer()) {
    schema_error("thresholds.sharpness_kernel must be an integer");
  }
  preset.thresholds.sharpness_kernel = th["sharpness_kernel"].get<int>();
  preset.thresholds.validate();

  const ojson& meta = doc["fit_meta"];
  if (!meta.is_null()) {
    expect_keys(meta, "fit_meta", {"reference_digests", "final_loss", "seed", "iterations"});
    FitMeta m;
    if (!meta["reference_digests"].is_array()) schema_error("fit_meta.reference_digests must be an array");
    for (const auto& d : meta["reference_digests"]) {
      if (!d.is_string()) schema_error("fit_meta.reference_digests entries must be strings");
      m.reference_digests.push_back(d.get<std::string>());
    }
    m.final_loss = number(meta, "final_loss", "fit_meta");
    if (!meta["seed"].is_number_unsigned() && !(meta["seed"].is_number_integer() && meta["seed"].get<long long>() >= 0)) {
      schema_error("fit_meta.seed must be a non-negative integer");
    }
    m.seed = meta["seed"].get<std::uint64_t>();
    if (!meta["iterations"].is_number_integer()) schema_error("fit_meta.iterations must be an integer");
    m.iterations = meta["iterations"].get<int>();
    preset.fit_meta = std::move(m);
  }
  return preset;
}

std::string encode_params(const ConceptParams& params) { return params_json(params).dump(); }

ConceptParams decode_params(std::string_view json) { return params_from_json(parse_document(json)); }

}  // namespace pif
