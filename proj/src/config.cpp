#include "gearfd/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gearfd/binary_io.hpp"
#include "gearfd/error.hpp"

namespace gearfd {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw PreconditionError(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw PreconditionError("unknown key '" + k + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw PreconditionError(std::string("bad value for '") + key + "' in " + where);
  }
}

char domain_letter(const json& j, const std::string& where) {
  if (!j.is_string() || j.get<std::string>().size() != 1) throw PreconditionError("bad domain in " + where);
  return j.get<std::string>()[0];
}

json recipe_json(const TrainingRecipe& r) {
  return {{"iterations", r.iterations}, {"batch", r.batch},       {"lr", r.adam.lr},
          {"lr_after_drop", r.adam.lr_after_drop}, {"drop_at", r.adam.drop_at}, {"beta1", r.adam.beta1},
          {"beta2", r.adam.beta2},       {"eps", r.adam.eps}};
}

void recipe_from(const json& j, TrainingRecipe& r, const std::string& where) {
  only_keys(j, where, {"iterations", "batch", "lr", "lr_after_drop", "drop_at", "beta1", "beta2", "eps"});
  read(j, "iterations", r.iterations, where);
  read(j, "batch", r.batch, where);
  read(j, "lr", r.adam.lr, where);
  read(j, "lr_after_drop", r.adam.lr_after_drop, where);
  read(j, "drop_at", r.adam.drop_at, where);
  read(j, "beta1", r.adam.beta1, where);
  read(j, "beta2", r.adam.beta2, where);
  read(j, "eps", r.adam.eps, where);
}

}  // namespace

void PipelineConfig::validate() const {
  eval.validate();
  study.validate();
  if (output_dir.empty()) throw PreconditionError("output_dir must not be empty");
}

std::string config_to_json(const PipelineConfig& c) {
  const EvalConfig& e = c.eval;
  const DatasetOptions& d = e.data;
  json methods = json::array();
  for (Method m : e.methods) methods.push_back(to_string(m));
  json study_methods = json::array();
  for (SynthesisMethod m : c.study.methods) study_methods.push_back(to_string(m));
  const json j = {
      {"seed", e.seed},
      {"output_dir", c.output_dir},
      {"geometry",
       {{"ring_teeth", d.geometry.ring_teeth},
        {"planet_teeth", d.geometry.planet_teeth},
        {"sun_teeth", d.geometry.sun_teeth},
        {"planet_count", d.geometry.planet_count}}},
      {"dataset",
       {{"faulty_planet_tooth", d.faulty_planet_tooth},
        {"hunting_cycles", d.hunting_cycles},
        {"slot_s", d.slot_s},
        {"regions", d.regions.bounds},
        {"train", d.counts.train},
        {"test", d.counts.test},
        {"samples_per_mesh", d.preprocess.samples_per_mesh},
        {"harmonics", d.preprocess.harmonics},
        {"sideband_orders", d.preprocess.sideband_orders}}},
      {"synthesis",
       {{"max_cutpaste_scale", e.synthesis.max_cutpaste_scale},
        {"max_faultpaste_scale", e.synthesis.max_faultpaste_scale},
        {"width_min", e.synthesis.patch.width_min},
        {"width_max", e.synthesis.patch.width_max},
        {"height_min", e.synthesis.patch.height_min},
        {"height_max", e.synthesis.patch.height_max},
        {"max_patch_retries", e.synthesis.max_patch_retries}}},
      {"recipe", recipe_json(e.recipe)},
      {"ae_recipe", recipe_json(e.ae_recipe)},
      {"eval", {{"methods", methods}, {"regression", e.regression}, {"runs", e.runs}, {"signatures", e.signatures}}},
      {"study",
       {{"target", std::string(1, c.study.target)},
        {"signature_source", std::string(1, c.study.signature_source)},
        {"scales", c.study.scales},
        {"methods", study_methods},
        {"runs", c.study.runs}}},
  };
  return j.dump();
}

PipelineConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed configuration: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  PipelineConfig c;
  only_keys(j, "configuration",
            {"seed", "output_dir", "geometry", "dataset", "synthesis", "recipe", "ae_recipe", "eval", "study"});
  EvalConfig& e = c.eval;
  DatasetOptions& d = e.data;
  read(j, "seed", e.seed, "configuration");
  read(j, "output_dir", c.output_dir, "configuration");
  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    only_keys(g, "geometry", {"ring_teeth", "planet_teeth", "sun_teeth", "planet_count"});
    read(g, "ring_teeth", d.geometry.ring_teeth, "geometry");
    read(g, "planet_teeth", d.geometry.planet_teeth, "geometry");
    read(g, "sun_teeth", d.geometry.sun_teeth, "geometry");
    read(g, "planet_count", d.geometry.planet_count, "geometry");
  }
  if (j.contains("dataset")) {
    const json& s = j["dataset"];
    only_keys(s, "dataset", {"faulty_planet_tooth", "hunting_cycles", "slot_s", "regions", "train", "test",
                             "samples_per_mesh", "harmonics", "sideband_orders"});
    read(s, "faulty_planet_tooth", d.faulty_planet_tooth, "dataset");
    read(s, "hunting_cycles", d.hunting_cycles, "dataset");
    read(s, "slot_s", d.slot_s, "dataset");
    read(s, "regions", d.regions.bounds, "dataset");
    read(s, "train", d.counts.train, "dataset");
    read(s, "test", d.counts.test, "dataset");
    read(s, "samples_per_mesh", d.preprocess.samples_per_mesh, "dataset");
    read(s, "harmonics", d.preprocess.harmonics, "dataset");
    read(s, "sideband_orders", d.preprocess.sideband_orders, "dataset");
  }
  if (j.contains("synthesis")) {
    const json& s = j["synthesis"];
    only_keys(s, "synthesis", {"max_cutpaste_scale", "max_faultpaste_scale", "width_min", "width_max", "height_min",
                               "height_max", "max_patch_retries"});
    read(s, "max_cutpaste_scale", e.synthesis.max_cutpaste_scale, "synthesis");
    read(s, "max_faultpaste_scale", e.synthesis.max_faultpaste_scale, "synthesis");
    read(s, "width_min", e.synthesis.patch.width_min, "synthesis");
    read(s, "width_max", e.synthesis.patch.width_max, "synthesis");
    read(s, "height_min", e.synthesis.patch.height_min, "synthesis");
    read(s, "height_max", e.synthesis.patch.height_max, "synthesis");
    read(s, "max_patch_retries", e.synthesis.max_patch_retries, "synthesis");
  }
  if (j.contains("recipe")) recipe_from(j["recipe"], e.recipe, "recipe");
  if (j.contains("ae_recipe")) recipe_from(j["ae_recipe"], e.ae_recipe, "ae_recipe");
  if (j.contains("eval")) {
    const json& s = j["eval"];
    only_keys(s, "eval", {"methods", "regression", "runs", "signatures"});
    if (s.contains("methods")) {
      if (!s["methods"].is_array()) throw PreconditionError("eval.methods must be an array");
      e.methods.clear();
      for (const json& m : s["methods"]) {
        if (!m.is_string()) throw PreconditionError("eval.methods must hold strings");
        e.methods.push_back(parse_method(m.get<std::string>()));
      }
    }
    read(s, "regression", e.regression, "eval");
    read(s, "runs", e.runs, "eval");
    read(s, "signatures", e.signatures, "eval");
  }
  if (j.contains("study")) {
    const json& s = j["study"];
    only_keys(s, "study", {"target", "signature_source", "scales", "methods", "runs"});
    if (s.contains("target")) c.study.target = domain_letter(s["target"], "study.target");
    if (s.contains("signature_source")) c.study.signature_source = domain_letter(s["signature_source"], "study");
    read(s, "scales", c.study.scales, "study");
    if (s.contains("methods")) {
      if (!s["methods"].is_array()) throw PreconditionError("study.methods must be an array");
      c.study.methods.clear();
      for (const json& m : s["methods"]) {
        if (!m.is_string()) throw PreconditionError("study.methods must hold strings");
        c.study.methods.push_back(parse_synthesis_method(m.get<std::string>()));
      }
    }
    read(s, "runs", c.study.runs, "study");
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const PipelineConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_to_json(config))));
  return buf;
}

}  // namespace gearfd
