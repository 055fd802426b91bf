// Copyright 2026 The anonkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "anonkit/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace anonkit {
namespace {

using nlohmann::json;

// Duplicate keys would silently drop a threshold; the parser callback keeps a
// per-object set of seen keys and rejects repeats.
struct DupChecker {
  std::vector<std::set<std::string>> stack;
  bool operator()(int /*depth*/, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::object_start) {
      stack.emplace_back();
    } else if (event == json::parse_event_t::object_end) {
      stack.pop_back();
    } else if (event == json::parse_event_t::key) {
      const auto key = parsed.get<std::string>();
      if (!stack.back().insert(key).second)
        throw ConfigError("config: duplicate key \"" + key + "\"");
    }
    return true;
  }
};

void require_keys_known(const json& obj, const std::string& path,
                        const std::set<std::string>& known) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key()))
      throw ConfigError("config: unknown key \"" + path + item.key() + "\"");
  }
}

template <typename T>
void read_field(const json& obj, const std::string& path, const char* key,
                T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: type mismatch at \"" + path + key + "\"");
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    DupChecker checker;
    doc = json::parse(text, std::ref(checker));
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  require_keys_known(doc, "", {"master_seed", "output_dir", "world", "gallery",
                               "sampler", "tradeoff", "oracles", "suites",
                               "trials"});
  if (!doc.contains("master_seed")) throw ConfigError("config: master_seed required");

  ExperimentConfig cfg;
  read_field(doc, "", "master_seed", cfg.master_seed);
  read_field(doc, "", "output_dir", cfg.output_dir);

  if (doc.contains("world")) {
    const json& world = doc["world"];
    if (!world.is_object()) throw ConfigError("config: \"world\" must be an object");
    require_keys_known(world, "world.",
                       {"d_id", "d_attr", "d_out", "rho", "rho_grid", "sigma_g"});
    read_field(world, "world.", "d_id", cfg.d_id);
    read_field(world, "world.", "d_attr", cfg.d_attr);
    read_field(world, "world.", "d_out", cfg.d_out);
    read_field(world, "world.", "rho", cfg.rho);
    read_field(world, "world.", "rho_grid", cfg.rho_grid);
    read_field(world, "world.", "sigma_g", cfg.sigma_g);
  }
  if (doc.contains("gallery")) {
    const json& gallery = doc["gallery"];
    if (!gallery.is_object())
      throw ConfigError("config: \"gallery\" must be an object");
    require_keys_known(gallery, "gallery.", {"dim", "size"});
    read_field(gallery, "gallery.", "dim", cfg.gallery_dim);
    read_field(gallery, "gallery.", "size", cfg.gallery_size);
  }
  if (doc.contains("sampler")) {
    const json& sampler = doc["sampler"];
    if (!sampler.is_object())
      throw ConfigError("config: \"sampler\" must be an object");
    require_keys_known(
        sampler, "sampler.",
        {"tau_mode", "tau", "delta_mode", "delta", "k_nn", "max_attempts"});
    std::string tau_mode = "fixed";
    read_field(sampler, "sampler.", "tau_mode", tau_mode);
    if (tau_mode == "fixed") {
      cfg.tau_mode = TauMode::kFixed;
    } else if (tau_mode == "calibrated") {
      cfg.tau_mode = TauMode::kCalibrated;
      if (sampler.contains("tau"))
        throw ConfigError(
            "config: sampler.tau conflicts with tau_mode \"calibrated\"; "
            "exactly one tau mode applies");
    } else {
      throw ConfigError("config: sampler.tau_mode must be \"fixed\" or "
                        "\"calibrated\"");
    }
    read_field(sampler, "sampler.", "tau", cfg.tau);
    std::string delta_mode = "percentile";
    read_field(sampler, "sampler.", "delta_mode", delta_mode);
    if (delta_mode == "percentile") {
      cfg.delta_mode = DeltaMode::kPercentile;
      if (sampler.contains("delta"))
        throw ConfigError(
            "config: sampler.delta conflicts with delta_mode \"percentile\"");
    } else if (delta_mode == "fixed") {
      cfg.delta_mode = DeltaMode::kFixed;
    } else {
      throw ConfigError("config: sampler.delta_mode must be \"fixed\" or "
                        "\"percentile\"");
    }
    read_field(sampler, "sampler.", "delta", cfg.delta);
    read_field(sampler, "sampler.", "k_nn", cfg.k_nn);
    read_field(sampler, "sampler.", "max_attempts", cfg.max_attempts);
  }
  if (doc.contains("tradeoff")) {
    const json& tradeoff = doc["tradeoff"];
    if (!tradeoff.is_object())
      throw ConfigError("config: \"tradeoff\" must be an object");
    require_keys_known(tradeoff, "tradeoff.", {"lambda", "mu", "beta", "tau"});
    read_field(tradeoff, "tradeoff.", "lambda", cfg.lambda);
    read_field(tradeoff, "tradeoff.", "mu", cfg.mu);
    read_field(tradeoff, "tradeoff.", "beta", cfg.beta);
    read_field(tradeoff, "tradeoff.", "tau", cfg.hinge_tau);
  }
  if (doc.contains("oracles")) {
    const json& oracles = doc["oracles"];
    if (!oracles.is_object())
      throw ConfigError("config: \"oracles\" must be an object");
    require_keys_known(oracles, "oracles.", {"count", "dim", "impostor_pairs"});
    read_field(oracles, "oracles.", "count", cfg.oracle_count);
    read_field(oracles, "oracles.", "dim", cfg.oracle_dim);
    read_field(oracles, "oracles.", "impostor_pairs", cfg.oracle_impostor_pairs);
  }
  if (doc.contains("suites")) {
    const json& suites = doc["suites"];
    if (!suites.is_object())
      throw ConfigError("config: \"suites\" must be an object");
    require_keys_known(suites, "suites.",
                       {"verify", "threat", "optimize", "estimators"});
    read_field(suites, "suites.", "verify", cfg.suite_verify);
    read_field(suites, "suites.", "threat", cfg.suite_threat);
    read_field(suites, "suites.", "optimize", cfg.suite_optimize);
    read_field(suites, "suites.", "estimators", cfg.suite_estimators);
  }
  if (doc.contains("trials")) {
    const json& trials = doc["trials"];
    if (!trials.is_object())
      throw ConfigError("config: \"trials\" must be an object");
    require_keys_known(
        trials, "trials.",
        {"lemma1", "prop1", "theorem1_samples", "theorem1_sweep", "theorem2",
         "prop2", "prop2_worlds", "corollary1_worlds", "epsilon_star",
         "threat_identities", "threat_samples_per_identity", "threat_gallery",
         "threat_impostor", "far_target", "optimize_steps",
         "optimize_step_size", "optimize_seeds", "mine_epochs",
         "mine_step_size", "mine_hidden", "estimator_samples", "ksg_k"});
    read_field(trials, "trials.", "lemma1", cfg.lemma1_trials);
    read_field(trials, "trials.", "prop1", cfg.prop1_trials);
    read_field(trials, "trials.", "theorem1_samples", cfg.theorem1_samples);
    read_field(trials, "trials.", "theorem1_sweep", cfg.theorem1_sweep);
    read_field(trials, "trials.", "theorem2", cfg.theorem2_trials);
    read_field(trials, "trials.", "prop2", cfg.prop2_trials);
    read_field(trials, "trials.", "prop2_worlds", cfg.prop2_worlds);
    read_field(trials, "trials.", "corollary1_worlds", cfg.corollary1_worlds);
    read_field(trials, "trials.", "epsilon_star", cfg.epsilon_star);
    read_field(trials, "trials.", "threat_identities", cfg.threat_identities);
    read_field(trials, "trials.", "threat_samples_per_identity",
               cfg.threat_samples_per_identity);
    read_field(trials, "trials.", "threat_gallery", cfg.threat_gallery);
    read_field(trials, "trials.", "threat_impostor", cfg.threat_impostor);
    read_field(trials, "trials.", "far_target", cfg.far_target);
    read_field(trials, "trials.", "optimize_steps", cfg.optimize_steps);
    read_field(trials, "trials.", "optimize_step_size", cfg.optimize_step_size);
    read_field(trials, "trials.", "optimize_seeds", cfg.optimize_seeds);
    read_field(trials, "trials.", "mine_epochs", cfg.mine_epochs);
    read_field(trials, "trials.", "mine_step_size", cfg.mine_step_size);
    read_field(trials, "trials.", "mine_hidden", cfg.mine_hidden);
    read_field(trials, "trials.", "estimator_samples", cfg.estimator_samples);
    read_field(trials, "trials.", "ksg_k", cfg.ksg_k);
  }

  // Cross-field sanity.
  if (cfg.d_id < 1 || cfg.d_attr < 1 || cfg.d_out < 1)
    throw ConfigError("config: world dimensions must be positive");
  if (cfg.lemma1_trials < 1000)
    throw ConfigError("config: trials.lemma1 must be at least 1000");
  if (cfg.prop1_trials < 1 || cfg.theorem2_trials < 1 || cfg.prop2_trials < 1)
    throw ConfigError("config: trial counts must be positive");
  if (!(cfg.far_target > 0.0 && cfg.far_target < 1.0))
    throw ConfigError("config: trials.far_target must lie in (0, 1)");
  for (double r : cfg.rho)
    if (!(r >= 0.0 && r < 1.0))
      throw ConfigError("config: world.rho entries must lie in [0, 1)");
  for (double r : cfg.rho_grid)
    if (!(r >= 0.0 && r < 1.0))
      throw ConfigError("config: world.rho_grid entries must lie in [0, 1)");
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string resolved_config_json(const ExperimentConfig& c) {
  json doc;
  doc["master_seed"] = c.master_seed;
  doc["output_dir"] = c.output_dir;
  doc["world"] = {{"d_id", c.d_id},       {"d_attr", c.d_attr},
                  {"d_out", c.d_out},     {"rho", c.rho},
                  {"rho_grid", c.rho_grid}, {"sigma_g", c.sigma_g}};
  doc["gallery"] = {{"dim", c.gallery_dim}, {"size", c.gallery_size}};
  doc["sampler"] = {
      {"tau_mode", c.tau_mode == TauMode::kFixed ? "fixed" : "calibrated"},
      {"delta_mode",
       c.delta_mode == DeltaMode::kPercentile ? "percentile" : "fixed"},
      {"k_nn", c.k_nn},
      {"max_attempts", c.max_attempts}};
  // Data-dependent values are resolved at run time; only mode-compatible
  // fields round-trip.
  if (c.tau_mode == TauMode::kFixed) doc["sampler"]["tau"] = c.tau;
  if (c.delta_mode == DeltaMode::kFixed) doc["sampler"]["delta"] = c.delta;
  doc["tradeoff"] = {{"lambda", c.lambda},
                     {"mu", c.mu},
                     {"beta", c.beta},
                     {"tau", c.hinge_tau}};
  doc["oracles"] = {{"count", c.oracle_count},
                    {"dim", c.oracle_dim},
                    {"impostor_pairs", c.oracle_impostor_pairs}};
  doc["suites"] = {{"verify", c.suite_verify},
                   {"threat", c.suite_threat},
                   {"optimize", c.suite_optimize},
                   {"estimators", c.suite_estimators}};
  doc["trials"] = {{"lemma1", c.lemma1_trials},
                   {"prop1", c.prop1_trials},
                   {"theorem1_samples", c.theorem1_samples},
                   {"theorem1_sweep", c.theorem1_sweep},
                   {"theorem2", c.theorem2_trials},
                   {"prop2", c.prop2_trials},
                   {"prop2_worlds", c.prop2_worlds},
                   {"corollary1_worlds", c.corollary1_worlds},
                   {"epsilon_star", c.epsilon_star},
                   {"threat_identities", c.threat_identities},
                   {"threat_samples_per_identity", c.threat_samples_per_identity},
                   {"threat_gallery", c.threat_gallery},
                   {"threat_impostor", c.threat_impostor},
                   {"far_target", c.far_target},
                   {"optimize_steps", c.optimize_steps},
                   {"optimize_step_size", c.optimize_step_size},
                   {"optimize_seeds", c.optimize_seeds},
                   {"mine_epochs", c.mine_epochs},
                   {"mine_step_size", c.mine_step_size},
                   {"mine_hidden", c.mine_hidden},
                   {"estimator_samples", c.estimator_samples},
                   {"ksg_k", c.ksg_k}};
  return doc.dump(2);
}

std::string config_digest(const ExperimentConfig& config) {
  const std::string canonical = resolved_config_json(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace anonkit
