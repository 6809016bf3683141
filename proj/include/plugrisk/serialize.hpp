#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "plugrisk/bounds.hpp"
#include "plugrisk/classify.hpp"
#include "plugrisk/instances.hpp"
#include "plugrisk/pdfa.hpp"
#include "plugrisk/pipeline.hpp"
#include "plugrisk/smoothing.hpp"

namespace plugrisk::io {

using nlohmann::json;

/// Finite doubles become numbers; infinities and NaN become the strings
/// "inf", "-inf", "nan" (JSON has no literal for them).
json number(double v);
double to_double(const json& j);

/// Shortest round-trip decimal form ("%.17g"), with inf/-inf/nan spelled out.
std::string format_double(double v);

// {"atoms": [...], "mass": [...]}
json to_json(const Distribution& d);
/// Reuses `domain` when the atoms match it, so classes parsed together share one domain.
Distribution distribution_from_json(const json& j, const DomainPtr& domain = nullptr);

json to_json(const CostMatrix& c);
CostMatrix cost_from_json(const json& j);

// {"priors": [...], "classes": [...], "cost": [[...]]?, "estimates": [...]?}
json to_json(const LabeledSource& s);
LabeledSource source_from_json(const json& j);
json to_json(const Instance& inst);
Instance instance_from_json(const json& j);

json to_json(const BoundReport& r);
/// risk_opt,risk_plugin,excess,bound,slack,satisfied
std::string csv_header(const BoundReport&);
std::string csv_row(const BoundReport& r);

json to_json(const SmoothingReport& r);

// {"n":…, "alphabet":[…], "precision":…, "initial":…,
//  "states":[{"stop":…, "trans":{"a":{"p":…, "to":…}}}]}
json to_json(const Pdfa& a);
Pdfa pdfa_from_json(const json& j);

/// Pipeline config file. `base_dir` resolves relative machine paths.
TrialConfig trial_config_from_json(const json& j, const std::filesystem::path& base_dir = {});
json to_json(const TrialConfig& c);
json to_json(const Quantiles& q);
json to_json(const GridPoint& g);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace plugrisk::io
