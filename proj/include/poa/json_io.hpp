#pragma once

#include <filesystem>

#include "json.hpp"
#include "poa/cost_model.hpp"
#include "poa/game.hpp"
#include "poa/poa_lp.hpp"
#include "poa/rule_design.hpp"
#include "poa/worst_case.hpp"

namespace poa::io {

using nlohmann::json;

/// {"kind": "cost", "n": int, "values": [...]}
json to_json(const CostFunction& c);
/// {"kind": "rule", "n": int, "values": [...]}
json to_json(const DistributionRule& f);
CostFunction cost_from_json(const json& j);
DistributionRule rule_from_json(const json& j);

/// {"n", "resources": [{"id", "value"}], "action_sets": [[[ids...], ...], ...], "cost", "rule"}
json to_json(const GameInstance& game);
GameInstance game_from_json(const json& j);

json to_json(const ThetaParam& theta);
ThetaParam theta_from_json(const json& j);

/// Game object plus a "certificate" member holding theta, claimed_poa and the
/// two allocations. Values are written at full precision so a stored
/// certificate re-verifies at the construction tolerance.
json to_json(const WorstCaseCertificate& cert);
WorstCaseCertificate certificate_from_json(const json& j);

json to_json(const PoaResult& r);
json to_json(const ValidationReport& r);
json to_json(const DesignResult& r);
json to_json(const DominanceReport& r);
json to_json(const CertificateReport& r);

/// Rounds every floating-point number in j to `digits` significant digits.
json rounded(const json& j, int digits = 9);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace poa::io
