#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "milu/graph_system.hpp"

namespace milu {

/// Matrix Market `coordinate real symmetric`, lower triangle, 1-based, 17
/// significant digits. Slack values ride along as `% slack k b` comment
/// lines so that a round trip reproduces the (c, b) split bit-exactly; files
/// without them get b recovered as diagonal minus incident weights.
void write_matrix_market(std::ostream& out, const SpdMSystem& a);
SpdMSystem read_matrix_market(std::istream& in);

/// Sidecar JSON `{n, edges: [[K, K', c], ...], slack: [...]}`.
nlohmann::json system_to_json(const SpdMSystem& a);
SpdMSystem system_from_json(const nlohmann::json& j);

void write_matrix_market_file(const std::string& path, const SpdMSystem& a);
SpdMSystem read_matrix_market_file(const std::string& path);

}  // namespace milu
