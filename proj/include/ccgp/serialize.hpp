#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "ccgp/adam.hpp"
#include "ccgp/kernels.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

using Json = nlohmann::json;

Json vec_to_json(const Eigen::Ref<const Vec>& v);
Vec vec_from_json(const Json& j);

Json mat_to_json(const Eigen::Ref<const Mat>& m);
Mat mat_from_json(const Json& j);

Json hyper_to_json(const HyperParams& h);
HyperParams hyper_from_json(const Json& j);

Json adam_to_json(const AdamState& s);
AdamState adam_from_json(const Json& j);

/// FNV-1a over the canonical (sorted-key) dump; used to tie checkpoints to
/// the config that produced them.
std::string fnv1a_hex(const std::string& data);
std::string config_hash(const Json& config);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace ccgp
