#include "ccgp/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ccgp {

Json vec_to_json(const Eigen::Ref<const Vec>& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Vec vec_from_json(const Json& j) {
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

Json mat_to_json(const Eigen::Ref<const Mat>& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  Json data = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  j["data"] = data;
  return j;
}

Mat mat_from_json(const Json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const Json& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("mat_from_json: size mismatch");
  }
  Mat m(rows, cols);
  std::size_t p = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) m(i, k) = data[p++].get<double>();
  return m;
}

Json hyper_to_json(const HyperParams& h) {
  Json j;
  j["feature_map"] = {{"weights", mat_to_json(h.feature_map.weights)},
                      {"normalize", h.feature_map.normalize}};
  j["kernel"] = {{"kind", to_string(h.kernel.kind)},
                 {"output_scale", h.kernel.output_scale},
                 {"lengthscale", h.kernel.lengthscale},
                 {"offset", h.kernel.offset}};
  j["tau"] = h.tau;
  j["prior_mean_train"] = h.prior_mean_train;
  j["prior_mean_test"] = h.prior_mean_test;
  return j;
}

HyperParams hyper_from_json(const Json& j) {
  HyperParams h;
  h.feature_map.weights = mat_from_json(j.at("feature_map").at("weights"));
  h.feature_map.normalize = j.at("feature_map").at("normalize").get<bool>();
  h.kernel.kind = kernel_kind_from_string(j.at("kernel").at("kind").get<std::string>());
  h.kernel.output_scale = j.at("kernel").at("output_scale").get<double>();
  h.kernel.lengthscale = j.at("kernel").at("lengthscale").get<double>();
  h.kernel.offset = j.at("kernel").at("offset").get<double>();
  h.tau = j.at("tau").get<double>();
  h.prior_mean_train = j.at("prior_mean_train").get<double>();
  h.prior_mean_test = j.at("prior_mean_test").get<double>();
  return h;
}

Json adam_to_json(const AdamState& s) {
  Json j;
  j["m"] = vec_to_json(s.m);
  j["v"] = vec_to_json(s.v);
  j["step"] = s.step;
  j["beta1"] = s.beta1;
  j["beta2"] = s.beta2;
  j["eps"] = s.eps;
  return j;
}

AdamState adam_from_json(const Json& j) {
  AdamState s;
  s.m = vec_from_json(j.at("m"));
  s.v = vec_from_json(j.at("v"));
  s.step = j.at("step").get<long>();
  s.beta1 = j.at("beta1").get<double>();
  s.beta2 = j.at("beta2").get<double>();
  s.eps = j.at("eps").get<double>();
  return s;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

std::string config_hash(const Json& config) { return fnv1a_hex(config.dump()); }

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ccgp
