#include "relucert/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace relucert {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256: EVP_Digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string canonical_dump(const json& doc) {
  // nlohmann::json keeps object keys sorted (std::map) and prints doubles
  // with shortest round-trip formatting, so dump() is already canonical.
  return doc.dump();
}

std::string network_digest(const Network& net) {
  return sha256_hex(canonical_dump(network_to_json(net)));
}

std::string problem_digest(const Network& net, const Box& d_in,
                           const Box& d_out) {
  json doc;
  doc["network"] = network_to_json(net);
  doc["d_in"] = box_to_json(d_in);
  doc["d_out"] = box_to_json(d_out);
  return sha256_hex(canonical_dump(doc));
}

json box_to_json(const Box& box) {
  json doc;
  doc["lo"] = std::vector<double>(box.lo().data(), box.lo().data() + box.dim());
  doc["hi"] = std::vector<double>(box.hi().data(), box.hi().data() + box.dim());
  return doc;
}

Box box_from_json(const json& doc, const std::string& where) {
  if (!doc.contains("lo") || !doc.contains("hi")) {
    throw std::invalid_argument(where + ": box needs \"lo\" and \"hi\"");
  }
  const auto lo = doc.at("lo").get<std::vector<double>>();
  const auto hi = doc.at("hi").get<std::vector<double>>();
  try {
    return Box(Eigen::Map<const Eigen::VectorXd>(lo.data(), lo.size()),
               Eigen::Map<const Eigen::VectorXd>(hi.data(), hi.size()));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(where + ": " + e.what());
  }
}

}  // namespace relucert
