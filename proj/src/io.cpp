#include "locsched/io.hpp"

#include "locsched/types.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace locsched {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << content;
  if (!out) throw InvalidInput("write to '" + path + "' failed");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 computation failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int k = 0; k < len; ++k) os << std::setw(2) << static_cast<int>(md[k]);
  return os.str();
}

nlohmann::json make_provenance(const std::string& command) {
  nlohmann::json p;
  p["tool"] = "locsched";
  p["version"] = kToolVersion;
  p["command"] = command;
  p["inputs"] = nlohmann::json::object();
  p["parameters"] = nlohmann::json::object();
  return p;
}

void add_input(nlohmann::json& prov, const std::string& role, const std::string& path, const std::string& bytes) {
  prov["inputs"][role] = {{"path", path}, {"sha256", sha256_hex(bytes)}};
}

std::string csv_preamble(const nlohmann::json& prov) { return "# provenance: " + prov.dump() + "\n"; }

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace locsched
