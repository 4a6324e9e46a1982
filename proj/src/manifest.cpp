#include "bdctm/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "bdctm/error.hpp"

namespace bdctm {

using nlohmann::json;

std::string_view software_version() { return BDCTM_VERSION; }

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      EVP_MD_CTX_free(ctx_);
      throw Error("SHA-256 initialisation failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx_, data, len) != 1) throw Error("SHA-256 update failed");
  }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md, &len) != 1) throw Error("SHA-256 finalisation failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return out.str();
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for hashing");
  Sha256 h;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) h.update(buf, static_cast<std::size_t>(in.gcount()));
  return h.hex();
}

json to_json(const RunManifest& m) {
  return json{{"version", m.version},         {"config_sha256", m.config_sha256},
              {"data_sha256", m.data_sha256}, {"data_path", m.data_path},
              {"seed", m.seed},               {"fit_seconds", m.fit_seconds},
              {"outputs", m.outputs}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.version = j.at("version").get<std::string>();
    m.config_sha256 = j.at("config_sha256").get<std::string>();
    m.data_sha256 = j.at("data_sha256").get<std::string>();
    m.data_path = j.at("data_path").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.fit_seconds = j.at("fit_seconds").get<double>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw StaleArtifactError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << to_json(m).dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StaleArtifactError("cannot open manifest '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw StaleArtifactError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  RunManifest m = manifest_from_json(j);
  if (m.version != software_version()) {
    throw StaleArtifactError("manifest written by version " + m.version + ", this is " +
                             std::string(software_version()));
  }
  return m;
}

}  // namespace bdctm
