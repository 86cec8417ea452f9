#include "sdvar/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "sdvar/version.hpp"

namespace sdvar {

namespace {

std::string hex_digest(const unsigned char* digest, unsigned len) {
  static const char* hexmap = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned i = 0; i < len; ++i) {
    out[2 * i] = hexmap[digest[i] >> 4];
    out[2 * i + 1] = hexmap[digest[i] & 0xf];
  }
  return out;
}

struct CtxFree {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

std::string sha256_stream(std::istream& in) {
  std::unique_ptr<EVP_MD_CTX, CtxFree> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("digest init failed");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    if (got > 0 &&
        EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(got)) != 1)
      throw std::runtime_error("digest update failed");
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("digest final failed");
  return hex_digest(digest, len);
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return sha256_stream(in);
}

std::string sha256_string(const std::string& data) {
  std::unique_ptr<EVP_MD_CTX, CtxFree> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("digest init failed");
  if (EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1)
    throw std::runtime_error("digest update failed");
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("digest final failed");
  return hex_digest(digest, len);
}

std::string library_version() { return kVersion; }

void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::string& config_path, std::uint64_t seed,
                    int workers, const std::vector<std::string>& input_files,
                    const std::vector<std::string>& output_files) {
  nlohmann::ordered_json m;
  m["schema_version"] = 1;
  m["command"] = command;
  m["config_sha256"] = sha256_file(config_path);
  m["seed"] = seed;
  m["workers"] = workers;

  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const std::string& f : input_files)
    inputs[std::filesystem::path(f).filename().string()] = sha256_file(f);
  m["inputs"] = inputs;

  nlohmann::ordered_json versions;
  versions["sdvar"] = kVersion;
  versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  versions["boost"] = std::to_string(BOOST_VERSION / 100000) + "." +
                      std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                      std::to_string(BOOST_VERSION % 100);
  versions["compiler"] = __VERSION__;
  m["versions"] = versions;

  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  for (const std::string& f : output_files) {
    const auto full = std::filesystem::path(out_dir) / f;
    outputs[f] = sha256_file(full.string());
  }
  m["outputs"] = outputs;

  const auto path = std::filesystem::path(out_dir) / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << m.dump(2) << '\n';
}

}  // namespace sdvar
