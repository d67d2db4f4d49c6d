#include "ddqkd/cli/manifest.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "ddqkd/simd/kernels.hpp"

namespace ddqkd::cli {

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::vector<std::pair<std::string, std::string>> build_info() {
    return {
        {"fftw", fftw_version},
        {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
        {"boost", fmt::format("{}.{}.{}", BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000, BOOST_VERSION % 100)},
        {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
        {"openssl", OpenSSL_version(OPENSSL_VERSION)},
        {"simd", std::string(simd::isa_name(simd::active_isa()))},
    };
}

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", (dir / "manifest.txt").string()));
    fmt::print(out, "command: {}\n", m.command);
    fmt::print(out, "config: {}\n", m.config_source);
    fmt::print(out, "config_sha256: {}\n", m.config_sha256);
    fmt::print(out, "seed: {}\n", m.seed);
    fmt::print(out, "workers: {}\n", m.workers);
    for (const auto& [k, v] : build_info()) fmt::print(out, "{}: {}\n", k, v);
    out << "outputs:\n";
    for (const auto& f : m.outputs) fmt::print(out, "  {}: {}\n", f, sha256_file(dir / f));
}

}  // namespace ddqkd::cli
