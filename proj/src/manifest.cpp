#include "gazedec/manifest.hpp"

#include "gazedec/errors.hpp"
#include "gazedec/rng.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace gazedec {

std::string hash_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error(ErrorKind::IoError, "cannot hash missing file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(ss.str())));
    return buf;
}

void RunManifest::add_input(const std::string& path) { input_hashes[path] = hash_file_hex(path); }

void RunManifest::write(const std::string& out_dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "manifests");

    nlohmann::json j;
    j["command"] = command;
    j["tool_version"] = kToolVersion;
    j["seed"] = seed;
    j["config"] = config;
    j["inputs"] = input_hashes;
    j["outputs"] = outputs;

    const fs::path path = fs::path(out_dir) / "manifests" / (command + ".json");
    std::ofstream out(path);
    if (!out) throw data_error(ErrorKind::IoError, "cannot write manifest " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace gazedec
