#ifndef COMFP_TESTS_SUPPORT_TEMPDIR_HPP_
#define COMFP_TESTS_SUPPORT_TEMPDIR_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace comfp_tests {

// Unique scratch directory under the system temp root, removed on scope
// exit so test runs never interfere with each other.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const auto root = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int i = 0; i < 64; ++i) {
      std::ostringstream name;
      name << "comfp-" << tag << "-" << std::hex << rd() << rd();
      const auto p = root / name.str();
      std::error_code ec;
      if (std::filesystem::create_directory(p, ec)) {
        path_ = p;
        return;
      }
    }
    throw std::runtime_error("TempDir: could not create scratch directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace comfp_tests

#endif  // COMFP_TESTS_SUPPORT_TEMPDIR_HPP_
