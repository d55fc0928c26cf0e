#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "mbfuse/error.hpp"
#include "mbfuse/score_model.hpp"
#include "mbfuse/synth.hpp"

namespace fixture {

// Kind of the mbfuse::Error thrown by f, or nullopt when nothing is thrown.
template <typename F>
std::optional<mbfuse::ErrorKind> thrown(F&& f) {
  try {
    f();
  } catch (const mbfuse::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// The four-subject demo table: face, fingerprint, iris with two gaps.
inline mbfuse::ScoreTable table_one() {
  using mbfuse::RawRow;
  std::vector<RawRow> rows{
      {"s1", "s1", {std::nullopt, 0.74, 1.00}},
      {"s2", "s2", {0.41, 0.89, 0.47}},
      {"s3", "s3", {0.27, std::nullopt, 0.03}},
      {"s4", "s4", {0.85, 0.00, 0.31}},
  };
  return mbfuse::build_table(mbfuse::ModalitySet({"face", "fingerprint", "iris"}), rows);
}

inline mbfuse::SynthSpec synth_spec(std::size_t n, std::size_t modalities, double rho, std::uint64_t seed) {
  mbfuse::SynthSpec spec;
  spec.n_identities = n;
  spec.rho = rho;
  spec.seed = seed;
  for (std::size_t m = 0; m < modalities; ++m) {
    spec.modalities.push_back({"m" + std::to_string(m), {0.8, 0.1}, {0.3, 0.1}});
  }
  return spec;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mbfuse_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace fixture
