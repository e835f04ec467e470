#include "corpuskit/process.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "corpuskit/error.hpp"

namespace corpuskit {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  return out + "'";
}

class TempFile {
 public:
  explicit TempFile(std::string_view content) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("corpuskit-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".in");
    std::ofstream out(path_, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("cannot write temporary file " + path_.string());
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

std::string run_command(const std::string& command, std::string_view input) {
  const TempFile in(input);
  const std::string full = "(" + command + ") < " + shell_quote(in.path().string());
  FILE* pipe = ::popen(full.c_str(), "r");
  if (pipe == nullptr) throw Error("cannot start command: " + command);
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error("command failed (status " + std::to_string(status) + "): " + command);
  }
  return out;
}

}  // namespace corpuskit
