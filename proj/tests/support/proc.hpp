// Helpers for tests that drive the command-line binary as a subprocess.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace testsupport {

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

/// Runs a shell command, capturing exit code, stdout, and stderr.
inline CommandResult run_command(const std::string& command,
                                 const std::string& scratch_dir) {
  static int counter = 0;
  const std::string out_path =
      (std::filesystem::path(scratch_dir) / ("cmd_out_" + std::to_string(counter))).string();
  const std::string err_path =
      (std::filesystem::path(scratch_dir) / ("cmd_err_" + std::to_string(counter))).string();
  ++counter;

  const std::string full = command + " >" + out_path + " 2>" + err_path;
  const int status = std::system(full.c_str());

  CommandResult res;
  if (status == -1) {
    res.exit_code = -1;
  } else if (WIFEXITED(status)) {
    res.exit_code = WEXITSTATUS(status);
  } else {
    res.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  }
  res.out = read_file(out_path);
  res.err = read_file(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return res;
}

}  // namespace testsupport
