#pragma once

#include <sys/types.h>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clisp/error.hpp"

namespace clisp {

struct ProcessResult {
  int exit_code = 0;  // 128 + signal number when killed by a signal
  std::string out;
  std::string err;
};

// Runs argv[0] (looked up on PATH) to completion, feeding `input` on stdin and
// capturing both output streams. Throws ToolError if it cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input = {});

// Runs with the caller's stdin/stdout/stderr and returns the exit code.
int run_inherited(const std::vector<std::string>& argv);

// Resolves a program name the way execvp would. Names containing a slash are
// checked as paths.
std::optional<std::filesystem::path> find_executable(std::string_view name);

/// A fresh private directory that is removed on destruction unless keep()
/// was called.
class ScratchDir {
 public:
  explicit ScratchDir(std::string_view prefix);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  void keep() { keep_ = true; }

 private:
  std::filesystem::path path_;
  bool keep_ = false;
};

/// A long-running child speaking a line protocol over its stdin/stdout.
/// stderr is inherited.
class LineProcess {
 public:
  explicit LineProcess(const std::vector<std::string>& argv);
  ~LineProcess();
  LineProcess(const LineProcess&) = delete;
  LineProcess& operator=(const LineProcess&) = delete;

  void write_line(std::string_view line);
  // nullopt once the child closed its stdout.
  std::optional<std::string> read_line();
  // Closes the child's stdin and waits for it; returns its exit code.
  int finish();

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::optional<int> exit_code_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace clisp
