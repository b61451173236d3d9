#include "topocf/subprocess_codec.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <thread>
#include <unordered_map>

#include "topocf/error.hpp"
#include "topocf/io.hpp"

extern char** environ;

namespace fs = std::filesystem;

namespace topocf {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string read_or_empty(const std::string& path) {
  try {
    return io::read_file(path);
  } catch (const Error&) {
    return {};
  }
}

std::string row_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "r%06zu", i);
  return buf;
}

[[noreturn]] void malformed(const std::string& dir, const std::string& what) {
  throw BridgeError("malformed codec response in " + dir + ": " + what, 0,
                    read_or_empty((fs::path(dir) / "stderr.txt").string()));
}

// Splits a response CSV into rows keyed by the id column, checking the header.
std::unordered_map<std::string, std::vector<std::string>> read_response(
    const std::string& dir, const std::string& file, const std::vector<std::string>& header) {
  const auto path = (fs::path(dir) / file).string();
  if (!fs::exists(path)) malformed(dir, "missing " + file);
  const std::string text = io::read_file(path);
  std::unordered_map<std::string, std::vector<std::string>> rows;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string raw = text.substr(pos, end - pos);
    pos = end + 1;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    ++line;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t c = raw.find(','); ; c = raw.find(',', start)) {
      fields.push_back(raw.substr(start, c == std::string::npos ? std::string::npos : c - start));
      if (c == std::string::npos) break;
      start = c + 1;
    }
    if (line == 1) {
      if (fields != header) malformed(dir, file + " has an unexpected header");
      continue;
    }
    if (fields.size() != header.size())
      malformed(dir, file + " line " + std::to_string(line) + " has " + std::to_string(fields.size()) +
                         " fields, expected " + std::to_string(header.size()));
    const std::string id = fields.front();
    if (!rows.emplace(id, std::move(fields)).second) malformed(dir, file + " repeats id " + id);
  }
  if (line == 0) malformed(dir, file + " is empty");
  return rows;
}

double number(const std::string& dir, const std::string& text) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || errno != 0 || *end != '\0' || !std::isfinite(v))
    malformed(dir, "'" + text + "' is not a finite number");
  return v;
}

}  // namespace

std::string expand_command(const std::string& command_template, const std::string& op,
                           const std::string& dir) {
  std::string cmd = command_template;
  const bool has_op = cmd.find("{op}") != std::string::npos;
  const bool has_dir = cmd.find("{dir}") != std::string::npos;
  if (!has_op && !has_dir) cmd += " {op} {dir}";
  replace_all(cmd, "{op}", op);
  replace_all(cmd, "{dir}", shell_quote(dir));
  return cmd;
}

ProcessResult run_command(const std::string& command, const std::string& dir, double timeout_s) {
  const std::string err_path = (fs::path(dir) / "stderr.txt").string();
  const std::string out_path = (fs::path(dir) / "stdout.txt").string();

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 1, out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&actions, 2, err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw BridgeError(std::string("cannot spawn codec: ") + std::strerror(rc), -1, "");

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  auto pause = std::chrono::milliseconds(1);
  int status = 0;
  while (true) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) throw BridgeError("waitpid failed", -1, read_or_empty(err_path));
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      char msg[96];
      std::snprintf(msg, sizeof msg, "codec timed out after %g s", timeout_s);
      throw BridgeError(msg, -1, read_or_empty(err_path));
    }
    std::this_thread::sleep_for(pause);
    pause = std::min(pause * 2, std::chrono::milliseconds(20));
  }

  ProcessResult res;
  res.stderr_text = read_or_empty(err_path);
  if (WIFEXITED(status)) res.exit_status = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) res.exit_status = 128 + WTERMSIG(status);
  else res.exit_status = -1;
  return res;
}

SubprocessCodec::SubprocessCodec(SubprocessCodecOptions options) : options_(std::move(options)) {
  if (options_.command.empty()) throw Error(ErrorKind::contract, "subprocess codec needs a command");
  if (!(options_.timeout_s > 0.0)) throw Error(ErrorKind::contract, "codec timeout must be positive");
  if (options_.height < 1 || options_.width < 1) throw Error(ErrorKind::contract, "bad codec image shape");
  work_root_ = options_.work_root;
  if (work_root_.empty()) {
    work_root_ = (fs::temp_directory_path() / ("topocf-codec-" + std::to_string(::getpid()) + "-" +
                                              std::to_string(reinterpret_cast<std::uintptr_t>(this))))
                     .string();
    owns_root_ = true;
  }
  io::make_dirs(work_root_);
}

SubprocessCodec::~SubprocessCodec() {
  if (!owns_root_) return;
  std::error_code ec;
  // Only remove the root when every request succeeded and was cleaned up.
  if (fs::is_empty(work_root_, ec)) fs::remove(work_root_, ec);
}

CodecContract SubprocessCodec::contract() const {
  return {kCsDim, options_.is_dim, options_.height, options_.width};
}

std::string SubprocessCodec::new_request_dir() const {
  char name[32];
  std::snprintf(name, sizeof name, "req-%06zu", counter_++);
  const auto dir = (fs::path(work_root_) / name).string();
  std::error_code ec;
  fs::remove_all(dir, ec);
  io::make_dirs(dir);
  io::make_dirs((fs::path(dir) / "out").string());
  return dir;
}

void SubprocessCodec::invoke(const std::string& op, const std::string& dir) const {
  const auto res = run_command(expand_command(options_.command, op, dir), dir, options_.timeout_s);
  if (res.exit_status != 0)
    throw BridgeError("codec " + op + " failed",
                      res.exit_status, res.stderr_text);
}

void SubprocessCodec::finish(const std::string& dir) const {
  if (options_.keep_requests) return;
  std::error_code ec;
  fs::remove_all(dir, ec);
}

std::vector<Image> SubprocessCodec::decode_batch(const std::vector<Codes>& codes) const {
  if (codes.empty()) return {};
  for (const auto& c : codes) check_codes(c.is);
  std::lock_guard lock(mutex_);
  const auto dir = new_request_dir();

  std::string req = "id,op";
  for (std::size_t i = 0; i < kCsDim; ++i) req += ",cs_" + std::to_string(i);
  for (std::size_t i = 0; i < options_.is_dim; ++i) req += ",is_" + std::to_string(i);
  req += '\n';
  for (std::size_t r = 0; r < codes.size(); ++r) {
    req += row_id(r) + ",decode";
    for (double v : codes[r].cs) req += ',' + io::fmt9(v);
    for (double v : codes[r].is) req += ',' + io::fmt9(v);
    req += '\n';
  }
  io::write_file_atomic((fs::path(dir) / "request.csv").string(), req);
  invoke("decode", dir);

  std::vector<Image> out;
  for (std::size_t r = 0; r < codes.size(); ++r) {
    const auto path = (fs::path(dir) / "out" / (row_id(r) + ".pgm")).string();
    if (!fs::exists(path)) malformed(dir, "missing out/" + row_id(r) + ".pgm");
    Image img;
    try {
      img = io::read_pgm(path);
    } catch (const Error& e) {
      malformed(dir, e.what());
    }
    if (img.height != options_.height || img.width != options_.width)
      malformed(dir, "out/" + row_id(r) + ".pgm is " + std::to_string(img.height) + "x" +
                         std::to_string(img.width));
    out.push_back(std::move(img));
  }
  finish(dir);
  return out;
}

Image SubprocessCodec::decode(const CSCode& cs, const ISCode& is) const {
  return decode_batch({Codes{cs, is}}).front();
}

namespace {

// Writes in/<id>.pgm for every image plus request.csv with an image column.
void write_image_request(const std::string& dir, const std::string& op, const std::vector<Image>& images) {
  std::string req = "id,op,image\n";
  for (std::size_t r = 0; r < images.size(); ++r) {
    const std::string rel = "in/" + row_id(r) + ".pgm";
    io::write_pgm((fs::path(dir) / rel).string(), images[r]);
    req += row_id(r) + "," + op + "," + rel + "\n";
  }
  io::write_file_atomic((fs::path(dir) / "request.csv").string(), req);
}

}  // namespace

std::vector<double> SubprocessCodec::classify_batch(const std::vector<Image>& images) const {
  if (images.empty()) return {};
  for (const auto& img : images) check_image(img);
  std::lock_guard lock(mutex_);
  const auto dir = new_request_dir();
  write_image_request(dir, "classify", images);
  invoke("classify", dir);
  const auto rows = read_response(dir, "probs.csv", {"id", "p_abnormal"});
  std::vector<double> out;
  for (std::size_t r = 0; r < images.size(); ++r) {
    auto it = rows.find(row_id(r));
    if (it == rows.end()) malformed(dir, "probs.csv has no row " + row_id(r));
    const double p = number(dir, it->second[1]);
    if (p < 0.0 || p > 1.0) malformed(dir, "probability outside [0, 1]");
    out.push_back(p);
  }
  finish(dir);
  return out;
}

double SubprocessCodec::classify(const Image& image) const { return classify_batch({image}).front(); }

std::vector<Codes> SubprocessCodec::encode_batch(const std::vector<Image>& images) const {
  if (images.empty()) return {};
  for (const auto& img : images) check_image(img);
  std::lock_guard lock(mutex_);
  const auto dir = new_request_dir();
  write_image_request(dir, "encode", images);
  invoke("encode", dir);
  std::vector<std::string> header{"id"};
  for (std::size_t i = 0; i < kCsDim; ++i) header.push_back("cs_" + std::to_string(i));
  for (std::size_t i = 0; i < options_.is_dim; ++i) header.push_back("is_" + std::to_string(i));
  const auto rows = read_response(dir, "codes.csv", header);
  std::vector<Codes> out;
  for (std::size_t r = 0; r < images.size(); ++r) {
    auto it = rows.find(row_id(r));
    if (it == rows.end()) malformed(dir, "codes.csv has no row " + row_id(r));
    Codes c;
    for (std::size_t i = 0; i < kCsDim; ++i) c.cs[i] = number(dir, it->second[1 + i]);
    for (std::size_t i = 0; i < options_.is_dim; ++i) c.is.push_back(number(dir, it->second[1 + kCsDim + i]));
    out.push_back(std::move(c));
  }
  finish(dir);
  return out;
}

Codes SubprocessCodec::encode(const Image& image) const { return encode_batch({image}).front(); }

}  // namespace topocf
