#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <vector>

#include "topocf/codec.hpp"

namespace topocf {

/// Result of one external codec invocation.
struct ProcessResult {
  int exit_status = 0;
  std::string stderr_text;
};

/// Expands `{op}` and `{dir}` in `command_template`. A template naming
/// neither gets " <op> <dir>" appended. The directory is shell-quoted.
std::string expand_command(const std::string& command_template, const std::string& op,
                           const std::string& dir);

/// Runs `command` through /bin/sh in its own process group with stdout and
/// stderr captured to files in `dir`. On timeout the whole group is killed and
/// BridgeError(exit_status -1) is thrown.
ProcessResult run_command(const std::string& command, const std::string& dir, double timeout_s);

struct SubprocessCodecOptions {
  std::string command;     ///< template, see expand_command
  double timeout_s = 300.0;
  std::size_t is_dim = 0;  ///< declared IS dimension; checked on every response
  int height = 64;
  int width = 64;
  /// Parent of the per-request directories; empty means a fresh directory
  /// under the system temp dir.
  std::string work_root;
  /// Keep request directories after success (they are always kept on failure).
  bool keep_requests = false;
};

/// Codec backed by an external executable speaking the file protocol:
///
///   request.csv   id,op,...  decode: cs_0..cs_7,is_0..is_{k-1}
///                            encode / classify: image (path relative to the request dir)
///   decode   ->   out/<id>.pgm   P5, maxval 255
///   encode   ->   codes.csv      id,cs_0..cs_7,is_0..is_{k-1}
///   classify ->   probs.csv      id,p_abnormal
///
/// Exit status 0 means success. Calls are serialised; each one gets its own
/// request directory.
class SubprocessCodec final : public Codec {
 public:
  explicit SubprocessCodec(SubprocessCodecOptions options);
  ~SubprocessCodec() override;

  CodecContract contract() const override;
  Image decode(const CSCode& cs, const ISCode& is) const override;
  Codes encode(const Image& image) const override;
  double classify(const Image& image) const override;
  std::vector<Image> decode_batch(const std::vector<Codes>& codes) const override;
  std::vector<double> classify_batch(const std::vector<Image>& images) const override;
  std::vector<Codes> encode_batch(const std::vector<Image>& images) const;

  const std::string& work_root() const { return work_root_; }

 private:
  std::string new_request_dir() const;
  void invoke(const std::string& op, const std::string& dir) const;
  void finish(const std::string& dir) const;

  SubprocessCodecOptions options_;
  std::string work_root_;
  bool owns_root_ = false;
  mutable std::mutex mutex_;
  mutable std::size_t counter_ = 0;
};

}  // namespace topocf
