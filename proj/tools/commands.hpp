#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "guifix/settings.hpp"

namespace guifix::cli {

enum class OutputFormat { Json, Table };

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  OutputFormat format = OutputFormat::Json;
};

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIssues = 1;  // detect only
inline constexpr int kExitError = 2;

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

Settings load_global_settings(const GlobalOptions& g);

/// Dump files of a corpus directory (json and xml), sorted by name.  The
/// manifest is skipped.
std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir);

int cmd_detect(const GlobalOptions& g, const std::filesystem::path& input, Streams io);

/// --out is the model path; the loss log goes next to it as <model>.loss.csv.
int cmd_train(const GlobalOptions& g, const std::filesystem::path& corpus, Streams io);

/// Without `preset`, fits curves from the clean corpus through the model.
int cmd_calibrate(const GlobalOptions& g, const std::optional<std::filesystem::path>& model,
                  const std::optional<std::filesystem::path>& corpus, bool preset, Streams io);

/// --out is a directory receiving <stem>.patch.json, <stem>.fixed.json and
/// <stem>.report.json.
int cmd_fix(const GlobalOptions& g, const std::filesystem::path& input, const std::filesystem::path& model,
            const std::filesystem::path& calibration, Streams io);

/// Table or JSON on stdout per --format.  An optional --out directory receives
/// report.json, report.txt and patches/<stem>.patch.json.
int cmd_eval(const GlobalOptions& g, const std::filesystem::path& manifest, const std::filesystem::path& model,
             const std::filesystem::path& calibration, Streams io);

/// --out is the corpus directory; manifest.json lists seeds and ground truth.
int cmd_synth(const GlobalOptions& g, std::size_t n, bool inject, Streams io);

/// Runs `body`, mapping exceptions to a message on `err` and exit code 2.
int guarded(std::ostream& err, const std::function<int()>& body);

}  // namespace guifix::cli
