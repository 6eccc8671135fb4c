#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace latfuse::cli {

enum class OutputFormat { plain, csv };

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

struct NsmOptions {
  std::string lattice;
  std::filesystem::path file;
  std::int64_t samples = 60000;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  OutputFormat format = OutputFormat::plain;
  /// CSV file the result row is appended to.
  std::filesystem::path out;
};

struct FuseOptions {
  std::string components;
  std::filesystem::path out;
};

struct TrainOptions {
  std::string components;
  std::string method = "householder";
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch;
  std::optional<int> step_period;
  std::optional<double> step_factor;
  std::optional<int> points_per_epoch;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  int eval_every = 0;
  std::int64_t eval_samples = 20000;
  int checkpoint_every = 100;
  /// Standard deviation of the initial skew generator (matrix-exp only).
  double init_scale = 0.0;
  /// Samples for the final evaluation.
  std::int64_t samples = 60000;
  std::filesystem::path checkpoint;
  /// History CSV; defaults to the checkpoint path with ".history.csv".
  std::filesystem::path out;
  bool resume = false;
  OutputFormat format = OutputFormat::plain;
};

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::int64_t samples = 60000;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  OutputFormat format = OutputFormat::plain;
  std::filesystem::path out;
};

struct CatalogOptions {
  OutputFormat format = OutputFormat::plain;
};

/// Each command returns an exit code and reports on `out`/`err`. Library
/// errors propagate; run_cli maps them to exit codes.
int cmd_catalog(const CatalogOptions& opts, std::ostream& out);
int cmd_nsm(const NsmOptions& opts, const std::vector<std::string>& args, std::ostream& out);
int cmd_fuse(const FuseOptions& opts, const std::vector<std::string>& args, std::ostream& out);
int cmd_train(const TrainOptions& opts, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err);
int cmd_eval(const EvalOptions& opts, const std::vector<std::string>& args, std::ostream& out);

/// Parses `args` (without the program name) and runs the selected command.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Seed from system entropy.
std::uint64_t entropy_seed();

}  // namespace latfuse::cli
