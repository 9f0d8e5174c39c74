#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qcm/error.hpp"
#include "qcm/fractal_geometry.hpp"
#include "qcm/operator_model.hpp"

namespace qcm {

enum class ExperimentKind { dim, words, discretize, estimate, scaling, multiplicity, counterexample, lp4 };

std::string_view to_string(ExperimentKind k) noexcept;
ExperimentKind parse_experiment_kind(std::string_view s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::estimate;
  std::string fixture = "gasket";  // built-in name or IFS config path
  std::size_t level = 4;
  std::vector<double> r_grid;
  std::optional<double> p_override;
  std::vector<double> ratios;                       // dim without a fixture
  std::vector<std::vector<Letter>> words;           // scaling
  std::vector<MultiplicityPiece> pieces;            // multiplicity
  std::vector<double> p_values{2.0};                // counterexample
  int window = 12;
  int l_start = 16;
  std::vector<std::size_t> family_sizes{2, 4, 8};   // lp4
  double ratio_bound = 1.0;
  std::size_t descent_budget = 0;                   // estimate: 0 disables descent
  int descent_iterations = 20;
  std::string output_dir;
  std::uint64_t seed = 1;
  int workers = 1;
};

enum class Severity { warning, error };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string field;
  std::string message;
};

// Every problem found, without touching the filesystem beyond reading the
// fixture config.
std::vector<Diagnostic> validate(const ExperimentConfig& config);

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

// "1.2.3" → {1, 2, 3}; "()" or "" → empty word.
std::vector<Letter> parse_word(std::string_view text);
// "1.2+3:2" → prefixes {1.2, 3} with multiplicity 2.
MultiplicityPiece parse_piece(std::string_view text);

// JSON object with the ExperimentConfig field names; throws ConfigError.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::string& path);

struct Artifact {
  std::string name;  // file name under output_dir
  std::string content;
};

struct RunOutput {
  int exit_code = 0;
  std::vector<Artifact> artifacts;  // the first one is printed to stdout
  std::string summary;              // JSON with invariant verdicts; empty on early failure
  std::string message;              // diagnostics or error text
};

// Runs without writing anything; the result is deterministic in (config, seed)
// for any worker count.
RunOutput execute(const ExperimentConfig& config);

// execute() plus writing primary and summary.json into output_dir when set.
// The primary artifact goes to `out`, messages to `err`.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

int exit_code_for(ErrorKind kind) noexcept;

}  // namespace qcm
