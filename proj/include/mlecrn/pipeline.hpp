#pragma once

// End-to-end command pipeline shared by the command-line tool and the tests.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "mlecrn/dynamics.hpp"
#include "mlecrn/inference.hpp"
#include "mlecrn/matrixcore.hpp"

namespace mlecrn {

// "m n" header, then m rows of n integers; '#' starts a comment line.
// Throws ParseError with line and column, or a validation error.
DesignMatrix parse_matrix_text(std::string_view text);
DesignMatrix parse_matrix_file(const std::filesystem::path& path);

// "3,1,0" is read as counts; any entry with a decimal point or exponent makes
// the whole vector frequencies, which must sum to one.
DataVector parse_data_vector(std::string_view text);

enum class OutputFormat { Text, Json };

struct RunConfig {
  std::string subcommand;  // compile | simulate | mle | verify | siphons
  std::filesystem::path matrix_path;
  std::string data;
  std::string theta0 = "zero";  // "zero" or a comma-separated list
  std::optional<std::filesystem::path> rates_path;
  std::optional<double> delta;
  std::uint64_t seed = 1;
  SimOptions sim;
  std::optional<std::filesystem::path> out_dir;
  OutputFormat format = OutputFormat::Text;
  std::string network = "";  // mld | mle; empty picks the subcommand default
  double tolerance = 1e-5;
};

struct RunResult {
  int exit_code = 0;
  std::string out;
  std::string err;
  std::map<std::string, std::string> artifacts;  // file name -> contents
};

// Never throws for input problems: they become exit code 2 with a message
// (structured under --format json).
RunResult run_pipeline(const RunConfig& cfg);

// JSON text with every double printed at 17 significant digits.
std::string dump_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const MleResult& r);

}  // namespace mlecrn
