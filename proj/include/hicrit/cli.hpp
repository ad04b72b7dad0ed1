#pragma once

// Command-line front end. dispatch() is the whole program minus main(), so
// tests can drive it in-process and compare outputs byte for byte.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hicrit/hct.hpp"

namespace hicrit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitCacheMiss = 4;

std::string_view version();

enum class Schema { pvalues, labeled, plain, pairs };

struct Ingested {
  Schema schema = Schema::plain;
  std::vector<std::string> columns;
  std::vector<double> pvalues;  // pvalues
  LabeledMatrix labeled;        // labeled
  Eigen::MatrixXd matrix;       // plain; pairs as an n x 2 matrix
  std::vector<std::string> warnings;
  std::size_t n = 0;  // rows
  std::size_t p = 0;  // numeric columns
  std::size_t class_positive = 0;
  std::size_t class_negative = 0;
};

/// Reads and validates a CSV. Errors name the file, line and column.
/// `column` selects a named column for the pvalues schema.
Ingested ingest_matrix(const std::filesystem::path& path, Schema schema, std::string_view column = {});

/// argv[0] is the program name. Returns an exit code; never throws.
int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace hicrit::cli
