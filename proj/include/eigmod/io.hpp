#pragma once

#include <optional>
#include <string>

#include "eigmod/types.hpp"

namespace eigmod {

/// Thrown on unreadable or malformed files; the CLI maps this to exit 2.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix Market array format, kind "real symmetric" (lower triangle,
/// column-major). Reading also accepts "general" and symmetrizes.
SymmetricDense read_matrix_market(const std::string& path);
void write_matrix_market(const std::string& path, const SymmetricDense& a);

struct CsvMatrix {
  Matrix values;
  std::optional<std::vector<int>> signs;  // from a leading "# signs:" comment
};

/// Plain CSV: comma separated, '.' decimal, one matrix row per line, no
/// header. An optional first comment line "# signs: +1,-1,..." carries the
/// sign signature of an update factor.
CsvMatrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Matrix& m,
                      const std::optional<std::vector<int>>& signs = std::nullopt);

std::vector<int> parse_signs(const std::string& text);

}  // namespace eigmod
