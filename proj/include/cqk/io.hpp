#pragma once

// Instance files.
//
// Text: a header line "CQK1 <n>" or "SPX1 <n> <r>", then whitespace-separated
// decimal values (knapsack: d, a, b, l, u, r; simplex: y). Infinite bounds
// are written as inf / -inf. Values are printed in shortest round-trip form.
//
// Binary: magic "CQKB" or "SPXB", a little-endian u64 length, then
// little-endian f64 values in the same field order (simplex: r, then y).

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>

#include "cqk/core.hpp"

namespace cqk {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AnyInstance = std::variant<Instance<double>, SimplexInstance<double>>;

enum class FileFormat { Text, Binary };

void write_text(std::ostream& os, const Instance<double>& inst);
void write_text(std::ostream& os, const SimplexInstance<double>& inst);
void write_binary(std::ostream& os, const Instance<double>& inst);
void write_binary(std::ostream& os, const SimplexInstance<double>& inst);

/// Detects the format from the leading magic.
AnyInstance read_instance(std::istream& is);

AnyInstance read_instance_file(const std::filesystem::path& path);
void write_instance_file(const std::filesystem::path& path, const AnyInstance& inst, FileFormat fmt);

}  // namespace cqk
