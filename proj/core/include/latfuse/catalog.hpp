#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latfuse/lattice.hpp"

namespace latfuse {

/// A named lattice with the reference data used by the fusion formulas.
struct LatticeRecord {
  std::string name;
  GeneratorMatrix generator;
  double reference_volume = 0.0;
  std::optional<double> reference_nsm;
  std::optional<double> reference_nsm_std;
  std::string note;
  /// Set for entries stored as the dual of another entry.
  std::optional<std::string> dual_of;

  // Decimal text as read from a file. Writers emit these verbatim so that a
  // read/write cycle reproduces every number exactly; computed records leave
  // them empty and get shortest round-trip formatting instead.
  std::vector<std::string> row_text;  // row-major, dim*dim entries
  std::string volume_text;
  std::string nsm_text;
  std::string gram_det_text;

  int dim() const { return generator.dim(); }
};

/// Builds a record from a computed generator; reference_volume = volume(g).
LatticeRecord make_record(std::string name, GeneratorMatrix g,
                          std::optional<double> reference_nsm = std::nullopt,
                          std::string note = {});

/// Collection of named lattices. `Z` and `Z<n>` (cubic lattices, NSM 1/12)
/// resolve for any n without being stored.
class Catalog {
 public:
  Catalog() = default;

  /// Parses a catalog document. Throws FormatError on malformed input or when a
  /// stored reference volume disagrees with the generator beyond 1e-9 relative;
  /// DegenerateLatticeError when a generator is singular.
  static Catalog from_json(std::string_view text);
  static Catalog from_file(const std::filesystem::path& path);

  /// The catalog compiled into the library.
  static const Catalog& builtin();

  /// Catalog named by $LATFUSE_CATALOG when set, else the builtin one.
  static const Catalog& default_catalog();

  /// Throws UnknownLatticeError listing the available names.
  LatticeRecord get(std::string_view name) const;
  bool contains(std::string_view name) const;

  const std::vector<LatticeRecord>& entries() const { return entries_; }
  std::vector<std::string> names() const;

  void add(LatticeRecord record);

  std::string to_json() const;

 private:
  std::vector<LatticeRecord> entries_;
};

/// catalog_get(name) on the default catalog.
LatticeRecord catalog_get(std::string_view name);

/// Cubic lattice Z^n record.
LatticeRecord cubic_record(int n);

/// Reads a single-lattice file (a catalog document with exactly one record).
LatticeRecord read_lattice_file(const std::filesystem::path& path);

/// Writes `record` as a one-entry catalog document.
void write_lattice_file(const std::filesystem::path& path, const LatticeRecord& record);

}  // namespace latfuse
