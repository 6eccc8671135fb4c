#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latfuse/catalog.hpp"

namespace latfuse {

struct FusionComponent {
  LatticeRecord lattice;
  int multiplicity = 1;
};

/// Contiguous block of coordinates owned by one component copy.
struct Block {
  int offset = 0;
  int size = 0;
  friend bool operator==(const Block&, const Block&) = default;
};

/// Orthogonal product a_1 A_1 x a_2 A_2 x ... of scaled catalog lattices.
/// scalings[i] applies to every copy of components[i].
struct FusionSpec {
  std::vector<FusionComponent> components;
  std::vector<double> scalings;

  int total_dim() const;
  /// Components in product order with multiplicities expanded.
  std::vector<LatticeRecord> expanded() const;
  std::vector<double> expanded_scalings() const;
  /// One block per expanded component copy.
  std::vector<Block> blocks() const;
  /// Canonical component string, e.g. "K12,Z" or "Z*3".
  std::string label() const;
  /// Throws std::invalid_argument if the invariants do not hold.
  void validate() const;
};

/// Parses `NAME` / `NAME*m` items separated by commas, e.g. "K12,Z" or "L16,A2".
std::vector<FusionComponent> parse_components(std::string_view text,
                                              const Catalog& catalog = Catalog::default_catalog());

/// a_i = C / (sqrt(G_i) V_i^{1/n_i}) with C fixed so that component `anchor`
/// gets a = 1 (default: the first component of largest dimension). Throws
/// latfuse::Error when a reference NSM is missing.
std::vector<double> optimal_scaling(const std::vector<LatticeRecord>& components,
                                    std::optional<std::size_t> anchor = std::nullopt);

/// NSM of the optimally scaled orthogonal product, prod_i G_i^{n_i/n}.
double predicted_product_nsm(const std::vector<LatticeRecord>& components);

/// Spec with optimal scalings for the given components.
FusionSpec make_optimal_spec(std::vector<FusionComponent> components);

/// Block-diagonal generator of the scaled components.
GeneratorMatrix build_product(const FusionSpec& spec);

}  // namespace latfuse
