#pragma once

#include <optional>
#include <string_view>

#include "latfuse/optimizer.hpp"

namespace latfuse {

/// One row of the per-dimension training table.
struct MethodDefaults {
  int batch = 1;
  /// Number of parameter updates.
  int iterations = 0;
  double lr = 0.0;
  /// Target CI half-width reported alongside published runs, when known.
  std::optional<double> confidence;
};

/// Defaults for `method` at dimension `dim`, falling back to the generic
/// per-method entry when the dimension has no row.
MethodDefaults method_defaults(int dim, TransformKind method);

/// Builtin points per epoch (200).
int default_points_per_epoch();

/// TrainConfig filled from method_defaults: epochs = ceil(iterations /
/// updates_per_epoch).
TrainConfig default_train_config(int dim, TransformKind method);

/// Parses a defaults document; throws FormatError. Used by the builtin table.
void check_train_defaults(std::string_view json_text);

}  // namespace latfuse
