#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "latfuse/fusion.hpp"
#include "latfuse/lattice.hpp"
#include "latfuse/nsm.hpp"
#include "latfuse/orthogonal.hpp"

namespace latfuse {

enum class TransformKind { householder, matrix_exp };

std::string_view to_string(TransformKind kind);
/// Accepts "householder" and "expm" / "matrix_exp".
TransformKind parse_transform_kind(std::string_view text);

/// Minimum |det R| for an assembled transform.
inline constexpr double kMinTransformDet = 1e-8;

/// Learnable fusion G' = B * R of a block-diagonal base B.
///
/// Householder kind: row block i of R is rows [offset_i, offset_i + size_i) of
/// the reflection H(v_i), so each block is an exactly semi-orthogonal slice.
/// With all v_i equal, R is one global reflection and the lattice is merely
/// rotated.
///
/// Matrix-exp kind: R = exp(A) shared by all blocks; A starts skew but is
/// trained without constraint.
class FusionModel {
 public:
  using Params = std::variant<HouseholderParam, ExpParam>;

  FusionModel(GeneratorMatrix base, std::vector<Block> blocks, Params params);

  const GeneratorMatrix& base() const { return base_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  TransformKind kind() const;
  const Params& params() const { return params_; }
  int dim() const { return base_.dim(); }

  /// R, n x n.
  Matrix transform() const;

  /// G' = B * R. Throws DegenerateLatticeError when |det R| <= 1e-8.
  GeneratorMatrix assemble() const;

  /// Parameters flattened (Householder vectors concatenated, or A row-major).
  Vector flat_params() const;
  void set_flat_params(const Vector& flat);

  /// d loss / d params given g_bar = d loss / d G', chained through
  /// dG'/dR = B^T (.) and the parameterization's vjp. Same layout as
  /// flat_params().
  Vector param_gradient(const Matrix& g_bar) const;

 private:
  GeneratorMatrix base_;
  std::vector<Block> blocks_;
  Params params_;
};

GeneratorMatrix assemble(const FusionModel& model);

/// Householder model starting at the orthogonal product: every block shares
/// the same vector, so R is a single global reflection.
FusionModel make_householder_model(const FusionSpec& spec, const Vector& shared_vector);
FusionModel make_householder_model(const FusionSpec& spec, Rng& rng);

/// Matrix-exp model with A = skew_init(n, init_scale). init_scale = 0 starts
/// exactly at the orthogonal product.
FusionModel make_exp_model(const FusionSpec& spec, double init_scale, Rng& rng);

struct LossValue {
  double value = 0.0;
  IntRowVector z;
};

/// f(x)^2 * V^{-2/n} with f the exact CVP distance; z is the minimizer.
LossValue loss(const GeneratorMatrix& gp, const RowVector& x);

/// Gradient of |x - z G'|^2 V^{-2/n} in G' for fixed target x and fixed z:
/// V^{-2/n} (-2 z^T e) - (2/n) |e|^2 V^{-2/n} G'^{-T}, e = x - z G'.
Matrix loss_grad_G(const GeneratorMatrix& gp, const RowVector& x, const IntRowVector& z);

/// Gradient of |(u - z) G'|^2 V^{-2/n} in G' for fixed unit-cube coordinates u,
/// i.e. with the sample x = u G' moving with the generator. This is the
/// per-sample gradient of the NSM itself and is what training uses.
Matrix sample_loss_grad_G(const GeneratorMatrix& gp, const RowVector& u, const IntRowVector& z);

struct TrainConfig {
  int epochs = 10;
  int points_per_epoch = 200;
  /// Samples per gradient step; updates per epoch = points_per_epoch / batch.
  int batch = 1;
  double lr = 5e-3;
  /// Step decay: lr is multiplied by step_factor every step_period updates.
  int step_period = 500;
  double step_factor = 0.5;
  std::uint64_t seed = 0;
  /// Interim NSM estimate every eval_every epochs (0 = never) with eval_samples.
  int eval_every = 0;
  std::int64_t eval_samples = 20000;
  int workers = 1;
  /// Checkpoint to checkpoint_path every checkpoint_every epochs and at the end.
  int checkpoint_every = 100;
  std::filesystem::path checkpoint_path;
  /// Abort when an epoch's mean loss exceeds this multiple of the first epoch's.
  double divergence_factor = 10.0;
  /// Free-form run label (the component string) carried into checkpoints.
  std::string label;

  void validate() const;
  int updates_per_epoch() const { return points_per_epoch / batch; }
  double lr_at(std::int64_t update) const;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  std::optional<NsmEstimate> nsm;
};

struct TrainHistory {
  std::vector<EpochRecord> records;

  static std::string csv_header();
  /// epoch, lr, mean_loss, nsm_estimate, nsm_std (blank when not evaluated)
  std::string to_csv() const;
};

/// Position of a run: the sample streams are make_stream(seed, update), so
/// (seed, updates) is the complete RNG state.
struct TrainState {
  int epoch = 0;
  std::int64_t updates = 0;
  std::optional<double> first_epoch_loss;
};

struct TrainResult {
  FusionModel model;
  TrainHistory history;
  TrainState state;
};

/// Called after every epoch; used for logging.
using EpochCallback = std::function<void(const FusionModel&, const EpochRecord&)>;

/// Plain SGD on the flattened parameters with step decay, one averaged
/// gradient per batch, CVP minimizers held fixed within a step. Continues from
/// `state`/`history` when resuming. Throws DivergenceError when the guard trips.
TrainResult train(FusionModel model, const TrainConfig& cfg, TrainState state = {},
                  TrainHistory history = {}, const EpochCallback& on_epoch = {});

/// estimate_nsm(assemble(model), ...).
NsmEstimate evaluate(const FusionModel& model, std::int64_t n_samples, std::uint64_t seed,
                     int workers = 1);

/// A trained model is acceptable only if its NSM is not above the orthogonal
/// product prediction by more than `sigmas` standard deviations.
bool within_baseline(const NsmEstimate& e, double predicted_nsm, double sigmas = 3.0);

}  // namespace latfuse
