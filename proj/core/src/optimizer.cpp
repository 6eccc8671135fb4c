#include "latfuse/optimizer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/LU>

#include "latfuse/checkpoint.hpp"
#include "latfuse/cvp.hpp"
#include "latfuse/decimal.hpp"
#include "latfuse/errors.hpp"
#include "parallel.hpp"

namespace latfuse {

namespace {

void check_blocks(const std::vector<Block>& blocks, int n) {
  int next = 0;
  for (const auto& b : blocks) {
    if (b.offset != next || b.size < 1) {
      throw std::invalid_argument("fusion blocks must tile the coordinates contiguously");
    }
    next += b.size;
  }
  if (next != n) throw std::invalid_argument("fusion blocks do not cover the base dimension");
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

std::string_view to_string(TransformKind kind) {
  return kind == TransformKind::householder ? "householder" : "matrix_exp";
}

TransformKind parse_transform_kind(std::string_view text) {
  if (text == "householder") return TransformKind::householder;
  if (text == "expm" || text == "matrix_exp") return TransformKind::matrix_exp;
  throw std::invalid_argument("unknown method '" + std::string(text) +
                              "' (expected householder or expm)");
}

FusionModel::FusionModel(GeneratorMatrix base, std::vector<Block> blocks, Params params)
    : base_(std::move(base)), blocks_(std::move(blocks)), params_(std::move(params)) {
  const int n = base_.dim();
  check_blocks(blocks_, n);
  std::visit(Overloaded{
                 [&](const HouseholderParam& p) {
                   if (p.vectors.size() != blocks_.size()) {
                     throw std::invalid_argument("need one Householder vector per block");
                   }
                   for (const auto& v : p.vectors) {
                     if (v.size() != n) throw std::invalid_argument("Householder vector has wrong length");
                     if (!(v.norm() > kMinHouseholderNorm)) {
                       throw std::invalid_argument("Householder vector is too close to zero");
                     }
                   }
                 },
                 [&](const ExpParam& p) {
                   if (p.a.rows() != n || p.a.cols() != n) {
                     throw std::invalid_argument("exp parameter has wrong shape");
                   }
                 }},
             params_);
}

TransformKind FusionModel::kind() const {
  return std::holds_alternative<HouseholderParam>(params_) ? TransformKind::householder
                                                           : TransformKind::matrix_exp;
}

Matrix FusionModel::transform() const {
  const int n = dim();
  return std::visit(Overloaded{[&](const HouseholderParam& p) {
                                 Matrix r(n, n);
                                 for (std::size_t i = 0; i < blocks_.size(); ++i) {
                                   const auto& b = blocks_[i];
                                   r.middleRows(b.offset, b.size) =
                                       householder_matrix(p.vectors[i]).middleRows(b.offset, b.size);
                                 }
                                 return r;
                               },
                               [&](const ExpParam& p) { return matrix_exp(p.a); }},
                    params_);
}

GeneratorMatrix FusionModel::assemble() const {
  const Matrix r = transform();
  const double det = std::abs(r.partialPivLu().determinant());
  if (!(det > kMinTransformDet)) {
    throw DegenerateLatticeError("fusion transform is singular (|det R| = " + format_double(det) +
                                 ")");
  }
  return GeneratorMatrix(base_.rows() * r);
}

Vector FusionModel::flat_params() const {
  const int n = dim();
  return std::visit(Overloaded{[&](const HouseholderParam& p) {
                                 Vector flat(static_cast<Eigen::Index>(p.vectors.size()) * n);
                                 for (std::size_t i = 0; i < p.vectors.size(); ++i) {
                                   flat.segment(static_cast<Eigen::Index>(i) * n, n) = p.vectors[i];
                                 }
                                 return flat;
                               },
                               [&](const ExpParam& p) {
                                 Vector flat(n * n);
                                 for (int i = 0; i < n; ++i) {
                                   for (int j = 0; j < n; ++j) flat(i * n + j) = p.a(i, j);
                                 }
                                 return flat;
                               }},
                    params_);
}

void FusionModel::set_flat_params(const Vector& flat) {
  const int n = dim();
  Params next = params_;
  std::visit(Overloaded{[&](HouseholderParam& p) {
                          if (flat.size() != static_cast<Eigen::Index>(p.vectors.size()) * n) {
                            throw std::invalid_argument("flat parameter size mismatch");
                          }
                          for (std::size_t i = 0; i < p.vectors.size(); ++i) {
                            p.vectors[i] = flat.segment(static_cast<Eigen::Index>(i) * n, n);
                          }
                        },
                        [&](ExpParam& p) {
                          if (flat.size() != n * n) {
                            throw std::invalid_argument("flat parameter size mismatch");
                          }
                          for (int i = 0; i < n; ++i) {
                            for (int j = 0; j < n; ++j) p.a(i, j) = flat(i * n + j);
                          }
                        }},
             next);
  *this = FusionModel(base_, blocks_, std::move(next));
}

Vector FusionModel::param_gradient(const Matrix& g_bar) const {
  const int n = dim();
  const Matrix r_bar = base_.rows().transpose() * g_bar;
  return std::visit(Overloaded{[&](const HouseholderParam& p) {
                                 Vector flat(static_cast<Eigen::Index>(p.vectors.size()) * n);
                                 for (std::size_t i = 0; i < blocks_.size(); ++i) {
                                   const auto& b = blocks_[i];
                                   Matrix h_bar = Matrix::Zero(n, n);
                                   h_bar.middleRows(b.offset, b.size) = r_bar.middleRows(b.offset, b.size);
                                   flat.segment(static_cast<Eigen::Index>(i) * n, n) =
                                       householder_vjp(p.vectors[i], h_bar);
                                 }
                                 return flat;
                               },
                               [&](const ExpParam& p) {
                                 const Matrix a_bar = matrix_exp_vjp(p.a, r_bar);
                                 Vector flat(n * n);
                                 for (int i = 0; i < n; ++i) {
                                   for (int j = 0; j < n; ++j) flat(i * n + j) = a_bar(i, j);
                                 }
                                 return flat;
                               }},
                    params_);
}

GeneratorMatrix assemble(const FusionModel& model) { return model.assemble(); }

FusionModel make_householder_model(const FusionSpec& spec, const Vector& shared_vector) {
  const auto blocks = spec.blocks();
  HouseholderParam p;
  p.vectors.assign(blocks.size(), shared_vector);
  return FusionModel(build_product(spec), blocks, std::move(p));
}

FusionModel make_householder_model(const FusionSpec& spec, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(spec.total_dim());
  for (auto& x : v) x = normal(rng);
  // Unit length, so lr is an angular step size independent of dimension.
  return make_householder_model(spec, Vector(v / v.norm()));
}

FusionModel make_exp_model(const FusionSpec& spec, double init_scale, Rng& rng) {
  return FusionModel(build_product(spec), spec.blocks(), skew_init(spec.total_dim(), init_scale, rng));
}

LossValue loss(const GeneratorMatrix& gp, const RowVector& x) {
  const auto r = closest_point(gp, x);
  return LossValue{r.dist_sq / volume_power(gp.volume(), gp.dim()), r.coeffs};
}

Matrix loss_grad_G(const GeneratorMatrix& gp, const RowVector& x, const IntRowVector& z) {
  const int n = gp.dim();
  const double s = 1.0 / volume_power(gp.volume(), n);
  const RowVector e = x - z.cast<double>() * gp.rows();
  const Matrix inv_t = gp.rows().inverse().transpose();
  return s * (-2.0 * z.cast<double>().transpose() * e) - (2.0 / n) * e.squaredNorm() * s * inv_t;
}

Matrix sample_loss_grad_G(const GeneratorMatrix& gp, const RowVector& u, const IntRowVector& z) {
  const int n = gp.dim();
  const double s = 1.0 / volume_power(gp.volume(), n);
  const RowVector y = u - z.cast<double>();
  const RowVector e = y * gp.rows();
  const Matrix inv_t = gp.rows().inverse().transpose();
  return s * (2.0 * y.transpose() * e) - (2.0 / n) * e.squaredNorm() * s * inv_t;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (points_per_epoch < 1) throw std::invalid_argument("points_per_epoch must be positive");
  if (batch < 1 || batch > points_per_epoch) {
    throw std::invalid_argument("batch must lie in [1, points_per_epoch]");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be non-negative");
  if (step_period < 1) throw std::invalid_argument("step_period must be positive");
  if (!(step_factor > 0.0 && step_factor <= 1.0)) {
    throw std::invalid_argument("step_factor must lie in (0, 1]");
  }
  if (eval_every < 0) throw std::invalid_argument("eval_every must be non-negative");
  if (eval_every > 0 && eval_samples < 2) throw std::invalid_argument("eval_samples must be >= 2");
  if (workers < 1) throw std::invalid_argument("workers must be positive");
  if (checkpoint_every < 1) throw std::invalid_argument("checkpoint_every must be positive");
  if (!(divergence_factor > 1.0)) throw std::invalid_argument("divergence_factor must exceed 1");
}

double TrainConfig::lr_at(std::int64_t update) const {
  return lr * std::pow(step_factor, static_cast<double>(update / step_period));
}

std::string TrainHistory::csv_header() { return "epoch,lr,mean_loss,nsm_estimate,nsm_std"; }

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const auto& r : records) {
    os << r.epoch << ',' << format_double(r.lr) << ',' << format_double(r.mean_loss) << ',';
    if (r.nsm) os << format_double(r.nsm->mean) << ',' << format_double(r.nsm->std_of_mean());
    else os << ',';
    os << '\n';
  }
  return os.str();
}

namespace {

struct StepResult {
  double mean_loss = 0.0;
  Matrix g_bar;
};

// One averaged gradient of the per-sample NSM loss at the current model.
StepResult batch_gradient(const FusionModel& model, const TrainConfig& cfg, std::int64_t update) {
  const GeneratorMatrix gp = model.assemble();
  const int n = gp.dim();
  const ClosestPointSolver solver(gp);
  const double s = 1.0 / volume_power(gp.volume(), n);

  // Per-sample rows, reduced in sample order below so the result does not
  // depend on the worker count.
  const int b = cfg.batch;
  auto rng = make_stream(cfg.seed, static_cast<std::uint64_t>(update));
  Matrix u(b, n);
  for (int i = 0; i < b; ++i) u.row(i) = sample_unit_cube(n, rng);
  Matrix y(b, n);
  Matrix e(b, n);
  Vector d(b);
  const int slices = std::min(cfg.workers, b);
  detail::parallel_for(static_cast<std::size_t>(slices), cfg.workers, [&](std::size_t w) {
    const int lo = static_cast<int>(w) * b / slices;
    const int hi = (static_cast<int>(w) + 1) * b / slices;
    for (int i = lo; i < hi; ++i) {
      const RowVector x = u.row(i) * gp.rows();
      const auto r = solver.closest_point(x);
      y.row(i) = u.row(i) - r.coeffs.cast<double>();
      e.row(i) = y.row(i) * gp.rows();
      d(i) = e.row(i).squaredNorm();
    }
  });
  double sum_d = 0.0;
  for (int i = 0; i < b; ++i) sum_d += d(i);
  const double mean_d = sum_d / b;
  const Matrix inv_t = gp.rows().inverse().transpose();
  StepResult out;
  out.mean_loss = s * mean_d;
  out.g_bar = (2.0 * s / b) * (y.transpose() * e) - (2.0 / n) * mean_d * s * inv_t;
  return out;
}

}  // namespace

TrainResult train(FusionModel model, const TrainConfig& cfg, TrainState state, TrainHistory history,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  const int per_epoch = cfg.updates_per_epoch();
  while (state.epoch < cfg.epochs) {
    double loss_sum = 0.0;
    double lr_used = cfg.lr_at(state.updates);
    for (int k = 0; k < per_epoch; ++k) {
      lr_used = cfg.lr_at(state.updates);
      const auto step = batch_gradient(model, cfg, state.updates);
      loss_sum += step.mean_loss;
      const Vector grad = model.param_gradient(step.g_bar);
      if (!grad.allFinite()) {
        throw DivergenceError("non-finite gradient at update " + std::to_string(state.updates));
      }
      model.set_flat_params(model.flat_params() - lr_used * grad);
      ++state.updates;
    }
    ++state.epoch;

    EpochRecord rec;
    rec.epoch = state.epoch;
    rec.lr = lr_used;
    rec.mean_loss = loss_sum / per_epoch;
    if (cfg.eval_every > 0 && state.epoch % cfg.eval_every == 0) {
      rec.nsm = evaluate(model, cfg.eval_samples, cfg.seed + static_cast<std::uint64_t>(state.epoch),
                         cfg.workers);
    }
    history.records.push_back(rec);
    if (!state.first_epoch_loss) state.first_epoch_loss = rec.mean_loss;
    if (!std::isfinite(rec.mean_loss) ||
        rec.mean_loss > cfg.divergence_factor * *state.first_epoch_loss) {
      throw DivergenceError("training diverged at epoch " + std::to_string(state.epoch) +
                            ": mean loss " + format_double(rec.mean_loss) + " exceeds " +
                            format_double(cfg.divergence_factor) + "x the first epoch's " +
                            format_double(*state.first_epoch_loss));
    }
    if (on_epoch) on_epoch(model, rec);
    if (!cfg.checkpoint_path.empty() &&
        (state.epoch % cfg.checkpoint_every == 0 || state.epoch == cfg.epochs)) {
      save_checkpoint(cfg.checkpoint_path, Checkpoint{model, cfg, state, history});
    }
  }
  return TrainResult{std::move(model), std::move(history), state};
}

NsmEstimate evaluate(const FusionModel& model, std::int64_t n_samples, std::uint64_t seed,
                     int workers) {
  return estimate_nsm(model.assemble(), n_samples, seed, workers);
}

bool within_baseline(const NsmEstimate& e, double predicted_nsm, double sigmas) {
  return e.mean <= predicted_nsm + sigmas * e.std_of_mean();
}

}  // namespace latfuse
