#include "latfuse_cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "latfuse/catalog.hpp"
#include "latfuse/checkpoint.hpp"
#include "latfuse/decimal.hpp"
#include "latfuse/errors.hpp"
#include "latfuse/fusion.hpp"
#include "latfuse/io.hpp"
#include "latfuse/nsm.hpp"
#include "latfuse/optimizer.hpp"
#include "latfuse/train_defaults.hpp"
#include "latfuse_cli/manifest.hpp"

namespace latfuse::cli {

namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

// File-name-safe form of a component label: "K12,Z*2" -> "K12_Z_2".
std::string file_stem(const FusionSpec& spec) {
  std::string stem = spec.label();
  for (auto& c : stem) {
    if (c == ',' || c == '*') c = '_';
  }
  return stem;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string sci(double v, int digits) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(digits) << v;
  return os.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Appends one CSV row, writing the header first when the file is new. The
// whole file is rewritten atomically.
void append_csv(const std::filesystem::path& path, const std::string& header, const std::string& row) {
  std::string text;
  if (std::filesystem::exists(path)) text = read_file(path);
  if (text.empty()) text = header + "\n";
  else if (text.back() != '\n') text += '\n';
  text += row + "\n";
  write_file_atomic(path, text);
}

struct SeedChoice {
  std::uint64_t value;
  bool from_entropy;
};

SeedChoice resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return {*seed, false};
  return {entropy_seed(), true};
}

std::vector<std::string> with_seed(std::vector<std::string> args, const SeedChoice& s) {
  if (s.from_entropy) {
    args.push_back("--seed");
    args.push_back(std::to_string(s.value));
  }
  return args;
}

void print_estimate(std::ostream& out, const std::string& id, int dim, const NsmEstimate& e, double wall,
                    OutputFormat format) {
  if (format == OutputFormat::csv) {
    out << nsm_csv_header() << '\n' << nsm_csv_row(id, dim, e, wall) << '\n';
    return;
  }
  const auto ci95 = confidence_interval(e, kZ95);
  const auto ci975 = confidence_interval(e, kZ975);
  out << "lattice      " << id << " (dim " << dim << ")\n"
      << "samples      " << e.n_samples << "  seed " << e.seed << '\n'
      << "nsm          " << fixed(e.mean, 8) << '\n'
      << "std          " << sci(e.std_of_mean(), 3) << '\n'
      << "95% CI       [" << fixed(ci95.lo, 8) << ", " << fixed(ci95.hi, 8) << "]\n"
      << "97.5% CI     [" << fixed(ci975.lo, 8) << ", " << fixed(ci975.hi, 8) << "]\n"
      << "time         " << fixed(wall, 2) << " s\n";
}

Json estimate_json(const NsmEstimate& e) {
  const auto ci = confidence_interval(e, kZ95);
  return Json{{"mean", format_double(e.mean)},
              {"std_of_mean", format_double(e.std_of_mean())},
              {"n_samples", e.n_samples},
              {"seed", e.seed},
              {"ci95", {format_double(ci.lo), format_double(ci.hi)}}};
}

// Seed of the final evaluation, kept apart from the training sample streams.
std::uint64_t eval_seed_for(std::uint64_t train_seed) { return train_seed + 0x9E3779B97F4A7C15ULL; }

}  // namespace

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

int cmd_catalog(const CatalogOptions& opts, std::ostream& out) {
  const auto& cat = Catalog::default_catalog();
  std::vector<LatticeRecord> rows;
  rows.push_back(cubic_record(1));
  rows.front().name = "Z1";
  for (const auto& r : cat.entries()) rows.push_back(r);
  if (opts.format == OutputFormat::csv) {
    out << "name,dim,volume,reference_nsm,reference_nsm_std,note\n";
    for (const auto& r : rows) {
      out << r.name << ',' << r.dim() << ',' << format_double(r.reference_volume) << ','
          << (r.reference_nsm ? format_double(*r.reference_nsm) : "") << ','
          << (r.reference_nsm_std ? format_double(*r.reference_nsm_std) : "") << ',' << r.note << '\n';
    }
    return kExitOk;
  }
  out << std::left << std::setw(8) << "name" << std::right << std::setw(5) << "dim" << std::setw(14)
      << "volume" << std::setw(12) << "nsm" << std::setw(12) << "std" << "  note\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(8) << r.name << std::right << std::setw(5) << r.dim() << std::setw(14)
        << fixed(r.reference_volume, 6) << std::setw(12)
        << (r.reference_nsm ? fixed(*r.reference_nsm, 7) : "-") << std::setw(12)
        << (r.reference_nsm_std ? sci(*r.reference_nsm_std, 1) : "-") << "  " << r.note << '\n';
  }
  out << "(Z<n> resolves to the cubic lattice of any dimension n)\n";
  return kExitOk;
}

int cmd_nsm(const NsmOptions& opts, const std::vector<std::string>& args, std::ostream& out) {
  const auto started = std::chrono::system_clock::now();
  if (opts.lattice.empty() == opts.file.empty()) {
    throw CLI::ValidationError("nsm", "give exactly one of LATTICE or --file");
  }
  const LatticeRecord rec =
      opts.file.empty() ? catalog_get(opts.lattice) : read_lattice_file(opts.file);
  const std::string id = opts.file.empty() ? rec.name : opts.file.string();
  const auto seed = resolve_seed(opts.seed);

  const auto t0 = Clock::now();
  const auto e = estimate_nsm(rec.generator, opts.samples, seed.value, opts.workers);
  const double wall = seconds_since(t0);
  print_estimate(out, id, rec.dim(), e, wall, opts.format);
  if (rec.reference_nsm && opts.format == OutputFormat::plain) {
    out << "reference    " << fixed(*rec.reference_nsm, 8) << "  (" << std::showpos
        << fixed((e.mean - *rec.reference_nsm) / e.std_of_mean(), 2) << std::noshowpos << " std)\n";
  }

  if (!opts.out.empty()) {
    append_csv(opts.out, nsm_csv_header(), nsm_csv_row(id, rec.dim(), e, wall));
    RunManifest m;
    m.command = "nsm";
    m.replay_args = with_seed(args, seed);
    m.config = Json{{"lattice", id}, {"samples", opts.samples}, {"workers", opts.workers}};
    m.config["result"] = estimate_json(e);
    m.seed = seed.value;
    m.seed_from_entropy = seed.from_entropy;
    m.artifacts = {opts.out};
    m.started = started;
    m.finished = std::chrono::system_clock::now();
    write_manifest(opts.out, m);
  }
  return kExitOk;
}

int cmd_fuse(const FuseOptions& opts, const std::vector<std::string>& args, std::ostream& out) {
  const auto started = std::chrono::system_clock::now();
  const auto spec = make_optimal_spec(parse_components(opts.components));
  const auto g = build_product(spec);
  const double predicted = predicted_product_nsm(spec.expanded());
  const auto rec = make_record(spec.label(), g, predicted, "optimally scaled orthogonal product");

  out << "components   " << spec.label() << " (dim " << g.dim() << ")\n";
  for (std::size_t i = 0; i < spec.components.size(); ++i) {
    out << "scale        " << spec.components[i].lattice.name << " x" << spec.components[i].multiplicity
        << "  a = " << format_double(spec.scalings[i]) << '\n';
  }
  out << "volume       " << format_double(g.volume()) << '\n'
      << "predicted    " << fixed(predicted, 8) << '\n';

  const std::filesystem::path path = opts.out.empty() ? std::filesystem::path(file_stem(spec) + ".lat.json") : opts.out;
  write_lattice_file(path, rec);
  RunManifest m;
  m.command = "fuse";
  m.replay_args = args;
  Json scal = Json::array();
  for (double a : spec.scalings) scal.push_back(format_double(a));
  m.config = Json{{"components", spec.label()},
                  {"scalings", std::move(scal)},
                  {"predicted_nsm", format_double(predicted)}};
  m.artifacts = {path};
  m.started = started;
  m.finished = std::chrono::system_clock::now();
  write_manifest(path, m);
  out << "wrote        " << path.string() << '\n';
  return kExitOk;
}

int cmd_train(const TrainOptions& opts, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  const auto started = std::chrono::system_clock::now();
  const auto kind = parse_transform_kind(opts.method);
  const auto spec = make_optimal_spec(parse_components(opts.components));
  const int n = spec.total_dim();
  const double predicted = predicted_product_nsm(spec.expanded());
  const auto seed = resolve_seed(opts.seed);

  std::filesystem::path ckpt_path = opts.checkpoint;
  if (ckpt_path.empty()) {
    ckpt_path = file_stem(spec) + "-" + std::string(to_string(kind)) + ".ckpt.json";
  }
  std::filesystem::path history_path = opts.out;
  if (history_path.empty()) {
    history_path = ckpt_path;
    history_path.replace_extension();
    history_path.replace_extension(".history.csv");
  }

  std::optional<FusionModel> model;
  TrainConfig cfg = default_train_config(n, kind);
  TrainState state;
  TrainHistory history;
  if (opts.resume && std::filesystem::exists(ckpt_path)) {
    auto ck = load_checkpoint(ckpt_path);
    if (ck.config.label != spec.label() || ck.model.kind() != kind) {
      throw std::invalid_argument("checkpoint " + ckpt_path.string() + " holds a " +
                                  std::string(to_string(ck.model.kind())) + " run of " + ck.config.label);
    }
    model.emplace(std::move(ck.model));
    cfg = ck.config;
    state = ck.state;
    history = std::move(ck.history);
    out << "resuming     " << ckpt_path.string() << " at epoch " << state.epoch << '\n';
  } else {
    cfg.seed = seed.value;
    auto init_rng = make_stream(seed.value, ~std::uint64_t{0});
    if (kind == TransformKind::householder) {
      model.emplace(make_householder_model(spec, init_rng));
    } else {
      model.emplace(make_exp_model(spec, opts.init_scale, init_rng));
    }
  }
  if (opts.epochs) cfg.epochs = *opts.epochs;
  if (opts.lr) cfg.lr = *opts.lr;
  if (opts.batch) cfg.batch = *opts.batch;
  if (opts.step_period) cfg.step_period = *opts.step_period;
  if (opts.step_factor) cfg.step_factor = *opts.step_factor;
  if (opts.points_per_epoch) cfg.points_per_epoch = *opts.points_per_epoch;
  cfg.workers = opts.workers;
  cfg.eval_every = opts.eval_every;
  cfg.eval_samples = opts.eval_samples;
  cfg.checkpoint_every = opts.checkpoint_every;
  cfg.checkpoint_path = ckpt_path;
  cfg.label = spec.label();
  cfg.validate();

  out << "components   " << spec.label() << " (dim " << n << ")\n"
      << "method       " << to_string(kind) << '\n'
      << "schedule     " << cfg.epochs << " epochs x " << cfg.updates_per_epoch() << " updates, batch "
      << cfg.batch << ", lr " << format_double(cfg.lr) << " (x" << format_double(cfg.step_factor)
      << " every " << cfg.step_period << " updates)\n"
      << "seed         " << cfg.seed << '\n'
      << "baseline     " << fixed(predicted, 8) << '\n';

  const auto t0 = Clock::now();
  const auto result = train(*model, cfg, state, history, [&](const FusionModel&, const EpochRecord& r) {
    err << "epoch " << r.epoch << "  lr " << format_double(r.lr) << "  loss " << fixed(r.mean_loss, 6);
    if (r.nsm) err << "  nsm " << fixed(r.nsm->mean, 6) << " +- " << sci(r.nsm->std_of_mean(), 2);
    err << '\n';
  });
  write_file_atomic(history_path, result.history.to_csv());
  if (cfg.epochs == 0 || result.state.epoch == state.epoch) {
    // Nothing ran this time; still leave a checkpoint behind.
    save_checkpoint(ckpt_path, Checkpoint{result.model, cfg, result.state, result.history});
  }

  const auto e = evaluate(result.model, opts.samples, eval_seed_for(cfg.seed), cfg.workers);
  const double wall = seconds_since(t0);
  const bool accepted = within_baseline(e, predicted);
  print_estimate(out, spec.label(), n, e, wall, opts.format);
  out << "vs baseline  " << std::showpos << fixed((e.mean - predicted) / e.std_of_mean(), 2)
      << std::noshowpos << " std  " << (accepted ? "accepted" : "REJECTED (above baseline)") << '\n'
      << "checkpoint   " << ckpt_path.string() << '\n'
      << "history      " << history_path.string() << '\n';

  RunManifest m;
  m.command = "train";
  m.replay_args = with_seed(args, seed);
  m.config = Json{{"components", spec.label()},
                  {"method", std::string(to_string(kind))},
                  {"train", train_config_to_json(cfg)},
                  {"init_scale", format_double(opts.init_scale)},
                  {"final_samples", opts.samples},
                  {"baseline_nsm", format_double(predicted)},
                  {"result", estimate_json(e)},
                  {"accepted", accepted}};
  m.seed = cfg.seed;
  m.seed_from_entropy = seed.from_entropy && !opts.resume;
  m.artifacts = {ckpt_path, history_path};
  m.started = started;
  m.finished = std::chrono::system_clock::now();
  write_manifest(ckpt_path, m);
  return accepted ? kExitOk : kExitNumeric;
}

int cmd_eval(const EvalOptions& opts, const std::vector<std::string>& args, std::ostream& out) {
  const auto started = std::chrono::system_clock::now();
  const auto ck = load_checkpoint(opts.checkpoint);
  const auto seed = resolve_seed(opts.seed);
  const auto t0 = Clock::now();
  const auto e = evaluate(ck.model, opts.samples, seed.value, opts.workers);
  const double wall = seconds_since(t0);
  const std::string id = ck.config.label.empty() ? opts.checkpoint.string() : ck.config.label;
  print_estimate(out, id, ck.model.dim(), e, wall, opts.format);
  if (opts.format == OutputFormat::plain) {
    out << "trained      " << ck.state.epoch << " epochs, " << ck.state.updates << " updates ("
        << to_string(ck.model.kind()) << ")\n";
  }
  if (!opts.out.empty()) {
    append_csv(opts.out, nsm_csv_header(), nsm_csv_row(id, ck.model.dim(), e, wall));
    RunManifest m;
    m.command = "eval";
    m.replay_args = with_seed(args, seed);
    m.config = Json{{"checkpoint", opts.checkpoint.string()},
                    {"samples", opts.samples},
                    {"workers", opts.workers},
                    {"result", estimate_json(e)}};
    m.seed = seed.value;
    m.seed_from_entropy = seed.from_entropy;
    m.artifacts = {opts.out};
    m.started = started;
    m.finished = std::chrono::system_clock::now();
    write_manifest(opts.out, m);
  }
  return kExitOk;
}

namespace {

const std::map<std::string, OutputFormat> kFormats{{"plain", OutputFormat::plain},
                                                   {"csv", OutputFormat::csv}};

void add_format(CLI::App* sub, OutputFormat& f) {
  sub->add_option("--format", f, "Output format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fuse lattice quantizers and estimate their normalized second moment."};
  app.name("latfuse");
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  CatalogOptions cat_opts;
  auto* cat = app.add_subcommand("catalog", "List the builtin lattices");
  add_format(cat, cat_opts.format);

  NsmOptions nsm_opts;
  std::uint64_t nsm_seed = 0;
  auto* nsm = app.add_subcommand("nsm", "Monte-Carlo NSM estimate of one lattice");
  nsm->add_option("lattice", nsm_opts.lattice, "Catalog name (e.g. E8, K12, Z13)");
  nsm->add_option("--file", nsm_opts.file, "Lattice file written by `fuse`");
  nsm->add_option("--samples", nsm_opts.samples, "Number of samples")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
  auto* nsm_seed_opt = nsm->add_option("--seed", nsm_seed, "RNG seed (default: system entropy)");
  nsm->add_option("--workers", nsm_opts.workers, "Worker threads")->check(CLI::PositiveNumber);
  nsm->add_option("--out", nsm_opts.out, "Append the result row to this CSV");
  add_format(nsm, nsm_opts.format);

  FuseOptions fuse_opts;
  auto* fuse = app.add_subcommand("fuse", "Write the optimally scaled orthogonal product");
  fuse->add_option("components", fuse_opts.components, "Components, e.g. K12,Z or L16,A2")->required();
  fuse->add_option("--out", fuse_opts.out, "Lattice file to write (default: <components>.lat.json)");

  TrainOptions tr;
  int tr_epochs = 0;
  double tr_lr = 0.0;
  int tr_batch = 0;
  int tr_period = 0;
  double tr_factor = 0.0;
  int tr_points = 0;
  std::uint64_t tr_seed = 0;
  auto* trn = app.add_subcommand("train", "Train a fusion transform");
  trn->add_option("components", tr.components, "Components, e.g. K12,Z")->required();
  trn->add_option("--method", tr.method, "householder or expm")
      ->check(CLI::IsMember({"householder", "expm", "matrix_exp"}));
  auto* o_epochs = trn->add_option("--epochs", tr_epochs, "Epochs (default from the dimension table)")
                       ->check(CLI::NonNegativeNumber);
  auto* o_lr = trn->add_option("--lr", tr_lr, "Learning rate")->check(CLI::NonNegativeNumber);
  auto* o_batch = trn->add_option("--batch", tr_batch, "Samples per update")->check(CLI::PositiveNumber);
  auto* o_period = trn->add_option("--step-period", tr_period, "Updates between learning-rate decays")
                       ->check(CLI::PositiveNumber);
  auto* o_factor = trn->add_option("--step-factor", tr_factor, "Learning-rate decay factor")
                       ->check(CLI::Range(0.0, 1.0));
  auto* o_points = trn->add_option("--points-per-epoch", tr_points, "Samples per epoch")
                       ->check(CLI::PositiveNumber);
  auto* o_tseed = trn->add_option("--seed", tr_seed, "RNG seed (default: system entropy)");
  trn->add_option("--workers", tr.workers, "Worker threads")->check(CLI::PositiveNumber);
  trn->add_option("--eval-every", tr.eval_every, "Interim NSM estimate every k epochs (0 = off)")
      ->check(CLI::NonNegativeNumber);
  trn->add_option("--eval-samples", tr.eval_samples, "Samples per interim estimate");
  trn->add_option("--checkpoint-every", tr.checkpoint_every, "Epochs between checkpoints")
      ->check(CLI::PositiveNumber);
  trn->add_option("--init-scale", tr.init_scale, "Std of the initial skew generator (expm)")
      ->check(CLI::NonNegativeNumber);
  trn->add_option("--samples", tr.samples, "Samples for the final estimate")
      ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
  trn->add_option("--checkpoint", tr.checkpoint, "Checkpoint file");
  trn->add_option("--out", tr.out, "History CSV");
  trn->add_flag("--resume", tr.resume, "Continue from an existing checkpoint");
  add_format(trn, tr.format);

  EvalOptions ev;
  std::uint64_t ev_seed = 0;
  auto* evl = app.add_subcommand("eval", "Estimate the NSM of a checkpointed model");
  evl->add_option("checkpoint", ev.checkpoint, "Checkpoint file")->required();
  evl->add_option("--samples", ev.samples, "Number of samples")
      ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
  auto* o_eseed = evl->add_option("--seed", ev_seed, "RNG seed (default: system entropy)");
  evl->add_option("--workers", ev.workers, "Worker threads")->check(CLI::PositiveNumber);
  evl->add_option("--out", ev.out, "Append the result row to this CSV");
  add_format(evl, ev.format);

  std::filesystem::path manifest_in;
  auto* rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  rep->add_option("manifest", manifest_in, "Manifest file")->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*cat) return cmd_catalog(cat_opts, out);
    if (*nsm) {
      if (nsm_seed_opt->count()) nsm_opts.seed = nsm_seed;
      return cmd_nsm(nsm_opts, args, out);
    }
    if (*fuse) return cmd_fuse(fuse_opts, args, out);
    if (*trn) {
      if (o_epochs->count()) tr.epochs = tr_epochs;
      if (o_lr->count()) tr.lr = tr_lr;
      if (o_batch->count()) tr.batch = tr_batch;
      if (o_period->count()) tr.step_period = tr_period;
      if (o_factor->count()) tr.step_factor = tr_factor;
      if (o_points->count()) tr.points_per_epoch = tr_points;
      if (o_tseed->count()) tr.seed = tr_seed;
      return cmd_train(tr, args, out, err);
    }
    if (*evl) {
      if (o_eseed->count()) ev.seed = ev_seed;
      return cmd_eval(ev, args, out);
    }
    if (*rep) {
      const auto m = read_manifest(manifest_in);
      if (!m.replay_args.empty() && m.replay_args.front() == "replay") {
        throw std::invalid_argument("manifest records a replay");
      }
      return run_cli(m.replay_args, out, err);
    }
  } catch (const DegenerateLatticeError& e) {
    err << "error: degenerate lattice: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace latfuse::cli
