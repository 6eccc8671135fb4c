#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "latfuse/lattice.hpp"

namespace latfuse {

using Rng = std::mt19937_64;

/// Samples are drawn in fixed-size chunks; chunk c always uses the stream
/// make_stream(seed, c), so results do not depend on the worker count.
inline constexpr std::int64_t kSampleChunk = 4096;

/// Independent generator for substream `stream` of `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// u uniform on [0,1)^n.
RowVector sample_unit_cube(int n, Rng& rng);

/// x = u * G with u uniform on [0,1)^n, i.e. uniform modulo the lattice.
RowVector sample_uniform_mod_lattice(const GeneratorMatrix& g, Rng& rng);

/// Monte-Carlo estimate of the normalized second moment.
struct NsmEstimate {
  double mean = 0.0;
  double var_of_mean = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;

  double std_of_mean() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
};

/// Mean of |x - Q(x)|^2 / (n V^{2/n}) over n_samples uniform points, with the
/// unbiased variance of that mean. Requires n_samples >= 2.
NsmEstimate estimate_nsm(const GeneratorMatrix& g, std::int64_t n_samples, std::uint64_t seed,
                         int workers = 1);

/// The per-sample squared distances |x_i - Q(x_i)|^2 behind estimate_nsm, in
/// sample order.
std::vector<double> sample_dist_sq(const GeneratorMatrix& g, std::int64_t n_samples,
                                   std::uint64_t seed, int workers = 1);

/// The per-sample normalized values y_i = dist_sq_i / (n V^{2/n}).
std::vector<double> nsm_sample_values(const GeneratorMatrix& g, std::int64_t n_samples,
                                      std::uint64_t seed, int workers = 1);

/// Summary statistics of a sample, by Welford's streaming update.
NsmEstimate summarize_streaming(const std::vector<double>& values, std::uint64_t seed = 0);

/// Same statistics by the textbook two-pass formula.
NsmEstimate summarize_two_pass(const std::vector<double>& values, std::uint64_t seed = 0);

/// mean -/+ z * sqrt(var_of_mean).
Interval confidence_interval(const NsmEstimate& e, double z_score);

/// Two-sided normal quantiles used by the tools.
inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ975 = 2.241402727604947;

std::string nsm_csv_header();

/// lattice id, n, n_samples, seed, mean, std_of_mean, ci_lo, ci_hi (95%), wall_time_sec
std::string nsm_csv_row(const std::string& lattice_id, int dim, const NsmEstimate& e,
                        double wall_time_sec);

}  // namespace latfuse
