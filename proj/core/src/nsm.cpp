#include "latfuse/nsm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "latfuse/cvp.hpp"
#include "latfuse/decimal.hpp"
#include "parallel.hpp"

namespace latfuse {

namespace {

struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double y) {
    ++count;
    const double delta = y - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (y - mean);
  }

  // Chan et al. pairwise combination.
  void merge(const Moments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const auto na = static_cast<double>(count);
    const auto nb = static_cast<double>(o.count);
    const double n = na + nb;
    const double delta = o.mean - mean;
    mean += delta * nb / n;
    m2 += o.m2 + delta * delta * na * nb / n;
    count += o.count;
  }
};

NsmEstimate to_estimate(const Moments& m, std::uint64_t seed) {
  NsmEstimate e;
  e.mean = m.mean;
  e.n_samples = m.count;
  e.seed = seed;
  const auto n = static_cast<double>(m.count);
  e.var_of_mean = m.count > 1 ? m.m2 / ((n - 1.0) * n) : 0.0;
  return e;
}

std::int64_t chunk_count(std::int64_t n_samples) {
  return (n_samples + kSampleChunk - 1) / kSampleChunk;
}

// Calls visit(index, dist_sq) for every sample of chunk c, in order.
template <class Visit>
void run_chunk(const ClosestPointSolver& solver, std::int64_t n_samples, std::uint64_t seed,
               std::int64_t c, Visit&& visit) {
  auto rng = make_stream(seed, static_cast<std::uint64_t>(c));
  const std::int64_t begin = c * kSampleChunk;
  const std::int64_t end = std::min(n_samples, begin + kSampleChunk);
  const auto& g = solver.generator();
  for (std::int64_t i = begin; i < end; ++i) {
    const RowVector x = sample_uniform_mod_lattice(g, rng);
    visit(i, solver.closest_point(x).dist_sq);
  }
}

double normalizer(const GeneratorMatrix& g) {
  return static_cast<double>(g.dim()) * volume_power(g.volume(), g.dim());
}

}  // namespace

double NsmEstimate::std_of_mean() const { return std::sqrt(var_of_mean); }

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) {
  // 53 random mantissa bits; never returns 1.0.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

RowVector sample_unit_cube(int n, Rng& rng) {
  RowVector u(n);
  for (int i = 0; i < n; ++i) u(i) = uniform01(rng);
  return u;
}

RowVector sample_uniform_mod_lattice(const GeneratorMatrix& g, Rng& rng) {
  return sample_unit_cube(g.dim(), rng) * g.rows();
}

NsmEstimate estimate_nsm(const GeneratorMatrix& g, std::int64_t n_samples, std::uint64_t seed,
                         int workers) {
  if (n_samples < 2) throw std::invalid_argument("estimate_nsm needs at least 2 samples");
  const ClosestPointSolver solver(g);
  const double denom = normalizer(g);
  const std::int64_t chunks = chunk_count(n_samples);
  std::vector<Moments> partial(static_cast<std::size_t>(chunks));
  detail::parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t c) {
    Moments m;
    run_chunk(solver, n_samples, seed, static_cast<std::int64_t>(c),
              [&](std::int64_t, double d) { m.push(d / denom); });
    partial[c] = m;
  });
  Moments total;
  for (const auto& m : partial) total.merge(m);
  return to_estimate(total, seed);
}

std::vector<double> sample_dist_sq(const GeneratorMatrix& g, std::int64_t n_samples,
                                   std::uint64_t seed, int workers) {
  if (n_samples < 0) throw std::invalid_argument("negative sample count");
  const ClosestPointSolver solver(g);
  std::vector<double> out(static_cast<std::size_t>(n_samples));
  detail::parallel_for(static_cast<std::size_t>(chunk_count(n_samples)), workers,
                       [&](std::size_t c) {
                         run_chunk(solver, n_samples, seed, static_cast<std::int64_t>(c),
                                   [&](std::int64_t i, double d) {
                                     out[static_cast<std::size_t>(i)] = d;
                                   });
                       });
  return out;
}

std::vector<double> nsm_sample_values(const GeneratorMatrix& g, std::int64_t n_samples,
                                      std::uint64_t seed, int workers) {
  auto values = sample_dist_sq(g, n_samples, seed, workers);
  const double denom = normalizer(g);
  for (auto& v : values) v /= denom;
  return values;
}

NsmEstimate summarize_streaming(const std::vector<double>& values, std::uint64_t seed) {
  Moments m;
  for (double y : values) m.push(y);
  return to_estimate(m, seed);
}

NsmEstimate summarize_two_pass(const std::vector<double>& values, std::uint64_t seed) {
  NsmEstimate e;
  e.seed = seed;
  e.n_samples = static_cast<std::int64_t>(values.size());
  if (values.empty()) return e;
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double y : values) sum += y;
  e.mean = sum / n;
  double ss = 0.0;
  for (double y : values) ss += (y - e.mean) * (y - e.mean);
  e.var_of_mean = values.size() > 1 ? ss / (n * (n - 1.0)) : 0.0;
  return e;
}

Interval confidence_interval(const NsmEstimate& e, double z_score) {
  const double half = z_score * e.std_of_mean();
  return Interval{e.mean - half, e.mean + half};
}

std::string nsm_csv_header() {
  return "lattice,n,n_samples,seed,mean,std_of_mean,ci_lo,ci_hi,wall_time_sec";
}

std::string nsm_csv_row(const std::string& lattice_id, int dim, const NsmEstimate& e,
                        double wall_time_sec) {
  const auto ci = confidence_interval(e, kZ95);
  std::ostringstream os;
  os << lattice_id << ',' << dim << ',' << e.n_samples << ',' << e.seed << ','
     << format_double(e.mean) << ',' << format_double(e.std_of_mean()) << ','
     << format_double(ci.lo) << ',' << format_double(ci.hi) << ',' << format_double(wall_time_sec);
  return os.str();
}

}  // namespace latfuse
