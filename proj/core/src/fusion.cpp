#include "latfuse/fusion.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "latfuse/errors.hpp"

namespace latfuse {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double reference_nsm_of(const LatticeRecord& r) {
  if (!r.reference_nsm) {
    throw Error("lattice '" + r.name + "' has no reference NSM; the fusion formulas need one");
  }
  return *r.reference_nsm;
}

}  // namespace

int FusionSpec::total_dim() const {
  int n = 0;
  for (const auto& c : components) n += c.lattice.dim() * c.multiplicity;
  return n;
}

std::vector<LatticeRecord> FusionSpec::expanded() const {
  std::vector<LatticeRecord> out;
  for (const auto& c : components) {
    for (int k = 0; k < c.multiplicity; ++k) out.push_back(c.lattice);
  }
  return out;
}

std::vector<double> FusionSpec::expanded_scalings() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < components.size(); ++i) {
    for (int k = 0; k < components[i].multiplicity; ++k) out.push_back(scalings.at(i));
  }
  return out;
}

std::vector<Block> FusionSpec::blocks() const {
  std::vector<Block> out;
  int offset = 0;
  for (const auto& c : components) {
    for (int k = 0; k < c.multiplicity; ++k) {
      out.push_back(Block{offset, c.lattice.dim()});
      offset += c.lattice.dim();
    }
  }
  return out;
}

std::string FusionSpec::label() const {
  std::string out;
  for (const auto& c : components) {
    if (!out.empty()) out += ',';
    out += c.lattice.name;
    if (c.multiplicity != 1) out += '*' + std::to_string(c.multiplicity);
  }
  return out;
}

void FusionSpec::validate() const {
  if (components.empty()) throw std::invalid_argument("fusion spec has no components");
  if (scalings.size() != components.size()) {
    throw std::invalid_argument("fusion spec needs one scaling per component");
  }
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].multiplicity < 1) {
      throw std::invalid_argument("component multiplicity must be positive");
    }
    if (!(scalings[i] > 0.0) || !std::isfinite(scalings[i])) {
      throw std::invalid_argument("component scalings must be strictly positive");
    }
  }
}

std::vector<FusionComponent> parse_components(std::string_view text, const Catalog& catalog) {
  std::vector<FusionComponent> out;
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (item.empty()) throw std::invalid_argument("empty component in '" + std::string(text) + "'");
    const auto star = item.find('*');
    const auto name = trim(item.substr(0, star));
    int mult = 1;
    if (star != std::string_view::npos) {
      const auto m = trim(item.substr(star + 1));
      const auto res = std::from_chars(m.data(), m.data() + m.size(), mult);
      if (res.ec != std::errc() || res.ptr != m.data() + m.size() || mult < 1) {
        throw std::invalid_argument("bad multiplicity in component '" + std::string(item) + "'");
      }
    }
    out.push_back(FusionComponent{catalog.get(name), mult});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<double> optimal_scaling(const std::vector<LatticeRecord>& components,
                                    std::optional<std::size_t> anchor) {
  if (components.empty()) return {};
  std::size_t a = 0;
  if (anchor) {
    a = *anchor;
    if (a >= components.size()) throw std::out_of_range("anchor index out of range");
  } else {
    for (std::size_t i = 1; i < components.size(); ++i) {
      if (components[i].dim() > components[a].dim()) a = i;
    }
  }
  // Unnormalized coefficient 1/(sqrt(G_i) V_i^{1/n_i}); dividing by the
  // anchor's value fixes C.
  std::vector<double> raw;
  raw.reserve(components.size());
  for (const auto& c : components) {
    const double g = reference_nsm_of(c);
    raw.push_back(1.0 / (std::sqrt(g) * std::pow(c.generator.volume(), 1.0 / c.dim())));
  }
  std::vector<double> out;
  out.reserve(raw.size());
  for (double r : raw) out.push_back(r / raw[a]);
  out[a] = 1.0;
  return out;
}

double predicted_product_nsm(const std::vector<LatticeRecord>& components) {
  if (components.empty()) throw std::invalid_argument("no components");
  int n = 0;
  double weighted_log = 0.0;
  for (const auto& c : components) {
    n += c.dim();
    weighted_log += c.dim() * std::log(reference_nsm_of(c));
  }
  return std::exp(weighted_log / n);
}

FusionSpec make_optimal_spec(std::vector<FusionComponent> components) {
  FusionSpec spec;
  spec.components = std::move(components);
  std::vector<LatticeRecord> distinct;
  for (const auto& c : spec.components) distinct.push_back(c.lattice);
  // The anchor is picked among distinct entries, which matches the expanded
  // choice because copies share a dimension.
  spec.scalings = optimal_scaling(distinct);
  spec.validate();
  return spec;
}

GeneratorMatrix build_product(const FusionSpec& spec) {
  spec.validate();
  const int n = spec.total_dim();
  Matrix out = Matrix::Zero(n, n);
  const auto parts = spec.expanded();
  const auto scales = spec.expanded_scalings();
  const auto blocks = spec.blocks();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& b = blocks[i];
    out.block(b.offset, b.offset, b.size, b.size) = scales[i] * parts[i].generator.rows();
  }
  return GeneratorMatrix(std::move(out));
}

}  // namespace latfuse
