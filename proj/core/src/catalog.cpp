#include "latfuse/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "latfuse/decimal.hpp"
#include "latfuse/errors.hpp"
#include "latfuse/io.hpp"

namespace latfuse {

namespace detail {
extern const std::string_view kEmbeddedCatalog;
}

namespace {

using Json = nlohmann::ordered_json;

constexpr double kVolumeRelTol = 1e-9;

std::optional<int> cubic_dim(std::string_view name) {
  if (name.empty() || name.front() != 'Z') return std::nullopt;
  if (name.size() == 1) return 1;
  int n = 0;
  for (char c : name.substr(1)) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    n = n * 10 + (c - '0');
    if (n > 4096) return std::nullopt;
  }
  if (n < 1) return std::nullopt;
  return n;
}

std::string number_text(const Json& j, const char* what) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return format_double(j.get<double>());
  throw FormatError(std::string("expected a decimal string for ") + what);
}

LatticeRecord parse_record(const Json& j, const Catalog& so_far) {
  if (!j.is_object() || !j.contains("name") || !j.contains("dim")) {
    throw FormatError("catalog record needs 'name' and 'dim'");
  }
  const auto name = j.at("name").get<std::string>();
  const int dim = j.at("dim").get<int>();
  if (dim < 1) throw FormatError("lattice '" + name + "' has non-positive dimension");

  std::optional<LatticeRecord> rec;
  if (j.contains("dual_of")) {
    const auto primal_name = j.at("dual_of").get<std::string>();
    if (!so_far.contains(primal_name)) {
      throw FormatError("lattice '" + name + "' is the dual of unknown '" + primal_name + "'");
    }
    const auto primal = so_far.get(primal_name);
    rec = make_record(name, dual(primal.generator));
    rec->dual_of = primal_name;
  } else {
    if (!j.contains("rows")) throw FormatError("lattice '" + name + "' has no 'rows'");
    const auto& rows = j.at("rows");
    if (!rows.is_array() || static_cast<int>(rows.size()) != dim) {
      throw FormatError("lattice '" + name + "' row count does not match dim");
    }
    Matrix m(dim, dim);
    std::vector<std::string> text;
    text.reserve(static_cast<std::size_t>(dim) * dim);
    for (int r = 0; r < dim; ++r) {
      const auto& row = rows.at(r);
      if (!row.is_array() || static_cast<int>(row.size()) != dim) {
        throw FormatError("lattice '" + name + "' row " + std::to_string(r) + " has wrong length");
      }
      for (int c = 0; c < dim; ++c) {
        text.push_back(number_text(row.at(c), "generator entry"));
        m(r, c) = parse_double(text.back());
      }
    }
    try {
      rec = make_record(name, GeneratorMatrix(std::move(m)));
    } catch (const DegenerateLatticeError& e) {
      throw DegenerateLatticeError("lattice '" + name + "': " + e.what());
    }
    rec->row_text = std::move(text);
  }
  if (rec->dim() != dim) throw FormatError("lattice '" + name + "' dimension mismatch");

  if (j.contains("reference_volume")) {
    rec->volume_text = number_text(j.at("reference_volume"), "reference_volume");
    rec->reference_volume = parse_double(rec->volume_text);
    const double actual = rec->generator.volume();
    if (std::abs(actual - rec->reference_volume) > kVolumeRelTol * actual) {
      throw FormatError("lattice '" + name + "': reference_volume " + rec->volume_text +
                        " disagrees with |det| = " + format_double(actual));
    }
  }
  if (j.contains("reference_nsm")) {
    rec->nsm_text = number_text(j.at("reference_nsm"), "reference_nsm");
    rec->reference_nsm = parse_double(rec->nsm_text);
  }
  if (j.contains("reference_nsm_std")) {
    rec->reference_nsm_std = parse_double(number_text(j.at("reference_nsm_std"), "reference_nsm_std"));
  }
  if (j.contains("gram_det")) rec->gram_det_text = number_text(j.at("gram_det"), "gram_det");
  if (j.contains("note")) rec->note = j.at("note").get<std::string>();
  return *std::move(rec);
}

Json record_to_json(const LatticeRecord& rec) {
  Json j;
  j["name"] = rec.name;
  j["dim"] = rec.dim();
  if (rec.dual_of) {
    j["dual_of"] = *rec.dual_of;
  } else {
    const int n = rec.dim();
    Json rows = Json::array();
    for (int r = 0; r < n; ++r) {
      Json row = Json::array();
      for (int c = 0; c < n; ++c) {
        const auto idx = static_cast<std::size_t>(r) * n + c;
        row.push_back(idx < rec.row_text.size() ? rec.row_text[idx]
                                                : format_double(rec.generator(r, c)));
      }
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["reference_volume"] =
        rec.volume_text.empty() ? format_double(rec.reference_volume) : rec.volume_text;
    if (!rec.gram_det_text.empty()) j["gram_det"] = rec.gram_det_text;
  }
  if (!rec.note.empty()) j["note"] = rec.note;
  if (rec.reference_nsm) {
    j["reference_nsm"] = rec.nsm_text.empty() ? format_double(*rec.reference_nsm) : rec.nsm_text;
  }
  if (rec.reference_nsm_std) j["reference_nsm_std"] = format_double(*rec.reference_nsm_std);
  return j;
}

}  // namespace

LatticeRecord make_record(std::string name, GeneratorMatrix g, std::optional<double> reference_nsm,
                          std::string note) {
  const double v = g.volume();
  return LatticeRecord{.name = std::move(name),
                       .generator = std::move(g),
                       .reference_volume = v,
                       .reference_nsm = reference_nsm,
                       .reference_nsm_std = std::nullopt,
                       .note = std::move(note),
                       .dual_of = std::nullopt,
                       .row_text = {},
                       .volume_text = {},
                       .nsm_text = {},
                       .gram_det_text = {}};
}

LatticeRecord cubic_record(int n) {
  auto rec = make_record(n == 1 ? "Z" : "Z" + std::to_string(n), GeneratorMatrix::identity(n),
                         1.0 / 12.0, "cubic lattice");
  rec.reference_nsm_std = 0.0;
  return rec;
}

Catalog Catalog::from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("catalog is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "latfuse-catalog") {
    throw FormatError("not a latfuse-catalog document");
  }
  if (doc.value("version", 0) != 1) {
    throw FormatError("unsupported catalog version " + doc.value("version", Json(0)).dump());
  }
  Catalog cat;
  try {
    for (const auto& j : doc.at("lattices")) {
      auto rec = parse_record(j, cat);
      if (cat.contains(rec.name)) throw FormatError("duplicate lattice '" + rec.name + "'");
      cat.entries_.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed catalog: ") + e.what());
  }
  return cat;
}

Catalog Catalog::from_file(const std::filesystem::path& path) {
  return from_json(read_file(path));
}

const Catalog& Catalog::builtin() {
  static const Catalog cat = from_json(detail::kEmbeddedCatalog);
  return cat;
}

const Catalog& Catalog::default_catalog() {
  static const Catalog cat = [] {
    const char* env = std::getenv("LATFUSE_CATALOG");
    if (env != nullptr && *env != '\0') return from_file(env);
    return builtin();
  }();
  return cat;
}

bool Catalog::contains(std::string_view name) const {
  if (cubic_dim(name)) return true;
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const LatticeRecord& r) { return r.name == name; });
}

LatticeRecord Catalog::get(std::string_view name) const {
  for (const auto& r : entries_) {
    if (r.name == name) return r;
  }
  if (auto n = cubic_dim(name)) {
    auto rec = cubic_record(*n);
    rec.name = std::string(name);
    return rec;
  }
  std::ostringstream msg;
  msg << "unknown lattice '" << name << "'; available: Z, Z<n>";
  for (const auto& r : entries_) msg << ", " << r.name;
  throw UnknownLatticeError(msg.str());
}

std::vector<std::string> Catalog::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& r : entries_) out.push_back(r.name);
  return out;
}

void Catalog::add(LatticeRecord record) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const LatticeRecord& r) { return r.name == record.name; });
  if (it != entries_.end()) {
    *it = std::move(record);
  } else {
    entries_.push_back(std::move(record));
  }
}

std::string Catalog::to_json() const {
  Json doc;
  doc["format"] = "latfuse-catalog";
  doc["version"] = 1;
  doc["lattices"] = Json::array();
  for (const auto& r : entries_) doc["lattices"].push_back(record_to_json(r));
  return doc.dump(1) + "\n";
}

LatticeRecord catalog_get(std::string_view name) { return Catalog::default_catalog().get(name); }

LatticeRecord read_lattice_file(const std::filesystem::path& path) {
  const auto cat = Catalog::from_file(path);
  if (cat.entries().size() != 1) {
    throw FormatError(path.string() + ": expected exactly one lattice record, found " +
                      std::to_string(cat.entries().size()));
  }
  return cat.entries().front();
}

void write_lattice_file(const std::filesystem::path& path, const LatticeRecord& record) {
  Catalog cat;
  auto copy = record;
  if (copy.dual_of) {
    // A lone dual cannot reference its primal; store the generator itself.
    copy.dual_of.reset();
  }
  cat.add(std::move(copy));
  write_file_atomic(path, cat.to_json());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw FormatError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace latfuse
