#include "oaf/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <vector>

#include "json.hpp"
#include "oaf/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw container blobs are little-endian");

namespace oaf {

namespace {

using nlohmann::json;

// Strip a known container suffix so callers may pass "x", "x.vol.json" or
// "x.vol.raw" interchangeably.
std::string strip_suffix(std::string base, const std::string& kind) {
  for (const std::string& tail : {"." + kind + ".json", "." + kind + ".raw"}) {
    if (base.size() > tail.size() &&
        base.compare(base.size() - tail.size(), tail.size(), tail) == 0) {
      return base.substr(0, base.size() - tail.size());
    }
  }
  return base;
}

std::string file_name(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("io: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("io: malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("io: cannot write " + path);
  out << j.dump(2) << "\n";
}

template <typename T>
void write_raw(const std::string& path, const std::vector<T>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("io: cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(T)));
}

template <typename T>
std::vector<T> read_raw(const std::string& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw ConfigError("io: cannot open " + path);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != count * sizeof(T))
    throw ConfigError("io: " + path + " has wrong size for its sidecar");
  std::vector<T> data(count);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw ConfigError("io: short read from " + path);
  return data;
}

template <typename T>
T require(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key))
    throw ConfigError("io: " + path + " is missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("io: " + path + " has a malformed '" + key + "' entry");
  }
}

}  // namespace

void save_volume(const std::string& base_in, const Volume& volume) {
  validate(volume);
  const std::string base = strip_suffix(base_in, "vol");
  json j;
  j["dims"] = {volume.depth, volume.na, volume.nb};
  j["dtype"] = "f32";
  j["layout"] = "depth-fastest";
  if (volume.spacing_um) j["spacing_um"] = *volume.spacing_um;
  j["data"] = file_name(base) + ".vol.raw";
  write_json(base + ".vol.json", j);
  write_raw(base + ".vol.raw", volume.voxels);
}

Volume load_volume(const std::string& base_in) {
  const std::string base = strip_suffix(base_in, "vol");
  const std::string side = base + ".vol.json";
  json j = read_json(side);
  auto dims = require<std::vector<int>>(j, "dims", side);
  if (dims.size() != 3) throw ConfigError("io: " + side + " dims must have 3 entries");
  if (require<std::string>(j, "dtype", side) != "f32")
    throw ConfigError("io: " + side + " has unsupported dtype");
  if (require<std::string>(j, "layout", side) != "depth-fastest")
    throw ConfigError("io: " + side + " has unsupported layout");
  Volume v;
  v.depth = dims[0];
  v.na = dims[1];
  v.nb = dims[2];
  if (v.depth < 1 || v.na < 1 || v.nb < 1)
    throw ConfigError("io: " + side + " dims must be positive");
  if (j.contains("spacing_um")) {
    auto s = require<std::vector<double>>(j, "spacing_um", side);
    if (s.size() != 3)
      throw ConfigError("io: " + side + " spacing_um must have 3 entries");
    v.spacing_um = {s[0], s[1], s[2]};
  }
  v.voxels = read_raw<float>(base + ".vol.raw",
                             static_cast<std::size_t>(v.depth) * v.na * v.nb);
  validate(v);
  return v;
}

void save_labels(const std::string& base_in, const LabeledVolume& labels,
                 bool converged) {
  validate(labels);
  const std::string base = strip_suffix(base_in, "lbl");
  json j;
  j["dims"] = {labels.depth, labels.na, labels.nb};
  j["c"] = labels.layer_count;
  j["dtype"] = "u8";
  j["converged"] = converged;
  j["data"] = file_name(base) + ".lbl.raw";
  write_json(base + ".lbl.json", j);
  write_raw(base + ".lbl.raw", labels.labels);
}

LabeledVolume load_labels(const std::string& base_in, bool* converged) {
  const std::string base = strip_suffix(base_in, "lbl");
  const std::string side = base + ".lbl.json";
  json j = read_json(side);
  auto dims = require<std::vector<int>>(j, "dims", side);
  if (dims.size() != 3) throw ConfigError("io: " + side + " dims must have 3 entries");
  if (require<std::string>(j, "dtype", side) != "u8")
    throw ConfigError("io: " + side + " has unsupported dtype");
  LabeledVolume l;
  l.depth = dims[0];
  l.na = dims[1];
  l.nb = dims[2];
  l.layer_count = require<int>(j, "c", side);
  if (l.depth < 1 || l.na < 1 || l.nb < 1)
    throw ConfigError("io: " + side + " dims must be positive");
  l.labels = read_raw<std::uint8_t>(
      base + ".lbl.raw", static_cast<std::size_t>(l.depth) * l.na * l.nb);
  if (converged) *converged = j.value("converged", true);
  validate(l);
  return l;
}

void save_distances(const std::string& base_in, const Mat& matrix) {
  const std::string base = strip_suffix(base_in, "dst");
  json j;
  j["n"] = static_cast<std::int64_t>(matrix.rows());
  j["c"] = static_cast<std::int64_t>(matrix.cols());
  j["dtype"] = "f32";
  j["data"] = file_name(base) + ".dst.raw";
  write_json(base + ".dst.json", j);
  std::vector<float> flat(static_cast<std::size_t>(matrix.size()));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i)
    for (Eigen::Index k = 0; k < matrix.cols(); ++k)
      flat[i * matrix.cols() + k] = static_cast<float>(matrix(i, k));
  write_raw(base + ".dst.raw", flat);
}

Mat load_distances(const std::string& base_in) {
  const std::string base = strip_suffix(base_in, "dst");
  const std::string side = base + ".dst.json";
  json j = read_json(side);
  const auto n = require<std::int64_t>(j, "n", side);
  const auto c = require<std::int64_t>(j, "c", side);
  if (n < 1 || c < 1) throw ConfigError("io: " + side + " n and c must be positive");
  if (require<std::string>(j, "dtype", side) != "f32")
    throw ConfigError("io: " + side + " has unsupported dtype");
  auto flat = read_raw<float>(base + ".dst.raw",
                              static_cast<std::size_t>(n) * c);
  Mat m(n, c);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t k = 0; k < c; ++k) m(i, k) = flat[i * c + k];
  return m;
}

void save_dictionary(const std::string& base_in,
                     const PrototypeDictionary& dict) {
  if (dict.layer_count < 1 ||
      dict.prototypes.size() != static_cast<std::size_t>(dict.layer_count))
    throw ConfigError("io: dictionary layer structure inconsistent");
  const std::string base = strip_suffix(base_in, "dict");
  json j;
  j["layer_count"] = dict.layer_count;
  j["dims"] = dict.dim;
  j["dtype"] = "f64";
  std::vector<int> counts;
  std::vector<double> blob;
  for (const auto& layer : dict.prototypes) {
    counts.push_back(static_cast<int>(layer.size()));
    for (const auto& proto : layer) {
      if (proto.rows() != dict.dim || proto.cols() != dict.dim)
        throw ConfigError("io: prototype dimension mismatch");
      for (int r = 0; r < dict.dim; ++r)
        for (int s = 0; s < dict.dim; ++s) blob.push_back(proto(r, s));
    }
  }
  j["k_per_layer"] = counts;
  j["data"] = file_name(base) + ".dict.raw";
  write_json(base + ".dict.json", j);
  write_raw(base + ".dict.raw", blob);
}

PrototypeDictionary load_dictionary(const std::string& base_in) {
  const std::string base = strip_suffix(base_in, "dict");
  const std::string side = base + ".dict.json";
  json j = read_json(side);
  PrototypeDictionary dict;
  dict.layer_count = require<int>(j, "layer_count", side);
  dict.dim = require<int>(j, "dims", side);
  if (require<std::string>(j, "dtype", side) != "f64")
    throw ConfigError("io: " + side + " has unsupported dtype");
  auto counts = require<std::vector<int>>(j, "k_per_layer", side);
  if (dict.layer_count < 1 || dict.dim < 1 ||
      counts.size() != static_cast<std::size_t>(dict.layer_count))
    throw ConfigError("io: " + side + " layer structure inconsistent");
  std::size_t total = 0;
  for (int k : counts) {
    if (k < 1) throw ConfigError("io: " + side + " has an empty layer");
    total += static_cast<std::size_t>(k);
  }
  const std::size_t per = static_cast<std::size_t>(dict.dim) * dict.dim;
  auto blob = read_raw<double>(base + ".dict.raw", total * per);
  std::size_t off = 0;
  dict.prototypes.resize(dict.layer_count);
  for (int l = 0; l < dict.layer_count; ++l) {
    for (int k = 0; k < counts[l]; ++k) {
      Eigen::MatrixXd proto(dict.dim, dict.dim);
      for (int r = 0; r < dict.dim; ++r)
        for (int s = 0; s < dict.dim; ++s) proto(r, s) = blob[off++];
      dict.prototypes[l].push_back(std::move(proto));
    }
  }
  return dict;
}

void save_report(const std::string& path, const MetricsReport& report) {
  json j;
  j["per_layer_dice"] = report.per_layer_dice;
  j["per_boundary_mae"] = report.per_boundary_mae;  // NaN serializes as null
  j["excluded_columns"] = report.excluded_columns;
  j["violations"] = report.violations;
  j["runtime_s"] = report.runtime_s;
  j["converged"] = report.converged;
  write_json(path, j);
}

MetricsReport load_report(const std::string& path) {
  json j = read_json(path);
  MetricsReport rep;
  rep.per_layer_dice = require<std::vector<double>>(j, "per_layer_dice", path);
  if (!j.contains("per_boundary_mae") || !j.at("per_boundary_mae").is_array())
    throw ConfigError("io: " + path + " has a malformed 'per_boundary_mae' entry");
  for (const auto& v : j.at("per_boundary_mae")) {
    rep.per_boundary_mae.push_back(
        v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                    : v.get<double>());
  }
  rep.excluded_columns =
      require<std::vector<long long>>(j, "excluded_columns", path);
  rep.violations = require<long long>(j, "violations", path);
  rep.runtime_s = require<double>(j, "runtime_s", path);
  rep.converged = require<bool>(j, "converged", path);
  return rep;
}

}  // namespace oaf
